#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "homsim/errors.hpp"
#include "homsim/interference.hpp"

// Least-squares dip fitting: damped Gauss-Newton on the four-parameter model
//   m(delay) = B * (1 - V * s((delay - delta0) / w))
// where s is a unit-peak dip profile whose FWHM is exactly w.

namespace homsim {

enum class DipModel { kSincSquared, kGaussian };

// sinc^2 argument scale such that s(+-1/2) = 1/2, i.e. w maps directly to
// the FWHM: sinc(pi k0 / 2)^2 = 1/2 at pi k0 / 2 = 1.39155737825151.
inline constexpr double kSincFwhmScale = 0.8858929413789049;

inline double dip_profile(double x, DipModel model) {
    if (model == DipModel::kGaussian) {
        return std::exp(-4.0 * M_LN2 * x * x);
    }
    const double s = sinc(M_PI * kSincFwhmScale * x);
    return s * s;
}

struct DipFit {
    double baseline = 0.0;
    double visibility = 0.0;
    double width_fwhm_ps = 0.0;
    double center_ps = 0.0;
    double residual_norm = 0.0;
    std::array<double, 4> param_errors{};  // baseline, visibility, width, center
    bool converged = false;
    int iterations = 0;
    std::vector<double> objective_trace;  // accepted objective values
};

// Thrown when the optimizer exhausts its iteration budget; carries the best
// parameters reached so far.
class FitFailureError : public Error {
  public:
    FitFailureError(const std::string& what, DipFit best)
        : Error(what), best_so_far(std::move(best)) {}
    DipFit best_so_far;
};

// Linear-interpolated full width at half dip depth. Baseline is the mean of
// the outer quartile of samples (by |delay|).
inline double fwhm_numeric(const HomScan& scan) {
    const std::size_t n = scan.values.size();
    if (n < 4) throw InvalidInputError("fwhm_numeric: need at least 4 samples");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(scan.delays_ps[a]) > std::abs(scan.delays_ps[b]);
    });
    const std::size_t n_outer = (n + 3) / 4;
    double baseline = 0.0;
    for (std::size_t k = 0; k < n_outer; ++k) baseline += scan.values[order[k]];
    baseline /= n_outer;

    std::size_t i_min = 0;
    for (std::size_t k = 1; k < n; ++k)
        if (scan.values[k] < scan.values[i_min]) i_min = k;
    const double depth = baseline - scan.values[i_min];
    if (depth <= 1e-12 * std::max(std::abs(baseline), 1.0))
        throw EdgeError("fwhm_numeric: scan has no dip");
    if (i_min == 0 || i_min == n - 1)
        throw EdgeError("fwhm_numeric: dip minimum touches the scan edge");

    const double half = scan.values[i_min] + 0.5 * depth;
    double left = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = i_min; k-- > 0;) {
        if (scan.values[k] >= half) {
            const double y0 = scan.values[k], y1 = scan.values[k + 1];
            left = scan.delays_ps[k] + (y0 - half) / (y0 - y1) *
                                           (scan.delays_ps[k + 1] - scan.delays_ps[k]);
            break;
        }
    }
    double right = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = i_min + 1; k < n; ++k) {
        if (scan.values[k] >= half) {
            const double y0 = scan.values[k - 1], y1 = scan.values[k];
            right = scan.delays_ps[k - 1] + (half - y0) / (y1 - y0) *
                                                (scan.delays_ps[k] - scan.delays_ps[k - 1]);
            break;
        }
    }
    if (std::isnan(left) || std::isnan(right))
        throw EdgeError("fwhm_numeric: half-depth crossing outside the scan");
    return right - left;
}

namespace detail {

inline double dip_model_value(const std::array<double, 4>& p, double delay,
                              DipModel model) {
    const double w = p[2] != 0.0 ? p[2] : 1e-12;
    return p[0] * (1.0 - p[1] * dip_profile((delay - p[3]) / w, model));
}

inline double dip_objective(const std::array<double, 4>& p, const HomScan& scan,
                            const std::vector<double>& weights, DipModel model) {
    double chi2 = 0.0;
    for (std::size_t k = 0; k < scan.values.size(); ++k) {
        const double r = scan.values[k] - dip_model_value(p, scan.delays_ps[k], model);
        chi2 += weights[k] * r * r;
    }
    return chi2;
}

}  // namespace detail

// Weighted least-squares fit of the dip model. Weights are 1/sigma^2 when
// the scan carries errors (zero errors fall back to the smallest positive
// one), unit otherwise. Parameter errors come from the curvature of the
// objective at the optimum.
inline DipFit fit_dip(const HomScan& scan, DipModel model = DipModel::kSincSquared) {
    const std::size_t n = scan.values.size();
    if (n < 6) throw InvalidInputError("fit_dip: need at least 6 scan points");
    if (scan.delays_ps.size() != n)
        throw InvalidInputError("fit_dip: delay/value size mismatch");

    std::vector<double> weights(n, 1.0);
    if (scan.has_errors()) {
        double sigma_floor = std::numeric_limits<double>::infinity();
        for (double s : scan.errors)
            if (s > 0.0) sigma_floor = std::min(sigma_floor, s);
        if (std::isfinite(sigma_floor)) {
            for (std::size_t k = 0; k < n; ++k) {
                const double s = scan.errors[k] > 0.0 ? scan.errors[k] : sigma_floor;
                weights[k] = 1.0 / (s * s);
            }
        }
    }

    // Heuristic start: baseline from the outer quartile, center at the
    // minimum sample, width from the numeric FWHM when available.
    std::array<double, 4> p{};  // B, V, w, delta0
    {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(scan.delays_ps[a]) > std::abs(scan.delays_ps[b]);
        });
        const std::size_t n_outer = (n + 3) / 4;
        double base = 0.0;
        for (std::size_t k = 0; k < n_outer; ++k) base += scan.values[order[k]];
        base /= n_outer;
        std::size_t i_min = 0;
        for (std::size_t k = 1; k < n; ++k)
            if (scan.values[k] < scan.values[i_min]) i_min = k;
        p[0] = base != 0.0 ? base : 1.0;
        p[1] = std::clamp((base - scan.values[i_min]) / p[0], 0.0, 1.05);
        p[3] = scan.delays_ps[i_min];
        try {
            p[2] = fwhm_numeric(scan);
        } catch (const Error&) {
            p[2] = 0.25 * (scan.delays_ps.back() - scan.delays_ps.front());
        }
    }

    DipFit fit;
    double chi2 = detail::dip_objective(p, scan, weights, model);
    fit.objective_trace.push_back(chi2);
    double lambda = 1e-3;
    Eigen::MatrixXd jacobian(n, 4);
    Eigen::VectorXd residual(n);
    Eigen::Matrix4d jtj_final = Eigen::Matrix4d::Zero();

    constexpr int kMaxIterations = 200;
    int it = 0;
    for (; it < kMaxIterations; ++it) {
        for (std::size_t k = 0; k < n; ++k) {
            const double sw = std::sqrt(weights[k]);
            residual[k] = sw * (scan.values[k] -
                                detail::dip_model_value(p, scan.delays_ps[k], model));
            for (int j = 0; j < 4; ++j) {
                const double h = 1e-7 * std::max(1.0, std::abs(p[j]));
                auto pp = p;
                pp[j] += h;
                auto pm = p;
                pm[j] -= h;
                jacobian(k, j) = sw *
                                 (detail::dip_model_value(pp, scan.delays_ps[k], model) -
                                  detail::dip_model_value(pm, scan.delays_ps[k], model)) /
                                 (2.0 * h);
            }
        }
        const Eigen::Matrix4d jtj = jacobian.transpose() * jacobian;
        const Eigen::Vector4d jtr = jacobian.transpose() * residual;
        jtj_final = jtj;

        bool accepted = false;
        for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
            Eigen::Matrix4d damped = jtj;
            for (int j = 0; j < 4; ++j)
                damped(j, j) += lambda * std::max(jtj(j, j), 1e-12);
            const Eigen::Vector4d step = damped.ldlt().solve(jtr);
            auto trial = p;
            for (int j = 0; j < 4; ++j) trial[j] += step[j];
            const double trial_chi2 = detail::dip_objective(trial, scan, weights, model);
            if (std::isfinite(trial_chi2) && trial_chi2 <= chi2) {
                const double rel = (chi2 - trial_chi2) / std::max(chi2, 1e-300);
                p = trial;
                chi2 = trial_chi2;
                fit.objective_trace.push_back(chi2);
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (rel < 1e-10) {
                    fit.converged = true;
                }
            } else {
                lambda *= 10.0;
            }
        }
        if (!accepted || fit.converged) {
            fit.converged = fit.converged || !accepted;  // stationary point
            break;
        }
    }

    fit.iterations = it + 1;
    fit.baseline = p[0];
    fit.visibility = p[1];
    fit.width_fwhm_ps = std::abs(p[2]);
    fit.center_ps = p[3];
    fit.residual_norm = std::sqrt(chi2);

    // Curvature-based standard errors, scaled by the reduced chi^2.
    const double dof = static_cast<double>(n) - 4.0;
    const double scale = dof > 0 ? chi2 / dof : 1.0;
    Eigen::JacobiSVD<Eigen::Matrix4d> svd(jtj_final,
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double tol = 1e-12 * svd.singularValues()[0];
    for (int j = 0; j < 4; ++j) {
        double var = 0.0;
        for (int m = 0; m < 4; ++m) {
            const double s = svd.singularValues()[m];
            if (s > tol) {
                var += svd.matrixV()(j, m) * svd.matrixV()(j, m) / s;
            } else {
                var = std::numeric_limits<double>::infinity();
                break;
            }
        }
        fit.param_errors[j] = std::isfinite(var) ? std::sqrt(var * scale)
                                                 : std::numeric_limits<double>::infinity();
    }
    if (!fit.converged)
        throw FitFailureError("fit_dip: no convergence within the iteration budget", fit);
    return fit;
}

}  // namespace homsim
