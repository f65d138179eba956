#pragma once

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "homsim/errors.hpp"
#include "homsim/sources.hpp"

// Hong-Ou-Mandel dip profiles and visibilities: the closed-form visibility
// model and the numerical density-matrix overlap behind it.

namespace homsim {

// Coincidence probability (normalized to far-delay baseline 1) or raw
// counts versus relative delay.
struct HomScan {
    std::vector<double> delays_ps;
    std::vector<double> values;
    std::vector<double> errors;  // empty outside counts mode

    bool has_errors() const { return !errors.empty(); }

    void validate(bool probability_mode = true) const {
        if (delays_ps.size() != values.size())
            throw InvalidInputError("HomScan: delay/value size mismatch");
        for (std::size_t k = 1; k < delays_ps.size(); ++k)
            if (delays_ps[k] <= delays_ps[k - 1])
                throw InvalidInputError("HomScan: delays must be strictly increasing");
        if (probability_mode) {
            for (double v : values)
                if (v < 0.0 || v > 1.05)
                    throw InvalidInputError("HomScan: probability outside [0, 1.05]");
        }
    }
};

// Closed-form two-source HOM visibility,
//
//   V = 1 / sqrt(1 + dt_a^2/(2 dtau^2) + dt_b^2/(2 dtau^2)),
//
// with dt_a, dt_b the effective wavepacket durations of the two sources and
// dtau the coherence time set by the idler filters.
inline double eq1_visibility(double dt_a, double dt_b, double dtau) {
    if (dtau <= 0) throw InvalidInputError("eq1_visibility: dtau must be > 0");
    if (dt_a < 0 || dt_b < 0)
        throw InvalidInputError("eq1_visibility: durations must be >= 0");
    const double d2 = 2.0 * dtau * dtau;
    return 1.0 / std::sqrt(1.0 + dt_a * dt_a / d2 + dt_b * dt_b / d2);
}

// Mandel overlap Tr(rho_a D(delay) rho_b D(delay)^+) with D the diagonal
// delay phase exp(i omega delay). Real in [0, 1] up to grid roundoff.
inline double overlap(const SpectralDensityMatrix& rho_a,
                      const SpectralDensityMatrix& rho_b, double delay_ps) {
    if (!rho_a.grid.same_as(rho_b.grid))
        throw GridMismatchError("overlap: states live on different grids");
    const int n = rho_a.grid.points;

    Eigen::VectorXcd phase(n);
    for (int k = 0; k < n; ++k) {
        // Only frequency differences enter; use detunings from the grid
        // center to keep the phases small.
        const double nu = rho_a.grid.omega(k) - rho_a.grid.center;
        phase[k] = std::polar(1.0, nu * delay_ps);
    }

    // Tr(A B') with B' = D B D^+ needs only the elementwise product
    // A(k,l) B(l,k) phase(l) conj(phase(k)).
    std::complex<double> tr = 0.0;
    for (int k = 0; k < n; ++k) {
        std::complex<double> row = 0.0;
        for (int l = 0; l < n; ++l) {
            row += rho_a.elements(k, l) * rho_b.elements(l, k) * phase[l];
        }
        tr += row * std::conj(phase[k]);
    }
    return tr.real();
}

// Normalized coincidence probability p(delay) = 1 - overlap; the far-delay
// limit is 1 for any pair of normalized states.
inline HomScan hom_dip(const SpectralDensityMatrix& rho_a,
                       const SpectralDensityMatrix& rho_b,
                       const std::vector<double>& delays_ps) {
    HomScan scan;
    scan.delays_ps = delays_ps;
    scan.values.reserve(delays_ps.size());
    for (double d : delays_ps) scan.values.push_back(1.0 - overlap(rho_a, rho_b, d));
    scan.validate();
    return scan;
}

// Delay axis of the default scan: 41 points over +-40 ps (the published
// figure's range).
inline std::vector<double> default_delays() {
    std::vector<double> d(41);
    for (int k = 0; k < 41; ++k) d[k] = -40.0 + 2.0 * k;
    return d;
}

// Dip visibility against the mean far-delay baseline, where "far" means
// |delay| >= 5 x coherence time.
inline double visibility_of(const HomScan& scan, double coherence_time_ps) {
    if (scan.values.empty()) throw InvalidInputError("visibility_of: empty scan");
    const double far = 5.0 * coherence_time_ps;
    double baseline = 0.0;
    int n_far = 0;
    double minimum = scan.values.front();
    for (std::size_t k = 0; k < scan.values.size(); ++k) {
        if (std::abs(scan.delays_ps[k]) >= far) {
            baseline += scan.values[k];
            ++n_far;
        }
        minimum = std::min(minimum, scan.values[k]);
    }
    if (n_far == 0) {
        throw InsufficientBaselineError(
            "visibility_of: no samples at |delay| >= 5 x coherence time");
    }
    baseline /= n_far;
    return (baseline - minimum) / baseline;
}

// Eq. 1 visibility re-evaluated with the idler filters narrowed to
// `new_bandwidth_pm`; the effective durations are unchanged.
inline double predict_narrowband(const SourceSpec& src_a, const SourceSpec& src_b,
                                 double new_bandwidth_pm,
                                 DurationRule rule = DurationRule::kQuadrature) {
    if (new_bandwidth_pm <= 0)
        throw InvalidInputError("predict_narrowband: bandwidth must be > 0");
    FilterSpec narrowed = src_a.idler_filter;
    narrowed.bandwidth_fwhm_pm = new_bandwidth_pm;
    const double dtau = coherence_time(narrowed);
    return eq1_visibility(effective_duration(src_a, rule),
                          effective_duration(src_b, rule), dtau);
}

}  // namespace homsim
