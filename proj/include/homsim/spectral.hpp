#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <vector>

#include "homsim/errors.hpp"
#include "homsim/units.hpp"

// Spectral and temporal primitives: pump pulses, filter profiles and the
// bandwidth <-> coherence-time conversions they imply. Everything here is a
// pure function of its inputs.

namespace homsim {

enum class FilterShape { kRectangular, kGaussian };

// Pulsed pump laser, described by its center wavelength, intensity-FWHM
// duration and bandwidth, and repetition rate. Duration and bandwidth are
// independent inputs; their product is only sanity-checked against the
// transform limit (real mode-locked fibre lasers run chirped).
struct PumpPulse {
    double center_wavelength_nm = 0.0;
    double duration_fwhm_ps = 0.0;
    double bandwidth_fwhm_nm = 0.0;
    double repetition_rate_mhz = 0.0;

    double angular_center() const { return angular_frequency(center_wavelength_nm); }
    double bandwidth_angular() const {
        return bandwidth_to_angular(bandwidth_fwhm_nm, center_wavelength_nm);
    }
    double pulses_per_minute() const { return repetition_rate_mhz * 1e6 * 60.0; }

    // Duration x bandwidth in ordinary-frequency units (THz ps).
    double time_bandwidth_product() const {
        return duration_fwhm_ps * kSpeedOfLight * bandwidth_fwhm_nm /
               (center_wavelength_nm * center_wavelength_nm);
    }

    void validate() const {
        if (center_wavelength_nm <= 0 || duration_fwhm_ps <= 0 ||
            bandwidth_fwhm_nm <= 0 || repetition_rate_mhz <= 0) {
            throw InvalidInputError("PumpPulse: all fields must be strictly positive");
        }
        if (time_bandwidth_product() < 0.3) {
            throw InvalidInputError(
                "PumpPulse: time-bandwidth product below 0.3; duration or "
                "bandwidth is inconsistent with a near-transform-limited pulse");
        }
    }
};

// Spectral filter with peak amplitude transmission 1. bandwidth_fwhm is in
// picometres to keep Table-style configs readable.
struct FilterSpec {
    FilterShape shape = FilterShape::kRectangular;
    double center_wavelength_nm = 0.0;
    double bandwidth_fwhm_pm = 0.0;

    double bandwidth_nm() const { return bandwidth_fwhm_pm * 1e-3; }
    double angular_center() const { return angular_frequency(center_wavelength_nm); }
    double bandwidth_angular() const {
        return bandwidth_to_angular(bandwidth_nm(), center_wavelength_nm);
    }

    void validate() const {
        if (bandwidth_fwhm_pm <= 0)
            throw InvalidInputError("FilterSpec: bandwidth must be > 0");
        if (center_wavelength_nm <= 0)
            throw InvalidInputError("FilterSpec: center wavelength must be > 0");
    }
};

// Uniform sampling grid in angular frequency, endpoints inclusive.
//
// validate() enforces the constraints expected of configuration-supplied
// grids (power-of-two point count >= 128). Small hand-built grids for
// narrow-band oracles can skip it.
struct FrequencyGrid {
    double center = 0.0;  // rad/ps
    double span = 0.0;    // rad/ps
    int points = 0;

    double spacing() const { return span / (points - 1); }
    double omega(int k) const { return center - 0.5 * span + k * spacing(); }
    double min_omega() const { return center - 0.5 * span; }
    double max_omega() const { return center + 0.5 * span; }

    Eigen::VectorXd omegas() const {
        Eigen::VectorXd w(points);
        for (int k = 0; k < points; ++k) w[k] = omega(k);
        return w;
    }

    bool same_as(const FrequencyGrid& other, double tol = 1e-9) const {
        return points == other.points && std::abs(center - other.center) < tol &&
               std::abs(span - other.span) < tol;
    }

    void validate() const {
        if (span <= 0 || center <= 0)
            throw InvalidInputError("FrequencyGrid: center and span must be > 0");
        if (points < 128 || (points & (points - 1)) != 0)
            throw InvalidInputError("FrequencyGrid: points must be a power of two >= 128");
    }
};

// Grid sized for a filter following the span >= 8 x bandwidth rule.
inline FrequencyGrid grid_for_filter(const FilterSpec& filter, int points,
                                     double span_factor = 8.0) {
    filter.validate();
    return FrequencyGrid{filter.angular_center(),
                         span_factor * filter.bandwidth_angular(), points};
}

// Coherence time of a photon selected by `filter`.
//
// Rectangular band: tau_c = lambda^2 / (c dlambda), the first zero of the
// sinc-shaped temporal amplitude (600 pm at 1553.3 nm -> 13.4 ps).
// Gaussian band: the FWHM convention tau_c = 0.441 lambda^2 / (c dlambda),
// with 0.441 = kGaussianTbp, the transform-limited Gaussian product.
inline double coherence_time(const FilterSpec& filter) {
    filter.validate();
    double tau = filter.center_wavelength_nm * filter.center_wavelength_nm /
                 (kSpeedOfLight * filter.bandwidth_nm());
    if (filter.shape == FilterShape::kGaussian) tau *= kGaussianTbp;
    return tau;
}

namespace detail {

// Amplitude of an ideal top-hat band sampled on cells of width `cell`:
// sqrt of the covered fraction of [omega - cell/2, omega + cell/2].
// Interior cells give exactly 1, exterior exactly 0; the two edge cells
// carry fractional weight so that band integrals converge at O(N^-2)
// instead of O(N^-1).
inline double rect_cell_amplitude(double omega, double center, double full_width,
                                  double cell) {
    const double lo = std::max(omega - 0.5 * cell, center - 0.5 * full_width);
    const double hi = std::min(omega + 0.5 * cell, center + 0.5 * full_width);
    if (hi <= lo) return 0.0;
    const double frac = std::min(1.0, (hi - lo) / cell);
    return std::sqrt(frac);
}

}  // namespace detail

// Filter amplitude transmission sampled on `grid`; values in [0, 1] with
// peak exactly 1. Throws GridCoverageError when the FWHM passband is not
// inside the grid.
inline Eigen::VectorXd filter_amplitude(const FilterSpec& filter,
                                        const FrequencyGrid& grid) {
    filter.validate();
    const double w0 = filter.angular_center();
    const double dw = filter.bandwidth_angular();
    if (w0 - 0.5 * dw < grid.min_omega() || w0 + 0.5 * dw > grid.max_omega()) {
        throw GridCoverageError("filter_amplitude: passband extends outside grid");
    }
    Eigen::VectorXd amp(grid.points);
    if (filter.shape == FilterShape::kRectangular) {
        const double cell = grid.spacing();
        for (int k = 0; k < grid.points; ++k)
            amp[k] = detail::rect_cell_amplitude(grid.omega(k), w0, dw, cell);
    } else {
        const double sigma = fwhm_to_sigma(dw);  // of the intensity profile
        for (int k = 0; k < grid.points; ++k) {
            const double nu = grid.omega(k) - w0;
            amp[k] = std::exp(-nu * nu / (4.0 * sigma * sigma));
        }
    }
    return amp;
}

// Gaussian pump spectral amplitude on `grid`, normalized so that
// sum |A|^2 * spacing = 1. The |A|^2 profile has the pulse's FWHM bandwidth.
inline Eigen::VectorXd pump_spectral_amplitude(const PumpPulse& pump,
                                               const FrequencyGrid& grid) {
    pump.validate();
    const double w0 = pump.angular_center();
    if (std::abs(w0 - grid.center) > 0.25 * grid.span) {
        throw GridCoverageError("pump_spectral_amplitude: grid not centered near pump");
    }
    const double sigma = fwhm_to_sigma(pump.bandwidth_angular());
    Eigen::VectorXd amp(grid.points);
    for (int k = 0; k < grid.points; ++k) {
        const double nu = grid.omega(k) - w0;
        amp[k] = std::exp(-nu * nu / (4.0 * sigma * sigma));
    }
    amp /= std::sqrt(amp.squaredNorm() * grid.spacing());
    return amp;
}

}  // namespace homsim
