#pragma once

#include <cmath>

// Internal unit system: time in ps, wavelength in nm, angular frequency in
// rad/ps. All conversion constants live here.

namespace homsim {

// Speed of light in nm/ps (= 2.99792458e8 m/s).
inline constexpr double kSpeedOfLight = 299792.458;

// Time-bandwidth product (FWHM duration x FWHM frequency) of a
// transform-limited Gaussian pulse: 2 ln2 / pi ~ 0.441.
inline constexpr double kGaussianTbp = 0.441270724672059;

// FWHM of a Gaussian intensity profile <-> standard deviation.
inline constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2 sqrt(2 ln2)

inline double angular_frequency(double wavelength_nm) {
    return 2.0 * M_PI * kSpeedOfLight / wavelength_nm;
}

// FWHM bandwidth in wavelength -> FWHM bandwidth in angular frequency,
// linearized about the center wavelength.
inline double bandwidth_to_angular(double bandwidth_nm, double wavelength_nm) {
    return 2.0 * M_PI * kSpeedOfLight * bandwidth_nm / (wavelength_nm * wavelength_nm);
}

inline double fwhm_to_sigma(double fwhm) { return fwhm / kFwhmPerSigma; }
inline double sigma_to_fwhm(double sigma) { return sigma * kFwhmPerSigma; }

// sin(x)/x with the removable singularity filled in.
inline double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

}  // namespace homsim
