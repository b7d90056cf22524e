#pragma once

#include <cmath>
#include <numbers>

// Unit conventions used throughout the library:
//   wavelength nm, time fs, plate thickness mm, angles rad internally
//   (degrees only at user-facing interfaces), angular frequency rad/fs,
//   wavenumbers rad/mm.

namespace spdc {

inline constexpr double c_nm_fs = 299.792458;    // vacuum speed of light [nm/fs]
inline constexpr double c_mm_fs = 2.99792458e-4; // vacuum speed of light [mm/fs]
inline constexpr double pi = std::numbers::pi;

constexpr double deg2rad(double d) { return d * pi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / pi; }

/// vacuum angular frequency [rad/fs] of a vacuum wavelength [nm]
inline double omega_of_lambda(double lambda_nm) {
    return 2.0 * pi * c_nm_fs / lambda_nm;
}

inline double lambda_of_omega(double omega_radfs) {
    return 2.0 * pi * c_nm_fs / omega_radfs;
}

/// vacuum wavenumber [rad/mm]
inline double k0_per_mm(double lambda_nm) {
    return 2.0 * pi * 1.0e6 / lambda_nm;
}

/// width of a spectral interval [nm] around center [nm], as angular frequency [rad/fs]
inline double bandwidth_nm_to_radfs(double dlambda_nm, double center_nm) {
    return 2.0 * pi * c_nm_fs * dlambda_nm / (center_nm * center_nm);
}

inline double bandwidth_radfs_to_nm(double domega_radfs, double center_nm) {
    return domega_radfs * center_nm * center_nm / (2.0 * pi * c_nm_fs);
}

// Gaussian amplitude envelopes are written exp(-(nu/sigma)^2).  The quoted
// bandwidth of a source or filter is the FWHM of the *intensity* profile,
// so intensity FWHM = sigma * sqrt(2 ln 2).
inline double sigma_from_intensity_fwhm(double fwhm) {
    return fwhm / std::sqrt(2.0 * std::numbers::ln2);
}

inline double intensity_fwhm_from_sigma(double sigma) {
    return sigma * std::sqrt(2.0 * std::numbers::ln2);
}

} // namespace spdc
