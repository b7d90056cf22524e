#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>

#include "spdc/errors.hpp"
#include "spdc/material.hpp"
#include "spdc/units.hpp"

namespace spdc {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

// Branches are globally ordered by phase index, n_fast <= n_slow.  For the
// negative-type crystals used here the type-I pump propagates on the fast
// branch ("extraordinary" in uniaxial language) and the downconversion
// photons in their birth crystal on the slow branch ("ordinary").
enum class Branch { fast, slow };
enum class Pol { ordinary, extraordinary };

inline Vec3 direction_from_angles(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

namespace detail {

inline void check_unit(const Vec3& s) {
    if (std::abs(s.norm() - 1.0) > 1e-9) throw ArgumentError("direction must have unit norm");
}

} // namespace detail

// ---------------------------------------------------------------------------
// uniaxial closed forms

/// phase index with lambda-derivatives; theta_k measured from the optic axis
inline D2 index_uniaxial_d(const Material& m, double lambda_nm, Pol branch, double theta_k) {
    if (std::isnan(theta_k)) throw ArgumentError("theta_k is NaN");
    if (branch == Pol::ordinary) return m.n_axis(0, lambda_nm);
    const double c2 = std::cos(theta_k) * std::cos(theta_k);
    const double s2 = 1.0 - c2;
    const D2 inv = D2(c2) / m.n2_axis(0, lambda_nm) + D2(s2) / m.n2_axis(2, lambda_nm);
    return D2(1.0) / sqrt(inv);
}

inline double index_uniaxial(const Material& m, double lambda_nm, Pol branch, double theta_k) {
    if (m.symmetry == Symmetry::biaxial)
        throw ArgumentError(m.name + ": index_uniaxial on biaxial material");
    return index_uniaxial_d(m, lambda_nm, branch, theta_k).f;
}

// ---------------------------------------------------------------------------
// biaxial: Fresnel equation of wave normals
//
// With x = 1/n^2 and b_i = 1/n_i^2 the equation reduces to the quadratic
//   x^2 - x * sum_i s_i^2 (b_j + b_k) + sum_i s_i^2 b_j b_k = 0   (ijk cyclic)
// whose two roots give the slow (smaller x) and fast (larger x) branch.

struct FresnelRoots {
    D2 n_fast; // with wavelength derivatives
    D2 n_slow;
};

inline FresnelRoots fresnel_wave_normals_d(const Material& m, double lambda_nm, const Vec3& s) {
    detail::check_unit(s);
    const double sx2 = s.x() * s.x(), sy2 = s.y() * s.y(), sz2 = s.z() * s.z();
    const D2 bx = D2(1.0) / m.n2_axis(0, lambda_nm);
    const D2 by = D2(1.0) / m.n2_axis(1, lambda_nm);
    const D2 bz = D2(1.0) / m.n2_axis(2, lambda_nm);
    const D2 B = D2(sx2) * (by + bz) + D2(sy2) * (bx + bz) + D2(sz2) * (bx + by);
    const D2 C = D2(sx2) * by * bz + D2(sy2) * bx * bz + D2(sz2) * bx * by;
    D2 disc = B * B - D2(4.0) * C;
    // the discriminant is a perfect square analytically; near branch
    // degeneracy (uniaxial limit, optic axes) cancellation can leave an
    // eps-level negative residue
    if (disc.f < -1e-12 * B.f * B.f)
        throw NumericError(m.name + ": Fresnel discriminant negative", disc.f);
    D2 r;
    if (disc.f <= 1e-24 * B.f * B.f) {
        // degenerate branches: split is zero and its derivative undefined;
        // both branches share the mean dispersion
        r = D2(0.0);
    } else {
        r = sqrt(disc);
    }
    const D2 x_hi = (B + r) * D2(0.5); // larger 1/n^2 -> fast branch
    const D2 x_lo = (B - r) * D2(0.5);
    return {D2(1.0) / sqrt(x_hi), D2(1.0) / sqrt(x_lo)};
}

/// both phase indices for a propagation direction, n_fast <= n_slow
inline std::pair<double, double> index_biaxial(const Material& m, double lambda_nm, const Vec3& s) {
    const auto r = fresnel_wave_normals_d(m, lambda_nm, s);
    return {r.n_fast.f, r.n_slow.f};
}

inline D2 index_branch_d(const Material& m, double lambda_nm, const Vec3& s, Branch br) {
    const auto r = fresnel_wave_normals_d(m, lambda_nm, s);
    return br == Branch::fast ? r.n_fast : r.n_slow;
}

inline double index_branch(const Material& m, double lambda_nm, const Vec3& s, Branch br) {
    return index_branch_d(m, lambda_nm, s, br).f;
}

// E-field eigenpolarization of the branch with index n: null vector of the
// wave-equation operator M = n^2 (I - s s^T) - diag(n_i^2).  The eigenvector
// of the smallest |eigenvalue| is robust at principal planes and at the
// degenerate ordinary branch of uniaxial materials.
inline Vec3 polarization(const Material& m, double lambda_nm, const Vec3& s, double n) {
    const double n2 = n * n;
    Eigen::Matrix3d M = n2 * (Eigen::Matrix3d::Identity() - s * s.transpose());
    for (int i = 0; i < 3; ++i) M(i, i) -= m.n2_axis(i, lambda_nm).f;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
    int best = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(es.eigenvalues()[i]) < std::abs(es.eigenvalues()[best])) best = i;
    Vec3 e = es.eigenvectors().col(best);
    // fix an overall sign for reproducibility
    int imax = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(e[i]) > std::abs(e[imax])) imax = i;
    if (e[imax] < 0.0) e = -e;
    return e;
}

/// unit Poynting (ray) direction: S ~ E x (s x E) = s - E (E . s)
inline Vec3 ray_direction(const Vec3& s, const Vec3& e_field) {
    Vec3 t = s - e_field * e_field.dot(s);
    return t.normalized();
}

// ---------------------------------------------------------------------------
// walkoff

/// uniaxial closed form, extraordinary branch: tan(rho) = n^2/2 sin(2 theta) (1/ne^2 - 1/no^2)
inline double walkoff_uniaxial(const Material& m, double lambda_nm, double theta_k) {
    const double n = index_uniaxial(m, lambda_nm, Pol::extraordinary, theta_k);
    const double inv_no2 = 1.0 / m.n2_axis(0, lambda_nm).f;
    const double inv_ne2 = 1.0 / m.n2_axis(2, lambda_nm).f;
    return std::atan(0.5 * n * n * std::sin(2.0 * theta_k) * (inv_ne2 - inv_no2));
}

/// angle between the Poynting vector and wave normal for a branch
inline double walkoff_angle(const Material& m, double lambda_nm, const Vec3& s, Branch br) {
    const double n = index_branch(m, lambda_nm, s, br);
    const Vec3 e = polarization(m, lambda_nm, s, n);
    const Vec3 t = ray_direction(s, e);
    const double c = std::clamp(t.dot(s), -1.0, 1.0);
    return std::acos(c);
}

inline double walkoff_angle(const Material& m, double lambda_nm, double theta_k) {
    if (m.symmetry == Symmetry::biaxial)
        throw ArgumentError(m.name + ": scalar-angle walkoff needs a uniaxial material");
    return walkoff_uniaxial(m, lambda_nm, theta_k);
}

// ---------------------------------------------------------------------------
// group velocity and GVD along a fixed branch/direction

/// group index n_g = n - lambda dn/dlambda along a fixed branch/direction
inline double group_index(const D2& n_of_lambda, double lambda_nm) {
    return n_of_lambda.f - lambda_nm * n_of_lambda.d;
}

/// group velocity [mm/fs]
inline double group_velocity(const D2& n_of_lambda, double lambda_nm) {
    const double ng = group_index(n_of_lambda, lambda_nm);
    if (!(ng > 0.0)) throw NumericError("non-positive group index", ng);
    return c_mm_fs / ng;
}

/// group velocity dispersion d2k/domega2 [fs^2/mm]; normal dispersion positive
inline double gvd(const D2& n_of_lambda, double lambda_nm) {
    // d2k/dw2 = lambda^3 n'' / (2 pi c^2), with n'' per nm^2 and c in nm/fs,
    // then converted from fs^2/nm to fs^2/mm
    const double per_nm = lambda_nm * lambda_nm * lambda_nm * n_of_lambda.dd /
                          (2.0 * pi * c_nm_fs * c_nm_fs);
    return per_nm * 1.0e6;
}

// edge guard: derivative evaluation needs interior wavelengths
inline void check_interior(const Material& m, double lambda_nm, double margin_nm = 0.5) {
    m.check_wavelength(lambda_nm);
    if (lambda_nm < m.lambda_min_nm + margin_nm || lambda_nm > m.lambda_max_nm - margin_nm)
        throw DomainError(m.name + ": wavelength too close to transparency edge for derivatives");
}

inline double group_velocity(const Material& m, double lambda_nm, Pol branch, double theta_k) {
    check_interior(m, lambda_nm);
    return group_velocity(index_uniaxial_d(m, lambda_nm, branch, theta_k), lambda_nm);
}

inline double group_velocity(const Material& m, double lambda_nm, const Vec3& s, Branch br) {
    check_interior(m, lambda_nm);
    return group_velocity(index_branch_d(m, lambda_nm, s, br), lambda_nm);
}

inline double gvd(const Material& m, double lambda_nm, Pol branch, double theta_k) {
    check_interior(m, lambda_nm);
    return gvd(index_uniaxial_d(m, lambda_nm, branch, theta_k), lambda_nm);
}

inline double gvd(const Material& m, double lambda_nm, const Vec3& s, Branch br) {
    check_interior(m, lambda_nm);
    return gvd(index_branch_d(m, lambda_nm, s, br), lambda_nm);
}

/// k(omega) [rad/mm] along a fixed branch/direction, from vacuum wavelength
inline double k_of_omega(const Material& m, double omega_radfs, const Vec3& s, Branch br) {
    const double lambda_nm = lambda_of_omega(omega_radfs);
    const double n = index_branch(m, lambda_nm, s, br);
    return n * omega_radfs / c_mm_fs;
}

// ---------------------------------------------------------------------------
// plates: oriented slabs with faces normal to a mount axis
//
// The orientation is the rotation taking lab vectors into the crystal
// principal frame.  Plane-wave propagation through a stack conserves the
// transverse wavevector; the longitudinal component in each plate solves
// |k| = n(k_hat) omega / c for the chosen branch.

struct PlateFrame {
    Eigen::Matrix3d lab_to_crystal = Eigen::Matrix3d::Identity();

    Vec3 to_crystal(const Vec3& v_lab) const { return lab_to_crystal * v_lab; }
    Vec3 to_lab(const Vec3& v_cry) const { return lab_to_crystal.transpose() * v_cry; }
};

// Frame for a plate cut at (theta, phi): the mount normal (= lab z before
// tilting the whole assembly) has crystal-frame direction (theta, phi).
// azimuth rotates the mounted plate about the lab z axis; azimuth = 0 puts
// the crystal direction that tunes with theta in the lab x-z (horizontal)
// plane, azimuth = pi/2 in the vertical plane.
inline PlateFrame plate_frame(double theta_cut, double phi_cut, double azimuth_lab) {
    const Vec3 u = direction_from_angles(theta_cut, phi_cut); // lab z in crystal frame
    // theta-tuning direction: d u / d theta, normalized
    Vec3 tdir(std::cos(theta_cut) * std::cos(phi_cut), std::cos(theta_cut) * std::sin(phi_cut),
              -std::sin(theta_cut));
    tdir.normalize();
    const Vec3 w2 = u.cross(tdir).normalized(); // completes right-handed triad
    Eigen::Matrix3d R; // columns: crystal-frame images of lab x, y, z (azimuth = 0)
    R.col(0) = tdir;
    R.col(1) = w2;
    R.col(2) = u;
    Eigen::Matrix3d rotz = Eigen::AngleAxisd(azimuth_lab, Vec3::UnitZ()).toRotationMatrix();
    PlateFrame f;
    f.lab_to_crystal = R * rotz.transpose();
    return f;
}

struct KzSolution {
    double kz;   // [rad/mm]
    double n;    // phase index at the solved direction
    Vec3 e_lab;  // unit E-field direction, lab frame
    Vec3 ray_lab;
};

/// longitudinal wavevector in a plate at fixed lab transverse wavevector
inline KzSolution kz_in_plate(const Material& m, const PlateFrame& frame, double lambda_nm,
                              const Vec2& kperp_per_mm, Branch br) {
    m.check_wavelength(lambda_nm);
    const double k0 = k0_per_mm(lambda_nm);
    const double kp2 = kperp_per_mm.squaredNorm();

    double nmax = 0.0, nmin = 1e9;
    for (int i = 0; i < 3; ++i) {
        const double ni = m.n_axis(i, lambda_nm).f;
        nmax = std::max(nmax, ni);
        nmin = std::min(nmin, ni);
    }
    auto f = [&](double kz) {
        const Vec3 k_lab(kperp_per_mm.x(), kperp_per_mm.y(), kz);
        const double kn = k_lab.norm();
        const Vec3 s = frame.to_crystal(k_lab / kn);
        return kn - index_branch(m, lambda_nm, s, br) * k0;
    };
    double lo = 0.0, hi = 1.001 * nmax * k0;
    if (kp2 >= nmax * nmax * k0 * k0 || f(lo) > 0.0)
        throw DomainError(m.name + ": evanescent geometry, |k_perp| exceeds available k");
    if (f(hi) < 0.0) throw NumericError(m.name + ": kz bracket failure", f(hi));
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? hi : lo) = mid;
        if (hi - lo < 1e-13 * nmax * k0) break;
    }
    const double kz = 0.5 * (lo + hi);

    KzSolution sol;
    sol.kz = kz;
    const Vec3 k_lab(kperp_per_mm.x(), kperp_per_mm.y(), kz);
    const Vec3 s_cry = frame.to_crystal(k_lab.normalized());
    sol.n = index_branch(m, lambda_nm, s_cry, br);
    const Vec3 e_cry = polarization(m, lambda_nm, s_cry, sol.n);
    sol.e_lab = frame.to_lab(e_cry);
    sol.ray_lab = frame.to_lab(ray_direction(s_cry, e_cry));
    return sol;
}

/// branch picked by polarization continuity with a lab-frame hint
inline KzSolution kz_in_plate_polarized(const Material& m, const PlateFrame& frame,
                                        double lambda_nm, const Vec2& kperp_per_mm,
                                        const Vec3& pol_hint_lab) {
    const KzSolution a = kz_in_plate(m, frame, lambda_nm, kperp_per_mm, Branch::fast);
    const KzSolution b = kz_in_plate(m, frame, lambda_nm, kperp_per_mm, Branch::slow);
    return std::abs(a.e_lab.dot(pol_hint_lab)) >= std::abs(b.e_lab.dot(pol_hint_lab)) ? a : b;
}

} // namespace spdc
