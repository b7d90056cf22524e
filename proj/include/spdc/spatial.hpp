#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "spdc/phasematch.hpp"

namespace spdc {

enum class Arm { signal, idler };

// Two-crystal type-I source with solved nominal collection geometry.  The
// pair of downconversion crystals shares one cut; crystal 2 is crystal 1
// rotated 90 degrees about the pump axis.  Crystal 1 phasematches the
// horizontal pump component and emits the |VV> pair; the |HH> pair is born
// in crystal 2 from the pump component that crossed crystal 1 ordinary.
struct TwoCrystalSource {
    CrystalPlate c1, c2;
    double lambda_p_nm = 0.0, lambda_s_nm = 0.0, lambda_i_nm = 0.0;
    double iris_distance_mm = 840.0;
    double q0_per_mm = 0.0;     // nominal transverse wavevector of the collected pair
    double theta_ext_s0 = 0.0;  // nominal arm axes (external)
    double theta_ext_i0 = 0.0;

    double arm_axis_angle(Arm a) const { return a == Arm::signal ? theta_ext_s0 : theta_ext_i0; }
    double lambda_arm(Arm a) const { return a == Arm::signal ? lambda_s_nm : lambda_i_nm; }
};

inline TwoCrystalSource make_source(const Material& m, double theta_cut, double phi_cut,
                                    double thickness_mm, double lambda_p_nm, double lambda_s_nm,
                                    double iris_distance_mm = 840.0) {
    TwoCrystalSource s;
    s.c1 = CrystalPlate(m, theta_cut, phi_cut, thickness_mm, PlateRole::dc_crystal_1);
    // the 90-degree relative rotation lives in the mounting azimuths
    // (azimuth_crystal_1 vs azimuth_crystal_2)
    s.c2 = CrystalPlate(m, theta_cut, phi_cut, thickness_mm, PlateRole::dc_crystal_2);
    s.lambda_p_nm = lambda_p_nm;
    s.lambda_s_nm = lambda_s_nm;
    s.lambda_i_nm = SpdcTriplet::from_signal(lambda_p_nm, lambda_s_nm).lambda_i_nm;
    s.iris_distance_mm = iris_distance_mm;
    const auto g = emission_angle(s.c1, lambda_p_nm, lambda_s_nm, azimuth_crystal_1);
    s.q0_per_mm = g.q_per_mm;
    s.theta_ext_s0 = g.theta_ext_s;
    s.theta_ext_i0 = g.theta_ext_i;
    return s;
}

// A birefringent compensator in one downconversion arm, mounted with faces
// normal to that arm's axis.  azimuth_arm orients the tuning plane in the
// arm frame (0 = scan plane); the rotated_90 orientation flag of the plate
// adds another quarter turn.
struct SpatialCompensator {
    CrystalPlate plate;
    Arm arm = Arm::signal;
    double azimuth_arm = 0.0;
};

struct PhaseComponents {
    double phi_e = 0.0;     // extraordinary crossing of the second crystal
    double phi_o = 0.0;     // ordinary-leg and pump-leg remainder
    double phi_delta = 0.0; // walkoff-displacement (external) phase
    double total() const { return phi_e + phi_o + phi_delta; }
};

namespace detail {

// ray tilt of the Poynting vector against the plate normal, as a transverse
// displacement per unit thickness
inline Vec2 ray_tilt(const KzSolution& sol) {
    return Vec2(sol.ray_lab.x() / sol.ray_lab.z(), sol.ray_lab.y() / sol.ray_lab.z());
}

// Rotation lab -> arm frame.  The signal arm sits at +theta0 in the lab
// horizontal plane, the idler arm at -theta0 (its own angle).  Arm x points
// inward (toward the pump axis) so that equal azimuths describe the
// mirror-symmetric compensator arrangement in the two arms; with the
// crystal cuts used here azimuth 0 (tuning plane in the scan, axis tipping
// inward) is the compensating orientation.
inline Eigen::Matrix3d arm_rotation(Arm arm, double theta0) {
    const double c = std::cos(theta0), s = std::sin(theta0);
    Eigen::Matrix3d A;
    if (arm == Arm::signal)
        A << -c, 0, s,
              0, -1, 0,
              s, 0, c;
    else
        A << c, 0, s,
             0, 1, 0,
            -s, 0, c;
    return A;
}

} // namespace detail

// ---------------------------------------------------------------------------
// relative phase accumulated inside the two-crystal stack
//
// Plane-wave bookkeeping at fixed transverse wavevector: each plate
// contributes kz * thickness on the branch actually travelled; Snell
// continuity is automatic because the transverse wavevector is conserved
// through every face.  Walkoff enters through the branch kz and through the
// pump-walkoff displacement of the birth point, which shifts the phase of a
// transverse plane-wave component by -k_perp . x_birth.

/// relative phase share of one arm (first-crystal-pair path minus
/// second-crystal-pair path, signed onto the |VV> amplitude) at the signed
/// pair transverse wavevector Q (signal side +Q, idler side -Q), with the
/// component partition used for reporting
inline PhaseComponents phi_components(const TwoCrystalSource& src, Arm arm, double Q_per_mm) {
    const Material& m = *src.c1.material;
    const double d1 = src.c1.thickness_mm, d2 = src.c2.thickness_mm;
    const double lam = src.lambda_arm(arm);
    const double sign = arm == Arm::signal ? 1.0 : -1.0;
    const Vec2 kp(sign * Q_per_mm, 0.0);

    const PlateFrame f1 = src.c1.frame(azimuth_crystal_1);
    const PlateFrame f2 = src.c2.frame(azimuth_crystal_2);

    // pump legs (collinear, k_perp = 0); the pump is collimated, so pump
    // walkoff displaces intensity envelopes but no plane-wave phases
    const KzSolution p_fast_1 = kz_in_plate(m, f1, src.lambda_p_nm, Vec2(0, 0), Branch::fast);
    const KzSolution p_slow_1 = kz_in_plate(m, f1, src.lambda_p_nm, Vec2(0, 0), Branch::slow);
    const KzSolution p_fast_2 = kz_in_plate(m, f2, src.lambda_p_nm, Vec2(0, 0), Branch::fast);

    // daughter legs
    const KzSolution or1 = kz_in_plate(m, f1, lam, kp, Branch::slow); // birth leg in c1
    const KzSolution or2 = kz_in_plate(m, f2, lam, kp, Branch::slow); // birth leg in c2
    // first-crystal photon crossing c2: branch by polarization continuity
    const KzSolution ex2 = kz_in_plate_polarized(m, f2, lam, kp, or1.e_lab);

    // per-arm share of the pump-leg phase difference (first-crystal pair
    // minus second-crystal pair)
    const double pump_legs =
        0.5 * (0.5 * d1 * p_fast_1.kz - d1 * p_slow_1.kz - 0.5 * d2 * p_fast_2.kz);

    // The first-crystal pair carries the |VV> amplitude when its birth
    // branch is vertically polarized (uniaxial crystals here); for BiBO the
    // in-plane daughter branch makes it the |HH> pair and the sign flips.
    const double vv_sign = std::abs(or1.e_lab.y()) >= std::abs(or1.e_lab.x()) ? 1.0 : -1.0;

    // Ray-segment partition: Phi_e is the ray phase of the extraordinary
    // crossing relative to the ordinary reference, Phi_delta the external
    // phase from the walkoff-displaced exit point; their walk terms cancel
    // so the sum reduces to plane-wave kz bookkeeping.
    const Vec2 walk = d2 * (detail::ray_tilt(ex2) - detail::ray_tilt(or2));
    PhaseComponents c;
    c.phi_e = vv_sign * (d2 * (ex2.kz - or2.kz) + kp.dot(walk));
    c.phi_delta = vv_sign * -kp.dot(walk);
    // ordinary birth legs and pump-leg share; the or2 reference subtracted
    // inside phi_e is restored here so the three parts sum to the total
    c.phi_o = vv_sign * (pump_legs + 0.5 * d1 * or1.kz + 0.5 * d2 * or2.kz);
    return c;
}

/// net relative phase of one arm inside the downconversion crystals,
/// phi_dc = Phi_e + Phi_o + Phi_delta
inline double phi_dc(const TwoCrystalSource& src, Arm arm, double Q_per_mm) {
    return phi_components(src, arm, Q_per_mm).total();
}

/// relative phase a compensator plate adds between the V and H amplitudes of
/// the photon in its arm
inline double phi_c(const TwoCrystalSource& src, const SpatialCompensator& comp, double Q_per_mm) {
    if (comp.plate.thickness_mm == 0.0) return 0.0;
    const double lam = src.lambda_arm(comp.arm);
    const double sign = comp.arm == Arm::signal ? 1.0 : -1.0;
    const Eigen::Matrix3d A = detail::arm_rotation(comp.arm, src.arm_axis_angle(comp.arm));

    // photon's vacuum wavevector in the arm frame
    const double k0 = k0_per_mm(lam);
    const double kx_lab = sign * Q_per_mm;
    const double kz_lab = std::sqrt(k0 * k0 - kx_lab * kx_lab);
    const Vec3 k_arm = A * Vec3(kx_lab, 0.0, kz_lab);
    const Vec2 kp_arm(k_arm.x(), k_arm.y());

    // the plate frame is defined directly in arm coordinates (mount normal
    // along the arm axis, azimuth about it)
    const PlateFrame pf = comp.plate.frame(comp.azimuth_arm);

    // lab H/V polarization hints seen in the arm frame
    const Vec3 h_arm = A * Vec3(1, 0, 0);
    const Vec3 v_arm = A * Vec3(0, 1, 0);
    const KzSolution on_h = kz_in_plate_polarized(*comp.plate.material, pf, lam, kp_arm, h_arm);
    const KzSolution on_v = kz_in_plate_polarized(*comp.plate.material, pf, lam, kp_arm, v_arm);
    return comp.plate.thickness_mm * (on_v.kz - on_h.kz);
}

// ---------------------------------------------------------------------------
// phase maps at the iris plane

struct PhaseMap {
    double plane_distance_mm = 0.0;
    double lambda_s_nm = 0.0, lambda_i_nm = 0.0;
    std::uint64_t setup_hash = 0;
    std::vector<double> x_mm;      // signal-iris coordinate
    std::vector<double> phase_deg; // unwrapped total relative phase
};

/// nearest-multiple-of-2pi continuation along the scan
inline void unwrap_inplace(std::vector<double>& phase_rad) {
    for (size_t i = 1; i < phase_rad.size(); ++i) {
        const double d = phase_rad[i] - phase_rad[i - 1];
        phase_rad[i] -= 2.0 * pi * std::round(d / (2.0 * pi));
    }
}

/// pair transverse wavevector collected at signal-iris coordinate x
inline double q_of_iris_x(const TwoCrystalSource& src, double x_mm) {
    const double L = src.iris_distance_mm;
    return k0_per_mm(src.lambda_s_nm) * x_mm / std::sqrt(x_mm * x_mm + L * L);
}

/// total relative phase of the collected pair whose signal lands at x [rad]
inline double pair_phase(const TwoCrystalSource& src,
                         const std::vector<SpatialCompensator>& comps, double x_mm) {
    const double Q = q_of_iris_x(src, x_mm);
    double phi = phi_dc(src, Arm::signal, Q) + phi_dc(src, Arm::idler, Q);
    for (const auto& c : comps) phi += phi_c(src, c, Q);
    return phi;
}

/// sampled map over the signal-iris coordinate, centered on the arm axis
inline PhaseMap phase_map(const TwoCrystalSource& src,
                          const std::vector<SpatialCompensator>& comps, double range_mm,
                          int n_samples, std::uint64_t setup_hash = 0) {
    if (n_samples < 2) throw ArgumentError("phase_map needs n_samples >= 2");
    PhaseMap map;
    map.plane_distance_mm = src.iris_distance_mm;
    map.lambda_s_nm = src.lambda_s_nm;
    map.lambda_i_nm = src.lambda_i_nm;
    map.setup_hash = setup_hash;
    const double x0 = src.iris_distance_mm * std::tan(src.theta_ext_s0);
    std::vector<double> phase;
    phase.reserve(static_cast<size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
        const double x = x0 - 0.5 * range_mm + range_mm * i / double(n_samples - 1);
        map.x_mm.push_back(x);
        phase.push_back(pair_phase(src, comps, x));
    }
    unwrap_inplace(phase);
    map.phase_deg.reserve(phase.size());
    for (double p : phase) map.phase_deg.push_back(rad2deg(p));
    return map;
}

/// peak-to-peak phase variation over a window centered on the arm axis [deg]
inline double phase_variation_deg(const TwoCrystalSource& src,
                                  const std::vector<SpatialCompensator>& comps,
                                  double window_mm, int n_samples = 41) {
    const PhaseMap m = phase_map(src, comps, window_mm, n_samples);
    double lo = m.phase_deg.front(), hi = lo;
    for (double p : m.phase_deg) {
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    return hi - lo;
}

// ---------------------------------------------------------------------------
// spatial compensator design

namespace detail {

// RMS variation of one arm's pair-visible phase across the iris [rad].
// Components of phi_dc odd in the signed pair momentum cancel between the
// conjugate arms and are invisible to the collected state, so the design
// target is the even part plus the arm's own compensator.
inline double arm_rms(const TwoCrystalSource& src, const SpatialCompensator& comp,
                      double iris_diameter_mm, int n = 17) {
    const double x0 = src.iris_distance_mm * std::tan(src.arm_axis_angle(comp.arm));
    const double k0 = k0_per_mm(src.lambda_arm(comp.arm));
    std::vector<double> ph;
    ph.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x = x0 - 0.5 * iris_diameter_mm + iris_diameter_mm * i / double(n - 1);
        const double Q = k0 * x / std::sqrt(x * x + src.iris_distance_mm * src.iris_distance_mm);
        const double even = 0.5 * (phi_dc(src, comp.arm, Q) + phi_dc(src, comp.arm, -Q));
        ph.push_back(even + phi_c(src, comp, Q));
    }
    unwrap_inplace(ph);
    double mean = 0.0;
    for (double p : ph) mean += p;
    mean /= double(n);
    double ss = 0.0;
    for (double p : ph) ss += (p - mean) * (p - mean);
    return std::sqrt(ss / double(n));
}

} // namespace detail

struct CompensatorDesign {
    double thickness_mm = 0.0;
    double azimuth_arm = 0.0; // orientation that opposes the source slope
    double rms_residual_rad = 0.0;
};

/// thickness of a compensator of the given material/cut minimizing the RMS
/// phase variation of its arm over the iris; golden-section, 0.1 um
/// tolerance; the mounting orientation (azimuth 0 or pi) is picked so the
/// compensator slope opposes the source
inline CompensatorDesign design_spatial_compensator(const TwoCrystalSource& src,
                                                    const Material& comp_material,
                                                    double comp_cut_rad, Arm arm,
                                                    double iris_diameter_mm = 5.0,
                                                    double max_thickness_mm = 5.0) {
    auto rms_of = [&](double l, double az) {
        SpatialCompensator c;
        c.plate = CrystalPlate(comp_material, comp_cut_rad, 0.0, l,
                               arm == Arm::signal ? PlateRole::spatial_comp_signal
                                                  : PlateRole::spatial_comp_idler);
        c.arm = arm;
        c.azimuth_arm = az;
        return detail::arm_rms(src, c, iris_diameter_mm);
    };

    const double rms0 = rms_of(0.0, 0.0);
    CompensatorDesign out;
    if (rms0 < 1e-12) return out; // nothing to compensate

    const double probe = 0.02;
    double azimuth = 0.0;
    if (rms_of(probe, 0.0) >= rms0) {
        if (rms_of(probe, pi) >= rms0)
            throw DomainError("cannot compensate with this cut: compensator phase slope cannot "
                              "oppose the source in either orientation");
        azimuth = pi;
    }

    // golden-section on [0, max_thickness]
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = max_thickness_mm;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = rms_of(x1, azimuth), f2 = rms_of(x2, azimuth);
    while (b - a > 1e-4) { // 0.1 um
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a);
            f1 = rms_of(x1, azimuth);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a);
            f2 = rms_of(x2, azimuth);
        }
    }
    out.thickness_mm = 0.5 * (a + b);
    out.azimuth_arm = azimuth;
    out.rms_residual_rad = rms_of(out.thickness_mm, azimuth);
    return out;
}

} // namespace spdc
