#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>

#include "spdc/optics.hpp"

namespace spdc {

enum class PlateRole { dc_crystal_1, dc_crystal_2, spatial_comp_signal, spatial_comp_idler, precompensator };
enum class PlateOrientation { as_cut, rotated_90 };

// A cut birefringent plate mounted with faces normal to the beam axis.
// The downconversion pair shares one cut; dc_crystal_2 is dc_crystal_1
// rotated 90 degrees about the pump axis.
struct CrystalPlate {
    const Material* material = nullptr;
    double theta_cut = 0.0; // rad, optical frame
    double phi_cut = 0.0;   // rad
    double thickness_mm = 0.0;
    PlateRole role = PlateRole::dc_crystal_1;
    PlateOrientation orientation = PlateOrientation::as_cut;

    CrystalPlate() = default;
    CrystalPlate(const Material& m, double theta, double phi, double d, PlateRole r,
                 PlateOrientation o = PlateOrientation::as_cut)
        : material(&m), theta_cut(theta), phi_cut(phi), thickness_mm(d), role(r), orientation(o) {
        if (!(d >= 0.0)) throw ArgumentError("plate thickness must be >= 0");
    }

    /// crystal direction seen by a wave along the mount normal
    Vec3 cut_direction() const { return direction_from_angles(theta_cut, phi_cut); }

    /// lab orientation for a given mounting azimuth (x-z plane = 0)
    PlateFrame frame(double azimuth_lab) const {
        const double extra = orientation == PlateOrientation::rotated_90 ? pi / 2.0 : 0.0;
        return plate_frame(theta_cut, phi_cut, azimuth_lab + extra);
    }
};

// Mounting convention for the two-crystal source: the collection irises
// scan the horizontal x axis, the first crystal's tuning plane is
// horizontal (it phasematches the H pump component and emits the |VV>
// pair), and the second crystal is the first rotated 90 degrees about the
// pump axis, so the |VV> photons cross it on the extraordinary branch with
// the tuning plane perpendicular to the scan.
inline constexpr double azimuth_crystal_1 = 0.0;
inline constexpr double azimuth_crystal_2 = pi / 2.0;

struct SpdcTriplet {
    double lambda_p_nm;
    double lambda_s_nm;
    double lambda_i_nm;
    double external_half_angle_s = 0.0; // rad
    double external_half_angle_i = 0.0;

    SpdcTriplet(double lp, double ls, double li) : lambda_p_nm(lp), lambda_s_nm(ls), lambda_i_nm(li) {
        const double lhs = 1.0 / lp, rhs = 1.0 / ls + 1.0 / li;
        if (std::abs(lhs - rhs) > 1e-12 * lhs)
            throw ArgumentError("triplet violates energy conservation 1/lp = 1/ls + 1/li");
    }

    /// signal wavelength + energy conservation fix the idler
    static SpdcTriplet from_signal(double lp, double ls) {
        const double li = 1.0 / (1.0 / lp - 1.0 / ls);
        return SpdcTriplet(lp, ls, li);
    }
};

// ---------------------------------------------------------------------------
// type-I longitudinal mismatch
//
// Pump propagates along lab z on the fast ("extraordinary") branch; the
// daughters leave on the slow ("ordinary") branch with equal and opposite
// transverse momenta in the horizontal plane.

struct EmissionGeometry {
    double q_per_mm;     // transverse wavevector magnitude shared by the pair
    double theta_int_s;  // internal wave-normal angles from the pump axis
    double theta_int_i;
    double theta_ext_s;  // external angles after Snell refraction at the exit face
    double theta_ext_i;
};

inline double mismatch_at_q(const CrystalPlate& plate, const SpdcTriplet& t, double q_per_mm,
                            double azimuth = azimuth_crystal_1) {
    const PlateFrame fr = plate.frame(azimuth);
    const double kzp = kz_in_plate(*plate.material, fr, t.lambda_p_nm, Vec2(0, 0), Branch::fast).kz;
    const double kzs = kz_in_plate(*plate.material, fr, t.lambda_s_nm, Vec2(q_per_mm, 0), Branch::slow).kz;
    const double kzi = kz_in_plate(*plate.material, fr, t.lambda_i_nm, Vec2(-q_per_mm, 0), Branch::slow).kz;
    return kzp - kzs - kzi;
}

/// longitudinal mismatch k_p,z - k_s,z - k_i,z [1/mm] at stated internal
/// emission angles (transverse conservation presumed by the caller)
inline double phasematch_mismatch(const CrystalPlate& plate, const SpdcTriplet& t,
                                  double theta_int_s, double theta_int_i,
                                  double azimuth = azimuth_crystal_1) {
    if (std::isnan(theta_int_s) || std::isnan(theta_int_i))
        throw ArgumentError("internal emission angle is NaN");
    const PlateFrame fr = plate.frame(azimuth);
    const Material& m = *plate.material;
    const double w_s = omega_of_lambda(t.lambda_s_nm), w_i = omega_of_lambda(t.lambda_i_nm);

    const Vec3 khat_s_lab(std::sin(theta_int_s), 0.0, std::cos(theta_int_s));
    const Vec3 khat_i_lab(-std::sin(theta_int_i), 0.0, std::cos(theta_int_i));
    const double ks = index_branch(m, t.lambda_s_nm, fr.to_crystal(khat_s_lab), Branch::slow) * w_s / c_mm_fs;
    const double ki = index_branch(m, t.lambda_i_nm, fr.to_crystal(khat_i_lab), Branch::slow) * w_i / c_mm_fs;
    const double kzp = kz_in_plate(m, fr, t.lambda_p_nm, Vec2(0, 0), Branch::fast).kz;
    return kzp - ks * std::cos(theta_int_s) - ki * std::cos(theta_int_i);
}

/// solve the emission cone for a cut: external half-angles of signal and idler
inline EmissionGeometry emission_angle(const CrystalPlate& plate, double lambda_p_nm,
                                       double lambda_s_nm, double azimuth = azimuth_crystal_1) {
    const SpdcTriplet t = SpdcTriplet::from_signal(lambda_p_nm, lambda_s_nm);
    const Material& m = *plate.material;
    const PlateFrame fr = plate.frame(azimuth);

    // q upper bound: stay clear of evanescence for both daughters
    const double ks_min = 0.98 * std::min(index_branch(m, t.lambda_s_nm, plate.cut_direction(), Branch::fast),
                                          index_branch(m, t.lambda_i_nm, plate.cut_direction(), Branch::fast));
    const double qmax = 0.35 * ks_min * k0_per_mm(std::max(t.lambda_s_nm, t.lambda_i_nm));

    auto f = [&](double q) { return mismatch_at_q(plate, t, q, azimuth); };
    const double f0 = f(0.0);
    double lo = 0.0, hi = qmax;
    if (f0 > 0.0) {
        // collinear mismatch positive: no noncollinear solution on this side
        double best_q = 0.0, best = std::abs(f0);
        for (int i = 1; i <= 64; ++i) {
            const double q = qmax * i / 64.0;
            const double v = std::abs(f(q));
            if (v < best) { best = v; best_q = q; }
        }
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "not phasematchable: collinear mismatch %.3e/mm, best residual %.3e/mm", f0, best);
        throw NotPhasematchable(buf, std::asin(std::min(1.0, best_q / k0_per_mm(t.lambda_s_nm))), best);
    }
    if (f(hi) < 0.0)
        throw NotPhasematchable("not phasematchable: no root below the evanescent bound", 0.0, f(hi));
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? hi : lo) = mid;
        if (hi - lo < 1e-12 * qmax) break;
    }
    const double q = 0.5 * (lo + hi);

    EmissionGeometry g;
    g.q_per_mm = q;
    const double kzs = kz_in_plate(m, fr, t.lambda_s_nm, Vec2(q, 0), Branch::slow).kz;
    const double kzi = kz_in_plate(m, fr, t.lambda_i_nm, Vec2(-q, 0), Branch::slow).kz;
    g.theta_int_s = std::atan2(q, kzs);
    g.theta_int_i = std::atan2(q, kzi);
    // Snell at the exit face: transverse wavevector is conserved into vacuum
    const double ss = q / k0_per_mm(t.lambda_s_nm);
    const double si = q / k0_per_mm(t.lambda_i_nm);
    if (ss >= 1.0 || si >= 1.0) throw DomainError("total internal reflection at the exit face");
    g.theta_ext_s = std::asin(ss);
    g.theta_ext_i = std::asin(si);
    return g;
}

/// residual after the solve, for tests: mismatch at the solved q
inline double emission_residual(const CrystalPlate& plate, double lambda_p_nm, double lambda_s_nm,
                                double azimuth = azimuth_crystal_1) {
    const SpdcTriplet t = SpdcTriplet::from_signal(lambda_p_nm, lambda_s_nm);
    const EmissionGeometry g = emission_angle(plate, lambda_p_nm, lambda_s_nm, azimuth);
    return mismatch_at_q(plate, t, g.q_per_mm, azimuth);
}

struct CutSolve {
    double theta_cut;        // rad
    double achieved_ext_s;   // rad
};

/// cut angle reproducing a target external signal half-angle; scans around
/// the initial guess and returns the nearest root
inline CutSolve solve_cut_angle(const Material& m, double phi_cut, double lambda_p_nm,
                                double lambda_s_nm, double target_ext_rad,
                                std::optional<double> guess_rad = std::nullopt,
                                double azimuth = azimuth_crystal_1) {
    if (!(target_ext_rad >= 0.0)) throw ArgumentError("target external angle must be >= 0");
    auto ext_of = [&](double theta) -> std::optional<double> {
        CrystalPlate p(m, theta, phi_cut, 1.0, PlateRole::dc_crystal_1);
        try {
            return emission_angle(p, lambda_p_nm, lambda_s_nm, azimuth).theta_ext_s;
        } catch (const DomainError&) {
            return std::nullopt;
        }
    };

    // scan for brackets of ext(theta) = target
    const int N = 360;
    struct Node { double theta, err; };
    std::vector<Node> nodes;
    double amin = 1e9, amax = -1e9;
    for (int i = 1; i < N; ++i) {
        const double theta = pi * i / N;
        if (auto e = ext_of(theta)) {
            nodes.push_back({theta, *e - target_ext_rad});
            amin = std::min(amin, *e);
            amax = std::max(amax, *e);
        } else {
            nodes.push_back({theta, std::nan("")});
        }
    }
    std::vector<double> roots;
    // the cone closes continuously at the phasematchability boundary, so a
    // not-phasematchable node counts as "below target" when bracketing
    auto err_of = [&](double theta, double fallback) {
        const auto e = ext_of(theta);
        return e ? *e - target_ext_rad : fallback;
    };
    for (size_t i = 1; i < nodes.size(); ++i) {
        const auto &a = nodes[i - 1], &b = nodes[i];
        const double ea = std::isnan(a.err) ? -std::max(target_ext_rad, 1e-9) : a.err;
        const double eb = std::isnan(b.err) ? -std::max(target_ext_rad, 1e-9) : b.err;
        if (std::isnan(a.err) && std::isnan(b.err)) continue;
        if (ea == 0.0) roots.push_back(a.theta);
        if (ea * eb < 0.0) {
            double lo = a.theta, hi = b.theta;
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double err = err_of(mid, -std::max(target_ext_rad, 1e-9));
                ((err > 0.0) == (ea > 0.0) ? lo : hi) = mid;
            }
            double root = 0.5 * (lo + hi);
            if (!ext_of(root)) root = ea > 0.0 ? lo : hi; // stay on the solvable side
            roots.push_back(root);
        }
    }
    if (roots.empty()) {
        char buf[200];
        if (amax < amin)
            std::snprintf(buf, sizeof buf, "no phasematchable cut for this configuration");
        else
            std::snprintf(buf, sizeof buf,
                          "target %.4f deg outside attainable external range [%.4f, %.4f] deg",
                          rad2deg(target_ext_rad), rad2deg(amin), rad2deg(amax));
        throw NotPhasematchable(buf, 0.0, 0.0);
    }
    const double g = guess_rad.value_or(roots.front());
    double best = roots.front();
    for (double r : roots)
        if (std::abs(r - g) < std::abs(best - g)) best = r;
    CutSolve out;
    out.theta_cut = best;
    out.achieved_ext_s = ext_of(best).value_or(std::nan(""));
    return out;
}

} // namespace spdc
