#include <catch2/catch_amalgamated.hpp>

#include "spdc/qstate.hpp"
#include "spdc/spatial.hpp"

using namespace spdc;
using Catch::Approx;

namespace {

const MaterialDb& db() {
    static MaterialDb d = MaterialDb::load(std::string(SPDCKIT_SOURCE_DIR) + "/data/materials.dat");
    return d;
}

TwoCrystalSource bbo_source(double d = 0.6) {
    return make_source(db().get("BBO"), deg2rad(29.3), 0.0, d, 405, 810, 840);
}

TwoCrystalSource bibo_source(double signal_nm = 810.0) {
    return make_source(db().get("BiBO"), deg2rad(151.7), deg2rad(90), 0.6, 405, signal_nm, 840);
}

SpatialCompensator bbo_sc(Arm arm, double thickness_mm, double azimuth = 0.0) {
    SpatialCompensator c;
    c.plate = CrystalPlate(db().get("BBO"), deg2rad(33.9), 0.0, thickness_mm,
                           arm == Arm::signal ? PlateRole::spatial_comp_signal
                                              : PlateRole::spatial_comp_idler);
    c.arm = arm;
    c.azimuth_arm = azimuth;
    return c;
}

// Independent multilayer transfer oracle for the uniaxial two-crystal
// stack: closed-form kz per segment at fixed transverse wavevector, summed
// per path.  Crystal 1 has its optic axis in the scan plane (tipping toward
// +x), crystal 2 has it vertical.
double bbo_phase_oracle(const TwoCrystalSource& src, Arm arm, double Q) {
    const Material& m = *src.c1.material;
    const double d = src.c1.thickness_mm;
    const double kx = (arm == Arm::signal ? 1.0 : -1.0) * Q;
    const double th = src.c1.theta_cut;
    const double lam = src.lambda_arm(arm);
    const double lp = src.lambda_p_nm;

    auto n_o = [&](double l) { return m.n_axis(0, l).f; };
    auto n_e = [&](double l) { return m.n_axis(2, l).f; };
    auto kz_o = [&](double l) {
        const double k = n_o(l) * k0_per_mm(l);
        return std::sqrt(k * k - kx * kx);
    };
    // Extraordinary wave-vector surface: (k.a)^2/no^2 + (|k|^2-(k.a)^2)/ne^2
    // = k0^2.  With the axis a = (0, sin th, cos th) and k = (kx, 0, kz)
    // only kz couples to the axis:
    auto kz_e_vertical = [&](double l) {
        const double k0 = k0_per_mm(l);
        const double no = n_o(l), ne = n_e(l);
        const double ca = std::cos(th), sa = std::sin(th);
        const double qa = ca * ca / (no * no) + sa * sa / (ne * ne);
        return std::sqrt((k0 * k0 - kx * kx / (ne * ne)) / qa);
    };
    auto kz_e_collinear = [&](double l) {
        const double no = n_o(l), ne = n_e(l);
        const double inv2 = std::cos(th) * std::cos(th) / (no * no) +
                            std::sin(th) * std::sin(th) / (ne * ne);
        return k0_per_mm(l) / std::sqrt(inv2);
    };

    // daughter legs, first-crystal pair minus second-crystal pair: the
    // half birth legs share the ordinary index and cancel, leaving the
    // extraordinary crossing of crystal 2
    const double daughters = 0.5 * d * kz_o(lam) + d * kz_e_vertical(lam) - 0.5 * d * kz_o(lam);
    // half of the pump-leg difference is attributed to each arm
    const double pump_half =
        0.5 * (0.5 * d * kz_e_collinear(lp) - d * n_o(lp) * k0_per_mm(lp) -
               0.5 * d * kz_e_collinear(lp));
    return daughters + pump_half;
}

} // namespace

TEST_CASE("second-crystal thickness to zero removes phi_e and phi_delta") {
    TwoCrystalSource src = bbo_source();
    src.c2.thickness_mm = 0.0;
    const double Q = q_of_iris_x(src, 840 * std::tan(src.theta_ext_s0) + 1.0);
    const PhaseComponents c = phi_components(src, Arm::signal, Q);
    REQUIRE(std::abs(c.phi_e) < 1e-12);
    REQUIRE(std::abs(c.phi_delta) < 1e-12);
}

TEST_CASE("phi_delta vanishes along a principal direction") {
    // axis along the pump: walkoff is zero, rays follow the wave normals;
    // built by hand because this cut does not phasematch
    TwoCrystalSource src;
    src.c1 = CrystalPlate(db().get("BBO"), 0.0, 0.0, 0.6, PlateRole::dc_crystal_1);
    src.c2 = CrystalPlate(db().get("BBO"), 0.0, 0.0, 0.6, PlateRole::dc_crystal_2);
    src.lambda_p_nm = 405;
    src.lambda_s_nm = 700;
    src.lambda_i_nm = SpdcTriplet::from_signal(405, 700).lambda_i_nm;
    const PhaseComponents c = phi_components(src, Arm::signal, 50.0);
    REQUIRE(std::abs(c.phi_delta) < 1e-10);
}

TEST_CASE("components sum to the independent transfer oracle") {
    const TwoCrystalSource src = bbo_source();
    const double x0 = 840 * std::tan(src.theta_ext_s0);
    for (double dx : {-2.0, -0.5, 0.0, 0.5, 2.0}) {
        const double Q = q_of_iris_x(src, x0 + dx);
        for (Arm arm : {Arm::signal, Arm::idler}) {
            const double total = phi_components(src, arm, Q).total();
            const double oracle = bbo_phase_oracle(src, arm, Q);
            REQUIRE(total == Approx(oracle).margin(1e-6));
        }
    }
}

TEST_CASE("mirroring the pair about the pump axis preserves the phase") {
    // exchange symmetry at degeneracy: the pair collected at (+x, -x) is
    // the pair collected at (-x, +x), so the map slope is odd about the
    // pump axis
    const TwoCrystalSource src = bibo_source();
    const double x0 = 840 * std::tan(src.theta_ext_s0);
    for (double dx : {0.3, 1.1, 2.2}) {
        const double Q = q_of_iris_x(src, x0 + dx);
        const double direct = phi_dc(src, Arm::signal, Q) + phi_dc(src, Arm::idler, Q);
        const double mirrored = phi_dc(src, Arm::signal, -Q) + phi_dc(src, Arm::idler, -Q);
        REQUIRE(direct == Approx(mirrored).margin(1e-9));
    }
}

TEST_CASE("uncompensated slopes reach the measured scale") {
    REQUIRE(phase_variation_deg(bibo_source(), {}, 1.0) > 14.0);
    const double bbo = phase_variation_deg(bbo_source(), {}, 1.0);
    REQUIRE(bbo > 14.0);
    REQUIRE(bbo < 40.0);
}

TEST_CASE("compensator phase is zero at zero thickness") {
    const TwoCrystalSource src = bibo_source();
    REQUIRE(phi_c(src, bbo_sc(Arm::signal, 0.0), src.q0_per_mm) == 0.0);
}

TEST_CASE("mirror-flipping the compensator reverses its slope") {
    const TwoCrystalSource src = bibo_source();
    const double q0 = src.q0_per_mm;
    const double x0 = 840 * std::tan(src.theta_ext_s0);
    const double dq = q_of_iris_x(src, x0 + 0.5) - q_of_iris_x(src, x0 - 0.5);
    auto slope = [&](double az) {
        const auto c = bbo_sc(Arm::signal, 0.245, az);
        return phi_c(src, c, q0 + 0.5 * dq) - phi_c(src, c, q0 - 0.5 * dq);
    };
    const double s0 = slope(0.0);
    const double s180 = slope(pi);
    REQUIRE(s0 * s180 < 0.0);
    REQUIRE(std::abs(s0) == Approx(std::abs(s180)).epsilon(0.15));
    // tuning plane perpendicular to the scan: the linear response collapses
    REQUIRE(std::abs(slope(pi / 2)) < 0.2 * std::abs(s0));
}

TEST_CASE("designed compensator is a strict local minimum and deterministic") {
    const TwoCrystalSource src = bibo_source();
    const auto d1 = design_spatial_compensator(src, db().get("BBO"), deg2rad(33.9), Arm::signal);
    const auto d2 = design_spatial_compensator(src, db().get("BBO"), deg2rad(33.9), Arm::signal);
    REQUIRE(d1.thickness_mm == d2.thickness_mm); // deterministic across runs

    auto rms_at = [&](double l) {
        SpatialCompensator c = bbo_sc(Arm::signal, l, d1.azimuth_arm);
        const double x0 = 840 * std::tan(src.theta_ext_s0);
        std::vector<double> ph;
        for (int i = 0; i < 17; ++i) {
            const double x = x0 - 2.5 + 5.0 * i / 16.0;
            const double Q = q_of_iris_x(src, x);
            ph.push_back(0.5 * (phi_dc(src, Arm::signal, Q) + phi_dc(src, Arm::signal, -Q)) +
                         phi_c(src, c, Q));
        }
        double mean = 0;
        for (double p : ph) mean += p;
        mean /= double(ph.size());
        double ss = 0;
        for (double p : ph) ss += (p - mean) * (p - mean);
        return std::sqrt(ss / double(ph.size()));
    };
    const double at_opt = rms_at(d1.thickness_mm);
    REQUIRE(rms_at(d1.thickness_mm + 0.005) > at_opt);
    REQUIRE(rms_at(d1.thickness_mm - 0.005) > at_opt);
}

TEST_CASE("zero-thickness source needs no compensation") {
    TwoCrystalSource src = bibo_source();
    src.c1.thickness_mm = 0.0;
    src.c2.thickness_mm = 0.0;
    const auto d = design_spatial_compensator(src, db().get("BBO"), deg2rad(33.9), Arm::signal);
    REQUIRE(d.thickness_mm == 0.0);
}

TEST_CASE("axis-aligned compensator cannot compensate") {
    // cut at 0: no tuning-plane slope in either orientation
    const TwoCrystalSource src = bibo_source();
    REQUIRE_THROWS_AS(design_spatial_compensator(src, db().get("BBO"), 0.0, Arm::signal),
                      DomainError);
}

TEST_CASE("designed pair flattens the map by more than 100x") {
    const TwoCrystalSource src = bibo_source();
    const auto ds = design_spatial_compensator(src, db().get("BBO"), deg2rad(33.9), Arm::signal);
    const auto di = design_spatial_compensator(src, db().get("BBO"), deg2rad(33.9), Arm::idler);
    const double before = phase_variation_deg(src, {}, 1.0);
    const double after = phase_variation_deg(
        src,
        {bbo_sc(Arm::signal, ds.thickness_mm, ds.azimuth_arm),
         bbo_sc(Arm::idler, di.thickness_mm, di.azimuth_arm)},
        1.0);
    REQUIRE(before / after > 100.0);
}

TEST_CASE("constant total phase factors out of the spatial trace") {
    // flat map -> |<HH|rho|VV>| = 1/2
    std::vector<double> phases(31, 0.731);
    const TwoQubitState s = rho_spatial(phases);
    REQUIRE(std::abs(s.rho(0, 3)) == Approx(0.5).margin(1e-6));
    REQUIRE(concurrence_tangle(s).tangle == Approx(1.0).margin(1e-9));
}

TEST_CASE("phase map is unwrapped") {
    const TwoCrystalSource src = bibo_source();
    const PhaseMap m = phase_map(src, {}, 6.0, 121);
    for (size_t i = 1; i < m.phase_deg.size(); ++i)
        REQUIRE(std::abs(m.phase_deg[i] - m.phase_deg[i - 1]) < 180.0);
}

TEST_CASE("uniaxial path equals the biaxial path for BBO maps") {
    Material fake = db().get("BBO");
    fake.symmetry = Symmetry::biaxial;
    fake.axes[1] = fake.axes[0];
    fake.name = "BBO_as_biaxial";
    const TwoCrystalSource a = bbo_source();
    const TwoCrystalSource b = make_source(fake, deg2rad(29.3), 0.0, 0.6, 405, 810, 840);
    const double x0 = 840 * std::tan(a.theta_ext_s0);
    for (double dx : {-1.0, 0.0, 1.0}) {
        const double qa = q_of_iris_x(a, x0 + dx);
        REQUIRE(phi_dc(a, Arm::signal, qa) == Approx(phi_dc(b, Arm::signal, qa)).margin(1e-6));
    }
}
