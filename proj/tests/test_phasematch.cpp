#include <catch2/catch_amalgamated.hpp>

#include "spdc/phasematch.hpp"

using namespace spdc;
using Catch::Approx;

namespace {

const MaterialDb& db() {
    static MaterialDb d = MaterialDb::load(std::string(SPDCKIT_SOURCE_DIR) + "/data/materials.dat");
    return d;
}

CrystalPlate bbo_plate(double theta_deg, double d = 0.6) {
    return CrystalPlate(db().get("BBO"), deg2rad(theta_deg), 0.0, d, PlateRole::dc_crystal_1);
}

CrystalPlate bibo_plate(double theta_deg, double d = 0.6) {
    return CrystalPlate(db().get("BiBO"), deg2rad(theta_deg), deg2rad(90.0), d,
                        PlateRole::dc_crystal_1);
}

} // namespace

TEST_CASE("triplet energy conservation") {
    REQUIRE_NOTHROW(SpdcTriplet(405.0, 810.0, 810.0));
    REQUIRE_THROWS_AS(SpdcTriplet(405.0, 810.0, 815.0), ArgumentError);
    const SpdcTriplet t = SpdcTriplet::from_signal(405.0, 851.0);
    REQUIRE(1.0 / t.lambda_p_nm ==
            Approx(1.0 / t.lambda_s_nm + 1.0 / t.lambda_i_nm).epsilon(1e-14));
    REQUIRE(t.lambda_i_nm == Approx(772.769).margin(0.01));
}

TEST_CASE("mismatch vanishes at the solved cone") {
    for (const CrystalPlate& p : {bbo_plate(29.3), bibo_plate(151.7)}) {
        const auto g = emission_angle(p, 405, 810);
        const SpdcTriplet t = SpdcTriplet::from_signal(405, 810);
        REQUIRE(std::abs(mismatch_at_q(p, t, g.q_per_mm)) < 1e-9);
        // angle-form agrees through the same geometry
        REQUIRE(std::abs(phasematch_mismatch(p, t, g.theta_int_s, g.theta_int_i)) < 1e-7);
    }
}

TEST_CASE("mismatch is symmetric under signal-idler swap at degeneracy") {
    const CrystalPlate p = bbo_plate(29.3);
    const SpdcTriplet t = SpdcTriplet::from_signal(405, 810);
    for (double a : {0.01, 0.02, 0.03}) {
        REQUIRE(phasematch_mismatch(p, t, a, 0.8 * a) ==
                Approx(phasematch_mismatch(p, t, 0.8 * a, a)).margin(1e-10));
    }
}

TEST_CASE("mismatch sign flips across the phasematching angle") {
    // bracketing scan in the cut angle at fixed collinear geometry
    const SpdcTriplet t = SpdcTriplet::from_signal(405, 810);
    double prev = 0.0;
    bool flipped = false;
    for (double th = 27.0; th <= 31.0; th += 0.25) {
        const double mm = mismatch_at_q(bbo_plate(th), t, 0.0);
        if (th > 27.0 && prev * mm < 0.0) flipped = true;
        prev = mm;
    }
    REQUIRE(flipped);
}

TEST_CASE("evanescent transverse momentum is a domain error") {
    const CrystalPlate p = bbo_plate(29.3);
    const SpdcTriplet t = SpdcTriplet::from_signal(405, 810);
    REQUIRE_THROWS_AS(mismatch_at_q(p, t, 0.99 * 1.7 * k0_per_mm(810)), DomainError);
}

TEST_CASE("BBO cone angle and Snell ratio") {
    const auto g = emission_angle(bbo_plate(29.3), 405, 810);
    REQUIRE(rad2deg(g.theta_ext_s) == Approx(3.22).margin(0.1));
    // small angles: external/internal ratio approaches the exit index
    const double n_slow =
        index_branch(db().get("BBO"), 810,
                     direction_from_angles(deg2rad(29.3) + g.theta_int_s, 0.0), Branch::slow);
    REQUIRE(std::sin(g.theta_ext_s) / std::sin(g.theta_int_s) == Approx(n_slow).epsilon(2e-3));
}

TEST_CASE("degenerate external angles are equal") {
    const auto g = emission_angle(bibo_plate(151.7), 405, 810);
    REQUIRE(std::abs(g.theta_ext_s - g.theta_ext_i) < 1e-9);
}

TEST_CASE("cut solve round-trips through the emission solve") {
    // collinear cut: solving for 0 external angle is a fixed point
    const auto cs = solve_cut_angle(db().get("BBO"), 0.0, 405, 810, 0.0, deg2rad(29.0));
    const auto g = emission_angle(bbo_plate(rad2deg(cs.theta_cut)), 405, 810);
    REQUIRE(g.theta_ext_s < 2e-4);
    const auto cs2 = solve_cut_angle(db().get("BBO"), 0.0, 405, 810, g.theta_ext_s,
                                     cs.theta_cut);
    REQUIRE(cs2.theta_cut == Approx(cs.theta_cut).margin(1e-6));

    // 3-degree targets reproduce the quoted cuts
    const auto bbo3 = solve_cut_angle(db().get("BBO"), 0.0, 405, 810, deg2rad(3.0), deg2rad(30));
    REQUIRE(rad2deg(bbo3.theta_cut) == Approx(29.3).margin(0.5));
    const auto bibo3 =
        solve_cut_angle(db().get("BiBO"), deg2rad(90), 405, 810, deg2rad(3.0), deg2rad(150));
    REQUIRE(rad2deg(bibo3.theta_cut) == Approx(151.7).margin(1.0));
}

TEST_CASE("unattainable target reports the attainable range") {
    try {
        solve_cut_angle(db().get("BBO"), 0.0, 405, 810, deg2rad(60.0));
        FAIL("expected NotPhasematchable");
    } catch (const NotPhasematchable& e) {
        REQUIRE(std::string(e.what()).find("attainable") != std::string::npos);
    }
}

TEST_CASE("collinear-mismatched cut is not phasematchable") {
    // cut below the collinear angle leaves a positive mismatch everywhere
    try {
        emission_angle(bbo_plate(27.0), 405, 810);
        FAIL("expected NotPhasematchable");
    } catch (const NotPhasematchable& e) {
        REQUIRE(std::isfinite(e.residual_per_mm));
    }
}

TEST_CASE("uniaxial and biaxial paths agree for BBO") {
    // run BBO through the biaxial machinery with n_x = n_y
    Material fake = db().get("BBO");
    fake.symmetry = Symmetry::biaxial;
    fake.axes[1] = fake.axes[0];
    fake.name = "BBO_as_biaxial";
    CrystalPlate pu = bbo_plate(29.3);
    CrystalPlate pb(fake, deg2rad(29.3), 0.0, 0.6, PlateRole::dc_crystal_1);
    const auto gu = emission_angle(pu, 405, 810);
    const auto gb = emission_angle(pb, 405, 810);
    REQUIRE(gu.theta_ext_s == Approx(gb.theta_ext_s).margin(1e-8));
    const auto cu = solve_cut_angle(db().get("BBO"), 0.0, 405, 810, deg2rad(3.0), deg2rad(30));
    const auto cb = solve_cut_angle(fake, 0.0, 405, 810, deg2rad(3.0), deg2rad(30));
    REQUIRE(cu.theta_cut == Approx(cb.theta_cut).margin(1e-8));
}

TEST_CASE("nondegenerate cone splits the external angles") {
    const auto g = emission_angle(bibo_plate(151.7), 405, 851);
    REQUIRE(g.theta_ext_s > g.theta_ext_i); // longer wavelength leaves wider
    REQUIRE(rad2deg(g.theta_ext_s) == Approx(3.4).margin(0.3));
    REQUIRE(rad2deg(g.theta_ext_i) == Approx(3.1).margin(0.3));
}
