#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>

#include "spdc/material.hpp"
#include "spdc/optics.hpp"

using namespace spdc;
using Catch::Approx;

namespace {

const MaterialDb& db() {
    static MaterialDb d = MaterialDb::load(std::string(SPDCKIT_SOURCE_DIR) + "/data/materials.dat");
    return d;
}

// independent re-evaluation of the shipped BBO ordinary Sellmeier set
double bbo_no_oracle(double lambda_um) {
    const double l2 = lambda_um * lambda_um;
    return std::sqrt(2.7359 + 0.01878 / (l2 - 0.01822) - 0.01354 * l2);
}

// biaxial oracle: roots of the wave-normal equation found by a dense scan
// plus bisection on g(n) = sum_i s_i^2 (x - b_j)(x - b_k), x = 1/n^2
std::vector<double> fresnel_scan_oracle(const Material& m, double lambda_nm, const Vec3& s) {
    double b[3];
    for (int i = 0; i < 3; ++i) b[i] = 1.0 / m.n2_axis(i, lambda_nm).f;
    auto g = [&](double n) {
        const double x = 1.0 / (n * n);
        double acc = 0.0;
        for (int i = 0; i < 3; ++i) acc += s[i] * s[i] * (x - b[(i + 1) % 3]) * (x - b[(i + 2) % 3]);
        return acc;
    };
    std::vector<double> roots;
    const double nlo = 1.0, nhi = 3.5;
    const int N = 20000;
    double prev = g(nlo);
    for (int i = 1; i <= N; ++i) {
        const double n = nlo + (nhi - nlo) * i / N;
        const double cur = g(n);
        if (prev * cur < 0.0) {
            double a = nlo + (nhi - nlo) * (i - 1) / N, c = n;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + c);
                (g(mid) * g(a) <= 0.0 ? c : a) = mid;
            }
            roots.push_back(0.5 * (a + c));
        }
        prev = cur;
    }
    return roots;
}

} // namespace

TEST_CASE("database loads and round-trips bit-exact") {
    const MaterialDb& d = db();
    REQUIRE(d.has("BBO"));
    REQUIRE(d.has("BiBO"));
    REQUIRE(d.has("quartz"));

    const std::string tmp1 = "materials_roundtrip_1.dat";
    d.save(tmp1);
    MaterialDb d2 = MaterialDb::load(tmp1);
    for (const auto& [name, m] : d.materials) {
        const Material& m2 = d2.get(name);
        REQUIRE(m2.symmetry == m.symmetry);
        REQUIRE(m2.lambda_min_nm == m.lambda_min_nm);
        REQUIRE(m2.lambda_max_nm == m.lambda_max_nm);
        REQUIRE(m2.citation == m.citation);
        for (int a = 0; a < 3; ++a) {
            REQUIRE(m2.axes[a].formula == m.axes[a].formula);
            REQUIRE(m2.axes[a].coeff == m.axes[a].coeff); // bit-exact
        }
    }
    REQUIRE(d.serialize() == d2.serialize());
    std::remove(tmp1.c_str());
}

TEST_CASE("uniaxial index limits") {
    const Material& bbo = db().get("BBO");
    // axis-aligned extraordinary ray equals the ordinary index
    REQUIRE(index_uniaxial(bbo, 810, Pol::extraordinary, 0.0) ==
            Approx(index_uniaxial(bbo, 810, Pol::ordinary, 0.0)).epsilon(1e-14));
    // 90 degrees gives the principal extraordinary value
    REQUIRE(index_uniaxial(bbo, 810, Pol::extraordinary, pi / 2) ==
            Approx(bbo.n_axis(2, 810).f).epsilon(1e-14));
    // ordinary branch ignores theta
    REQUIRE(index_uniaxial(bbo, 405, Pol::ordinary, 0.3) ==
            index_uniaxial(bbo, 405, Pol::ordinary, 1.2));
}

TEST_CASE("Sellmeier evaluation matches an independent oracle") {
    const Material& bbo = db().get("BBO");
    REQUIRE(index_uniaxial(bbo, 405, Pol::ordinary, 0.0) == Approx(bbo_no_oracle(0.405)).epsilon(1e-12));
}

TEST_CASE("wavelength domain errors") {
    const Material& bbo = db().get("BBO");
    REQUIRE_THROWS_AS(index_uniaxial(bbo, 100.0, Pol::ordinary, 0.0), DomainError);
    REQUIRE_THROWS_AS(index_uniaxial(bbo, 5000.0, Pol::ordinary, 0.0), DomainError);
    REQUIRE_THROWS_AS(index_uniaxial(bbo, -5.0, Pol::ordinary, 0.0), ArgumentError);
    REQUIRE_THROWS_AS(index_uniaxial(bbo, std::nan(""), Pol::ordinary, 0.0), ArgumentError);
    REQUIRE_THROWS_AS(index_uniaxial(bbo, 810.0, Pol::extraordinary, std::nan("")), ArgumentError);
}

TEST_CASE("biaxial solver at principal directions and degenerate limit") {
    const Material& bibo = db().get("BiBO");
    // along z both transverse principal indices appear
    const auto [nf, ns] = index_biaxial(bibo, 810, Vec3::UnitZ());
    REQUIRE(nf == Approx(bibo.n_axis(0, 810).f).epsilon(1e-12));
    REQUIRE(ns == Approx(bibo.n_axis(1, 810).f).epsilon(1e-12));

    // a biaxial material with n_x = n_y collapses onto the uniaxial solver
    Material fake = db().get("BBO");
    fake.symmetry = Symmetry::biaxial;
    fake.axes[1] = fake.axes[0];
    std::mt19937 rng(20240811);
    std::uniform_real_distribution<double> ang(0.05, pi - 0.05), lam(300.0, 2000.0);
    for (int i = 0; i < 1000; ++i) {
        const double theta = ang(rng), phi = 2.0 * ang(rng), l = lam(rng);
        const Vec3 s = direction_from_angles(theta, phi);
        const auto [f, sl] = index_biaxial(fake, l, s);
        const double no = index_uniaxial(db().get("BBO"), l, Pol::ordinary, theta);
        const double ne = index_uniaxial(db().get("BBO"), l, Pol::extraordinary, theta);
        REQUIRE(std::abs(sl - std::max(no, ne)) < 1e-12);
        REQUIRE(std::abs(f - std::min(no, ne)) < 1e-12);
    }
}

TEST_CASE("biaxial roots match the dense-scan oracle") {
    const Material& bibo = db().get("BiBO");
    const Vec3 s = direction_from_angles(deg2rad(151.7), deg2rad(90.0));
    const auto roots = fresnel_scan_oracle(bibo, 810, s);
    REQUIRE(roots.size() == 2);
    const auto [nf, ns] = index_biaxial(bibo, 810, s);
    REQUIRE(nf == Approx(roots[0]).margin(1e-9));
    REQUIRE(ns == Approx(roots[1]).margin(1e-9));
    REQUIRE(nf <= ns);
}

TEST_CASE("branch ordering holds across a direction sweep") {
    const Material& bibo = db().get("BiBO");
    double prev_f = 0.0, prev_s = 0.0;
    for (int i = 0; i <= 400; ++i) {
        const double theta = 0.01 + (pi - 0.02) * i / 400.0;
        const Vec3 s = direction_from_angles(theta, deg2rad(35.0));
        const auto [nf, ns] = index_biaxial(bibo, 810, s);
        REQUIRE(nf <= ns + 1e-15);
        if (i > 0) {
            // continuity: no branch swap along the sweep
            REQUIRE(std::abs(nf - prev_f) < 5e-3);
            REQUIRE(std::abs(ns - prev_s) < 5e-3);
        }
        prev_f = nf;
        prev_s = ns;
    }
}

TEST_CASE("group velocity against finite differences") {
    // constant-index material: V_g = c/n
    const Material vac = make_constant_index("testglass", 1.5);
    REQUIRE(group_velocity(vac, 800, Pol::ordinary, 0.2) == Approx(c_mm_fs / 1.5).epsilon(1e-13));

    const double h = 0.01; // nm
    for (const char* name : {"BBO", "quartz"}) {
        const Material& m = db().get(name);
        for (double lam : {405.0, 810.0}) {
            for (Pol p : {Pol::ordinary, Pol::extraordinary}) {
                const double theta = deg2rad(34.0);
                const D2 n = index_uniaxial_d(m, lam, p, theta);
                const double fd = (index_uniaxial(m, lam + h, p, theta) -
                                   index_uniaxial(m, lam - h, p, theta)) /
                                  (2.0 * h);
                REQUIRE(n.d == Approx(fd).epsilon(1e-6));
            }
        }
    }
    const Material& bibo = db().get("BiBO");
    const Vec3 s = direction_from_angles(deg2rad(151.7), deg2rad(90));
    const D2 n = index_branch_d(bibo, 810, s, Branch::slow);
    const double fd =
        (index_branch(bibo, 810 + h, s, Branch::slow) - index_branch(bibo, 810 - h, s, Branch::slow)) /
        (2.0 * h);
    REQUIRE(n.d == Approx(fd).epsilon(1e-6));
}

TEST_CASE("quartz group delay per mm near 37.5 fs") {
    const Material& qz = db().get("quartz");
    const double delay = std::abs(1.0 / group_velocity(qz, 405, Pol::ordinary, pi / 2) -
                                  1.0 / group_velocity(qz, 405, Pol::extraordinary, pi / 2));
    REQUIRE(delay == Approx(37.5).epsilon(0.15));
}

TEST_CASE("GVD against second finite differences of k") {
    const Material vac = make_constant_index("testglass", 1.5);
    REQUIRE(std::abs(gvd(vac, 800, Pol::ordinary, 0.0)) < 1e-12);

    for (const char* name : {"BBO", "BiBO", "quartz"}) {
        const Material& m = db().get(name);
        for (double lam : {405.0, 810.0}) {
            const Vec3 s = direction_from_angles(deg2rad(30.0), deg2rad(90.0));
            for (Branch br : {Branch::fast, Branch::slow}) {
                const double analytic = gvd(m, lam, s, br);
                const double w0 = omega_of_lambda(lam);
                const double hw = 1e-3 * w0; // balances rounding vs truncation
                const double fd = (k_of_omega(m, w0 + hw, s, br) - 2.0 * k_of_omega(m, w0, s, br) +
                                   k_of_omega(m, w0 - hw, s, br)) /
                                  (hw * hw);
                REQUIRE(analytic == Approx(fd).epsilon(1e-4));
            }
        }
    }
}

TEST_CASE("BBO ordinary GVD at 810 nm is normal (positive)") {
    REQUIRE(gvd(db().get("BBO"), 810, Pol::ordinary, 0.0) > 0.0);
    // shipped coefficients are monotone decreasing in n across the near-IR
    const Material& bbo = db().get("BBO");
    double prev = 10.0;
    for (double lam = 500.0; lam <= 1200.0; lam += 50.0) {
        const double n = index_uniaxial(bbo, lam, Pol::ordinary, 0.0);
        REQUIRE(n < prev);
        prev = n;
    }
}

TEST_CASE("walkoff angle limits and derivative oracle") {
    const Material& bbo = db().get("BBO");
    REQUIRE(walkoff_uniaxial(bbo, 405, 0.0) == Approx(0.0).margin(1e-15));
    REQUIRE(walkoff_uniaxial(bbo, 405, pi / 2) == Approx(0.0).margin(1e-12));

    // rho = -(1/n) dn/dtheta for the extraordinary branch
    const double theta = deg2rad(29.3), h = 1e-6;
    const double n = index_uniaxial(bbo, 405, Pol::extraordinary, theta);
    const double dn = (index_uniaxial(bbo, 405, Pol::extraordinary, theta + h) -
                       index_uniaxial(bbo, 405, Pol::extraordinary, theta - h)) /
                      (2.0 * h);
    REQUIRE(std::tan(walkoff_uniaxial(bbo, 405, theta)) == Approx(-dn / n).margin(1e-8));
    REQUIRE(walkoff_uniaxial(bbo, 405, theta) > 0.0);
    REQUIRE(rad2deg(walkoff_uniaxial(bbo, 405, theta)) == Approx(3.888).margin(0.05));

    // general (index-surface gradient) path agrees with the closed form
    const Vec3 s = direction_from_angles(theta, 0.0);
    REQUIRE(walkoff_angle(bbo, 405, s, Branch::fast) ==
            Approx(walkoff_uniaxial(bbo, 405, theta)).margin(1e-8));
}

TEST_CASE("biaxial walkoff against the index-surface gradient") {
    const Material& bibo = db().get("BiBO");
    const Vec3 s = direction_from_angles(deg2rad(151.7), deg2rad(90));
    // numeric gradient of n over the polar angle at fixed azimuth
    const double h = 1e-6;
    auto n_of = [&](double th) {
        return index_branch(bibo, 810, direction_from_angles(th, deg2rad(90)), Branch::slow);
    };
    const double n = n_of(deg2rad(151.7));
    const double dn = (n_of(deg2rad(151.7) + h) - n_of(deg2rad(151.7) - h)) / (2.0 * h);
    const double rho = walkoff_angle(bibo, 810, s, Branch::slow);
    REQUIRE(std::tan(rho) == Approx(std::abs(dn) / n).margin(1e-7));
}

TEST_CASE("validation rejects a mislabeled biaxial material") {
    MaterialDb bad;
    Material m;
    m.name = "badbi";
    m.symmetry = Symmetry::biaxial;
    m.axes[0] = {"constant", {2.25}}; // n_x = 1.5
    m.axes[1] = {"constant", {2.0}};  // n_y < n_x: labeling violated
    m.axes[2] = {"constant", {2.56}};
    m.lambda_min_nm = 300;
    m.lambda_max_nm = 2000;
    bad.add(m);
    REQUIRE_THROWS_AS(bad.validate(), ConfigError);
}
