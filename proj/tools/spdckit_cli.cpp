// spdckit command line: dispersion tables, phase maps, compensator design
// and entanglement sweeps for two-crystal type-I downconversion sources.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spdc/io.hpp"

using namespace spdc;

namespace {

struct GlobalOpts {
    std::string materials_path;
    std::string config_path;
    std::string format = "csv";
    std::string out_path;
};

std::string default_materials() {
#ifdef SPDCKIT_SOURCE_DIR
    return std::string(SPDCKIT_SOURCE_DIR) + "/data/materials.dat";
#else
    return "data/materials.dat";
#endif
}

MaterialDb load_db(const GlobalOpts& g) {
    return MaterialDb::load(g.materials_path.empty() ? default_materials() : g.materials_path);
}

Scenario load_scenario_checked(const GlobalOpts& g, const MaterialDb& db, bool run_designs) {
    if (g.config_path.empty()) throw ConfigError("this command needs --config <path>");
    return assemble_scenario(load_scenario(g.config_path), db, run_designs);
}

void emit(const GlobalOpts& g, const std::string& csv, const nlohmann::json& json) {
    if (g.format == "json")
        write_text(g.out_path, json.dump(2) + "\n");
    else
        write_text(g.out_path, csv);
}

int cmd_index(const GlobalOpts& g, const std::string& material, double lambda_nm, double theta_deg,
              double phi_deg) {
    const MaterialDb db = load_db(g);
    const Material& m = db.get(material);
    const double theta = deg2rad(theta_deg), phi = deg2rad(phi_deg);
    const Vec3 dir = direction_from_angles(theta, phi);

    std::vector<std::string> names;
    std::vector<double> vals;
    auto row = [&](const std::string& n, double v) {
        names.push_back(n);
        vals.push_back(v);
    };
    if (m.symmetry == Symmetry::biaxial) {
        const auto [nf, ns] = index_biaxial(m, lambda_nm, dir);
        row("n_fast", nf);
        row("n_slow", ns);
        row("vg_fast_mm_fs", group_velocity(m, lambda_nm, dir, Branch::fast));
        row("vg_slow_mm_fs", group_velocity(m, lambda_nm, dir, Branch::slow));
        row("gvd_fast_fs2_mm", gvd(m, lambda_nm, dir, Branch::fast));
        row("gvd_slow_fs2_mm", gvd(m, lambda_nm, dir, Branch::slow));
        row("walkoff_fast_deg", rad2deg(walkoff_angle(m, lambda_nm, dir, Branch::fast)));
        row("walkoff_slow_deg", rad2deg(walkoff_angle(m, lambda_nm, dir, Branch::slow)));
    } else {
        row("n_o", index_uniaxial(m, lambda_nm, Pol::ordinary, theta));
        row("n_e_theta", index_uniaxial(m, lambda_nm, Pol::extraordinary, theta));
        row("vg_o_mm_fs", group_velocity(m, lambda_nm, Pol::ordinary, theta));
        row("vg_e_mm_fs", group_velocity(m, lambda_nm, Pol::extraordinary, theta));
        row("gvd_o_fs2_mm", gvd(m, lambda_nm, Pol::ordinary, theta));
        row("gvd_e_fs2_mm", gvd(m, lambda_nm, Pol::extraordinary, theta));
        row("walkoff_e_deg", rad2deg(walkoff_uniaxial(m, lambda_nm, theta)));
        row("group_delay_oe_fs_mm", 1.0 / group_velocity(m, lambda_nm, Pol::ordinary, theta) -
                                        1.0 / group_velocity(m, lambda_nm, Pol::extraordinary, theta));
    }

    std::string csv = "quantity,value\n";
    nlohmann::json j;
    j["schema_version"] = output_schema_version;
    j["material"] = m.name;
    j["lambda_nm"] = lambda_nm;
    j["theta_deg"] = theta_deg;
    j["phi_deg"] = phi_deg;
    for (size_t i = 0; i < names.size(); ++i) {
        csv += names[i] + "," + detail::num(vals[i]) + "\n";
        j[names[i]] = vals[i];
    }
    emit(g, csv, j);
    return 0;
}

int cmd_phasemap(const GlobalOpts& g, bool compensated, double range_mm, int samples) {
    const MaterialDb db = load_db(g);
    const Scenario s = load_scenario_checked(g, db, compensated);
    const std::vector<SpatialCompensator> comps =
        compensated ? s.spatial_comps : std::vector<SpatialCompensator>{};
    const PhaseMap m = phase_map(s.source, comps, range_mm, samples, scenario_hash(s.cfg));
    emit(g, phase_map_csv(m), phase_map_json(m));
    return 0;
}

int cmd_design(const GlobalOpts& g) {
    if (g.config_path.empty()) throw ConfigError("design needs --config <path>");
    const MaterialDb db = load_db(g);
    const ScenarioConfig cfg = load_scenario(g.config_path);
    const bool has_design_placeholder =
        (cfg.spatial_signal && !cfg.spatial_signal->thickness_mm) ||
        (cfg.spatial_idler && !cfg.spatial_idler->thickness_mm) ||
        (cfg.precompensator && !cfg.precompensator->thickness_mm);

    nlohmann::json j;
    j["schema_version"] = output_schema_version;
    j["setup_hash"] = scenario_hash(cfg);
    std::string csv = "quantity,value\n";
    auto put = [&](const std::string& k, double v) {
        j[k] = v;
        csv += k + "," + detail::num(v) + "\n";
    };

    if (!has_design_placeholder) {
        j["report"] = "nothing to design";
        emit(g, "report,nothing to design\n", j);
        return 0;
    }

    // before: no compensators at all
    Scenario bare = assemble_scenario(cfg, db, false);
    for (auto& sc : bare.spatial_comps) sc.plate.thickness_mm = 0.0;
    if (bare.precomp) bare.precomp->thickness_mm = 0.0;
    const TwoQubitState before = predict_state(
        bare, cfg.iris_diameters_mm.empty() ? 5.0 : cfg.iris_diameters_mm.back());

    const Scenario s = assemble_scenario(cfg, db, true);
    for (const auto& sc : s.spatial_comps) {
        const std::string arm = sc.arm == Arm::signal ? "signal" : "idler";
        put("spatial_comp_" + arm + "_mm", sc.plate.thickness_mm);
    }
    if (s.precomp) {
        put("precompensator_mm", s.precomp->thickness_mm);
        const DelayBudget b = s.budget();
        put("net_delay_signal_fs", b.net_s());
        put("net_delay_idler_fs", b.net_i());
        if (std::abs(b.dt_dc_s - b.dt_dc_i) > 1.0) {
            j["note"] = "arm delays differ; full compensation needs a post-downconversion "
                        "compensator";
            csv += "note,post-downconversion compensator recommended\n";
        }
    }
    const TwoQubitState after = predict_state(
        s, cfg.iris_diameters_mm.empty() ? 5.0 : cfg.iris_diameters_mm.back());
    put("tangle_before", concurrence_tangle(before).tangle);
    put("tangle_after", concurrence_tangle(after).tangle);
    put("fidelity_before", fidelity_max_entangled(before));
    put("fidelity_after", fidelity_max_entangled(after));
    emit(g, csv, j);
    return 0;
}

int cmd_sweep(const GlobalOpts& g, const std::string& axis, double from, double to, int points) {
    if (points < 2 || !(to > from)) throw ConfigError("sweep needs points >= 2 and to > from");
    const MaterialDb db = load_db(g);
    const Scenario s = load_scenario_checked(g, db, true);
    std::vector<double> x, y;
    if (axis == "pc_delay") {
        std::vector<double> delays;
        for (int i = 0; i < points; ++i) delays.push_back(from + (to - from) * i / double(points - 1));
        double ts = 0.0, ti = 0.0;
        for (const auto& sc : s.spatial_comps) {
            if (sc.arm == Arm::signal) ts = tau_sc(sc.plate, s.source.lambda_s_nm);
            else ti = tau_sc(sc.plate, s.source.lambda_i_nm);
        }
        const auto curve = tangle_vs_delay(s.source, s.pump, delays, s.filter, ts, ti);
        for (const auto& p : curve) {
            x.push_back(p.delay_fs);
            y.push_back(p.tangle);
        }
        emit(g, curve_csv("delay_fs", "tangle", x, y),
             curve_json("delay_fs", "tangle", x, y, scenario_hash(s.cfg)));
    } else if (axis == "iris") {
        for (int i = 0; i < points; ++i) {
            const double d = from + (to - from) * i / double(points - 1);
            x.push_back(d);
            y.push_back(concurrence_tangle(predict_state(s, d)).tangle);
        }
        emit(g, curve_csv("iris_mm", "tangle", x, y),
             curve_json("iris_mm", "tangle", x, y, scenario_hash(s.cfg)));
    } else {
        throw ConfigError("sweep axis must be iris or pc_delay");
    }
    return 0;
}

int cmd_state(const GlobalOpts& g, double iris_mm) {
    const MaterialDb db = load_db(g);
    const Scenario s = load_scenario_checked(g, db, true);
    const TwoQubitState st = predict_state(s, iris_mm);
    nlohmann::json j = state_json(st);
    j["setup_hash"] = scenario_hash(s.cfg);
    j["tangle"] = concurrence_tangle(st).tangle;
    j["iris_mm"] = iris_mm;
    // CSV form: flat real/imag table
    std::string csv = "row,col,re,im\n";
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            csv += std::to_string(r) + "," + std::to_string(c) + "," +
                   detail::num(st.rho(r, c).real()) + "," + detail::num(st.rho(r, c).imag()) + "\n";
    emit(g, csv, j);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-crystal type-I downconversion source designer"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--materials", g.materials_path, "materials database file");
    app.add_option("--config", g.config_path, "scenario config file");
    app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--out", g.out_path, "output path ('-' = stdout)");

    std::string index_material;
    double index_lambda = 0.0, index_theta = 0.0, index_phi = 0.0;
    auto* index = app.add_subcommand("index", "dispersion table for one material");
    index->add_option("material", index_material)->required();
    index->add_option("lambda_nm", index_lambda)->required()->check(CLI::PositiveNumber);
    index->add_option("--theta", index_theta, "wave-normal polar angle [deg]");
    index->add_option("--phi", index_phi, "wave-normal azimuth [deg]");

    bool compensated = false, uncompensated = false;
    double map_range = 6.0;
    int map_samples = 121;
    auto* pm = app.add_subcommand("phasemap", "relative phase across the collection plane");
    pm->add_flag("--compensated", compensated, "include the spatial compensators");
    pm->add_flag("--uncompensated", uncompensated, "bare two-crystal source (default)");
    pm->add_option("--range", map_range, "scan range [mm]");
    pm->add_option("--samples", map_samples, "sample count");

    auto* design = app.add_subcommand("design", "optimal compensators and predicted quality");

    std::string sweep_axis;
    double sweep_from = 0.0, sweep_to = 0.0;
    int sweep_points = 0;
    auto* sweep = app.add_subcommand("sweep", "tangle curve over iris size or precompensator delay");
    sweep->add_option("axis", sweep_axis)->required()->check(CLI::IsMember({"iris", "pc_delay"}));
    sweep->add_option("--from", sweep_from)->required();
    sweep->add_option("--to", sweep_to)->required();
    sweep->add_option("--points", sweep_points)->required();

    double state_iris = 5.0;
    auto* state = app.add_subcommand("state", "predicted density matrix");
    state->add_option("--iris", state_iris, "iris diameter [mm]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*index) return cmd_index(g, index_material, index_lambda, index_theta, index_phi);
        if (*pm) return cmd_phasemap(g, compensated && !uncompensated, map_range, map_samples);
        if (*design) return cmd_design(g);
        if (*sweep) return cmd_sweep(g, sweep_axis, sweep_from, sweep_to, sweep_points);
        if (*state) return cmd_state(g, state_iris);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "{\"error\":\"config\",\"message\":\"%s\"}\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "{\"error\":\"computation\",\"message\":\"%s\"}\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "{\"error\":\"internal\",\"message\":\"%s\"}\n", e.what());
        return 1;
    }
    return 2;
}
