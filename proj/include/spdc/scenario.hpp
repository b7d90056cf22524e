#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spdc/qstate.hpp"
#include "spdc/temporal.hpp"

namespace spdc {

// One fully described source + collection + compensator scenario, as read
// from a config file.  Sections: [source], [collection], [compensators].
struct CompensatorEntry {
    std::string material;
    double cut_deg = 0.0;
    std::optional<double> thickness_mm; // empty = "design" placeholder
};

struct ScenarioConfig {
    int schema_version = 1;
    // source
    std::string material;
    double theta_cut_deg = 0.0;
    double phi_cut_deg = 0.0;
    double thickness_mm = 0.0;
    double pump_center_nm = 405.0;
    double pump_bandwidth_fwhm_nm = 0.0;
    PumpSpec::Kind pump_kind = PumpSpec::Kind::cw_diode;
    double signal_nm = 810.0;
    std::optional<double> idler_nm; // empty = derive from energy conservation
    // collection
    double iris_distance_mm = 840.0;
    std::vector<double> iris_diameters_mm;
    double filter_fwhm_nm = 10.0;
    SpectralFilter::Shape filter_shape = SpectralFilter::Shape::gaussian;
    // compensators
    std::optional<CompensatorEntry> spatial_signal;
    std::optional<CompensatorEntry> spatial_idler;
    std::optional<CompensatorEntry> precompensator;

    double idler_derived_nm() const {
        return 1.0 / (1.0 / pump_center_nm - 1.0 / signal_nm);
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double to_double(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (...) {
        throw ConfigError("bad numeric value '" + s + "' for " + what);
    }
}

inline CompensatorEntry parse_comp(const std::string& value, const std::string& key) {
    std::istringstream ss(value);
    CompensatorEntry e;
    std::string thick;
    if (!(ss >> e.material >> e.cut_deg >> thick))
        throw ConfigError(key + ": expected '<material> <cut_deg> <thickness_mm|design>'");
    std::string extra;
    if (ss >> extra) throw ConfigError(key + ": trailing tokens");
    if (thick != "design") e.thickness_mm = to_double(thick, key);
    return e;
}

inline std::vector<double> parse_list(const std::string& value, const std::string& key) {
    std::vector<double> out;
    std::string item;
    std::istringstream ss(value);
    while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item), key));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

} // namespace detail

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");

    ScenarioConfig c;
    std::string line, section;
    int lineno = 0;
    bool saw_schema = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto fail = [&](const std::string& why) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + why);
        };
        if (t.front() == '[') {
            if (t.back() != ']') fail("malformed section header");
            section = t.substr(1, t.size() - 2);
            if (section != "source" && section != "collection" && section != "compensators")
                fail("unknown section [" + section + "]");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));

        if (section.empty()) {
            if (key == "schema_version") {
                c.schema_version = static_cast<int>(detail::to_double(value, key));
                if (c.schema_version != 1) fail("unsupported schema_version");
                saw_schema = true;
            } else {
                fail("unknown top-level key '" + key + "'");
            }
        } else if (section == "source") {
            if (key == "material") c.material = value;
            else if (key == "theta_cut_deg") c.theta_cut_deg = detail::to_double(value, key);
            else if (key == "phi_cut_deg") c.phi_cut_deg = detail::to_double(value, key);
            else if (key == "thickness_mm") c.thickness_mm = detail::to_double(value, key);
            else if (key == "pump_center_nm") c.pump_center_nm = detail::to_double(value, key);
            else if (key == "pump_bandwidth_fwhm_nm") c.pump_bandwidth_fwhm_nm = detail::to_double(value, key);
            else if (key == "pump_kind") {
                if (value == "cw_diode") c.pump_kind = PumpSpec::Kind::cw_diode;
                else if (value == "pulsed") c.pump_kind = PumpSpec::Kind::pulsed;
                else fail("pump_kind must be cw_diode or pulsed");
            } else if (key == "signal_nm") c.signal_nm = detail::to_double(value, key);
            else if (key == "idler_nm") {
                if (value != "auto") c.idler_nm = detail::to_double(value, key);
            } else fail("unknown key '" + key + "' in [source]");
        } else if (section == "collection") {
            if (key == "iris_distance_mm") c.iris_distance_mm = detail::to_double(value, key);
            else if (key == "iris_diameters_mm") c.iris_diameters_mm = detail::parse_list(value, key);
            else if (key == "filter_fwhm_nm") c.filter_fwhm_nm = detail::to_double(value, key);
            else if (key == "filter_shape") {
                if (value == "gaussian") c.filter_shape = SpectralFilter::Shape::gaussian;
                else if (value == "tophat") c.filter_shape = SpectralFilter::Shape::tophat;
                else fail("filter_shape must be gaussian or tophat");
            } else fail("unknown key '" + key + "' in [collection]");
        } else if (section == "compensators") {
            if (key == "spatial_signal") c.spatial_signal = detail::parse_comp(value, key);
            else if (key == "spatial_idler") c.spatial_idler = detail::parse_comp(value, key);
            else if (key == "precompensator") c.precompensator = detail::parse_comp(value, key);
            else fail("unknown key '" + key + "' in [compensators]");
        }
    }
    if (!saw_schema) throw ConfigError(path + ": missing schema_version");
    if (c.material.empty()) throw ConfigError(path + ": [source] material missing");
    if (!(c.thickness_mm > 0.0)) throw ConfigError(path + ": [source] thickness_mm must be > 0");

    // energy conservation of the triplet is enforced at load
    if (c.idler_nm) {
        const double lhs = 1.0 / c.pump_center_nm;
        const double rhs = 1.0 / c.signal_nm + 1.0 / *c.idler_nm;
        if (std::abs(lhs - rhs) > 1e-12 * lhs)
            throw ConfigError(path + ": idler_nm violates energy conservation; use 'auto'");
    }
    return c;
}

// ---------------------------------------------------------------------------
// assembled scenario

struct Scenario {
    ScenarioConfig cfg;
    const Material* material = nullptr;
    TwoCrystalSource source;
    PumpSpec pump;
    SpectralFilter filter;
    std::vector<SpatialCompensator> spatial_comps; // resolved thicknesses
    std::optional<CrystalPlate> precomp;           // resolved thickness
    bool spatial_designed = false;
    bool precomp_designed = false;

    DelayBudget budget() const {
        DelayBudget b;
        b.dt_dc_s = delta_t_dc(source, source.lambda_s_nm);
        b.dt_dc_i = delta_t_dc(source, source.lambda_i_nm);
        if (precomp) b.tau_pc = tau_pc(*precomp, source.lambda_p_nm);
        for (const auto& sc : spatial_comps) {
            if (sc.arm == Arm::signal) b.tau_sc_s = tau_sc(sc.plate, source.lambda_s_nm);
            else b.tau_sc_i = tau_sc(sc.plate, source.lambda_i_nm);
        }
        return b;
    }
};

/// resolve a config against the materials database; "design" placeholders
/// are optimized, explicit thicknesses are used as stated
inline Scenario assemble_scenario(const ScenarioConfig& cfg, const MaterialDb& db,
                                  bool run_designs = true) {
    Scenario s;
    s.cfg = cfg;
    s.material = &db.get(cfg.material);
    s.source = make_source(*s.material, deg2rad(cfg.theta_cut_deg), deg2rad(cfg.phi_cut_deg),
                           cfg.thickness_mm, cfg.pump_center_nm, cfg.signal_nm,
                           cfg.iris_distance_mm);
    s.pump = PumpSpec::from_fwhm_nm(cfg.pump_center_nm, cfg.pump_bandwidth_fwhm_nm, cfg.pump_kind);
    s.filter = SpectralFilter{cfg.filter_fwhm_nm, cfg.filter_shape};

    const double design_iris =
        cfg.iris_diameters_mm.empty() ? 5.0 : cfg.iris_diameters_mm.back();

    auto resolve_sc = [&](const CompensatorEntry& e, Arm arm) {
        const Material& cm = db.get(e.material);
        double l = 0.0, az = 0.0;
        if (e.thickness_mm) {
            l = *e.thickness_mm;
        } else if (run_designs) {
            const auto d =
                design_spatial_compensator(s.source, cm, deg2rad(e.cut_deg), arm, design_iris);
            l = d.thickness_mm;
            az = d.azimuth_arm;
            s.spatial_designed = true;
        }
        SpatialCompensator sc;
        sc.plate = CrystalPlate(cm, deg2rad(e.cut_deg), 0.0, l,
                                arm == Arm::signal ? PlateRole::spatial_comp_signal
                                                   : PlateRole::spatial_comp_idler);
        sc.arm = arm;
        sc.azimuth_arm = az;
        s.spatial_comps.push_back(sc);
    };
    if (cfg.spatial_signal) resolve_sc(*cfg.spatial_signal, Arm::signal);
    if (cfg.spatial_idler) resolve_sc(*cfg.spatial_idler, Arm::idler);

    if (cfg.precompensator) {
        const auto& e = *cfg.precompensator;
        const Material& pm = db.get(e.material);
        double l = 0.0;
        if (e.thickness_mm) {
            l = *e.thickness_mm;
        } else if (run_designs) {
            double ts = 0.0, ti = 0.0;
            for (const auto& sc : s.spatial_comps) {
                if (sc.arm == Arm::signal) ts = tau_sc(sc.plate, s.source.lambda_s_nm);
                else ti = tau_sc(sc.plate, s.source.lambda_i_nm);
            }
            l = design_precompensator(s.source, s.pump, pm, deg2rad(e.cut_deg), ts, ti)
                    .thickness_mm;
            s.precomp_designed = true;
        }
        s.precomp = CrystalPlate(pm, deg2rad(e.cut_deg), 0.0, l, PlateRole::precompensator);
    }
    return s;
}

/// FNV-1a hash of the canonical config serialization, for output metadata
inline std::uint64_t scenario_hash(const ScenarioConfig& c) {
    std::ostringstream ss;
    ss.precision(17);
    ss << c.material << '|' << c.theta_cut_deg << '|' << c.phi_cut_deg << '|' << c.thickness_mm
       << '|' << c.pump_center_nm << '|' << c.pump_bandwidth_fwhm_nm << '|'
       << int(c.pump_kind) << '|' << c.signal_nm << '|' << (c.idler_nm ? *c.idler_nm : 0.0) << '|'
       << c.iris_distance_mm << '|' << c.filter_fwhm_nm << '|' << int(c.filter_shape);
    auto put_comp = [&](const std::optional<CompensatorEntry>& e) {
        ss << '|';
        if (e) ss << e->material << ',' << e->cut_deg << ',' << (e->thickness_mm ? *e->thickness_mm : -1.0);
    };
    put_comp(c.spatial_signal);
    put_comp(c.spatial_idler);
    put_comp(c.precompensator);
    const std::string s = ss.str();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

/// collected-state prediction: spatial phases over the iris (uniform area
/// weighting via chord lengths) combined with the temporal coherence
inline TwoQubitState predict_state(const Scenario& s, double iris_diameter_mm, int n_samples = 41) {
    const TwoCrystalSource& src = s.source;
    const double x0 = src.iris_distance_mm * std::tan(src.theta_ext_s0);
    std::vector<double> phases, weights;
    phases.reserve(static_cast<size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
        const double xi = -0.5 * iris_diameter_mm + iris_diameter_mm * i / double(n_samples - 1);
        const double chord = std::sqrt(std::max(0.0, 0.25 * iris_diameter_mm * iris_diameter_mm -
                                                         xi * xi));
        phases.push_back(pair_phase(src, s.spatial_comps, x0 + xi));
        weights.push_back(chord);
    }
    const DelayBudget b = s.budget();
    const JtpaGrid g = jtpa(src, s.pump, {}, s.filter);
    const cplx v = visibility(g, b.net_s(), b.net_i(), s.filter, s.filter, src.lambda_s_nm,
                              src.lambda_i_nm);
    return rho_combined(phases, v, weights);
}

} // namespace spdc
