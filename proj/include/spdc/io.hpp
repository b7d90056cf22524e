#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdc/qstate.hpp"
#include "spdc/scenario.hpp"
#include "spdc/spatial.hpp"

namespace spdc {

inline constexpr int output_schema_version = 1;

namespace detail {

// fixed C-locale formatting so identical inputs give byte-identical output
inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

} // namespace detail

inline std::string phase_map_csv(const PhaseMap& m) {
    std::string out = "x_mm,phase_deg\n";
    for (size_t i = 0; i < m.x_mm.size(); ++i)
        out += detail::num(m.x_mm[i]) + "," + detail::num(m.phase_deg[i]) + "\n";
    return out;
}

inline nlohmann::json phase_map_json(const PhaseMap& m) {
    nlohmann::json j;
    j["schema_version"] = output_schema_version;
    j["plane_distance_mm"] = m.plane_distance_mm;
    j["lambda_s_nm"] = m.lambda_s_nm;
    j["lambda_i_nm"] = m.lambda_i_nm;
    j["setup_hash"] = m.setup_hash;
    j["x_mm"] = m.x_mm;
    j["phase_deg"] = m.phase_deg;
    return j;
}

inline std::string curve_csv(const std::string& xname, const std::string& yname,
                             const std::vector<double>& x, const std::vector<double>& y) {
    std::string out = xname + "," + yname + "\n";
    for (size_t i = 0; i < x.size(); ++i)
        out += detail::num(x[i]) + "," + detail::num(y[i]) + "\n";
    return out;
}

inline nlohmann::json curve_json(const std::string& xname, const std::string& yname,
                                 const std::vector<double>& x, const std::vector<double>& y,
                                 std::uint64_t setup_hash) {
    nlohmann::json j;
    j["schema_version"] = output_schema_version;
    j["setup_hash"] = setup_hash;
    j[xname] = x;
    j[yname] = y;
    return j;
}

/// 4x4 density matrix as real/imag arrays over {HH, HV, VH, VV}
inline nlohmann::json state_json(const TwoQubitState& s) {
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (int r = 0; r < 4; ++r) {
        nlohmann::json rr = nlohmann::json::array(), ri = nlohmann::json::array();
        for (int c = 0; c < 4; ++c) {
            rr.push_back(s.rho(r, c).real());
            ri.push_back(s.rho(r, c).imag());
        }
        re.push_back(rr);
        im.push_back(ri);
    }
    nlohmann::json j;
    j["schema_version"] = output_schema_version;
    j["basis"] = {"HH", "HV", "VH", "VV"};
    j["rho_re"] = re;
    j["rho_im"] = im;
    return j;
}

inline void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::fputs(text.c_str(), stdout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file '" + path + "'");
    out << text;
}

} // namespace spdc
