#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "spdc/dual.hpp"
#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc {

enum class Symmetry { isotropic, uniaxial, biaxial };

// Dispersion formula ids (lambda in micrometers):
//   sellmeier_bd    n^2 = A + B/(lam^2 - C) - D*lam^2          coeff = [A,B,C,D]
//   sellmeier_poles n^2 = A + sum_i B_i*lam^2/(lam^2 - C_i)    coeff = [A,B1,C1,B2,C2,...]
//   constant        n^2 = A                                    coeff = [A]
struct AxisDispersion {
    std::string formula;
    std::vector<double> coeff;

    D2 n2(const D2& lam_um) const {
        if (formula == "sellmeier_bd") {
            if (coeff.size() != 4) throw ConfigError("sellmeier_bd needs 4 coefficients");
            const D2 l2 = lam_um * lam_um;
            return D2(coeff[0]) + D2(coeff[1]) / (l2 - D2(coeff[2])) - D2(coeff[3]) * l2;
        }
        if (formula == "sellmeier_poles") {
            if (coeff.size() < 3 || coeff.size() % 2 == 0)
                throw ConfigError("sellmeier_poles needs 1 + 2k coefficients");
            const D2 l2 = lam_um * lam_um;
            D2 acc(coeff[0]);
            for (size_t i = 1; i + 1 < coeff.size(); i += 2)
                acc = acc + D2(coeff[i]) * l2 / (l2 - D2(coeff[i + 1]));
            return acc;
        }
        if (formula == "constant") {
            if (coeff.size() != 1) throw ConfigError("constant needs 1 coefficient");
            return D2(coeff[0]);
        }
        throw ConfigError("unknown dispersion formula '" + formula + "'");
    }
};

// A crystal or glass with per-principal-axis dispersion.  For biaxial
// materials the axes are labeled so that n_x <= n_y <= n_z over the
// transparency range (optical-frame convention); cut angles are always
// interpreted in this frame.  Uniaxial materials store x = y = ordinary,
// z = extraordinary.
struct Material {
    std::string name;
    Symmetry symmetry = Symmetry::isotropic;
    std::array<AxisDispersion, 3> axes;
    double lambda_min_nm = 0.0;
    double lambda_max_nm = 0.0;
    std::string citation;

    void check_wavelength(double lambda_nm) const {
        if (!(lambda_nm > 0.0) || std::isnan(lambda_nm))
            throw ArgumentError(name + ": bad wavelength argument");
        if (lambda_nm < lambda_min_nm || lambda_nm > lambda_max_nm) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s: %.6g nm outside transparency range [%g, %g] nm",
                          name.c_str(), lambda_nm, lambda_min_nm, lambda_max_nm);
            throw DomainError(buf);
        }
    }

    /// squared principal index with wavelength derivatives, axis in {0,1,2}
    D2 n2_axis(int axis, double lambda_nm) const {
        check_wavelength(lambda_nm);
        const D2 lam_um = D2::variable(lambda_nm) * D2(1.0e-3);
        return axes[static_cast<size_t>(axis)].n2(lam_um);
    }

    D2 n_axis(int axis, double lambda_nm) const { return sqrt(n2_axis(axis, lambda_nm)); }

    double no(double lambda_nm) const { return n_axis(0, lambda_nm).f; }
    double ne(double lambda_nm) const { return n_axis(2, lambda_nm).f; }
};

inline Material make_uniaxial(const std::string& name, AxisDispersion o, AxisDispersion e,
                              double lmin_nm, double lmax_nm, const std::string& cite = "") {
    Material m;
    m.name = name;
    m.symmetry = Symmetry::uniaxial;
    m.axes = {o, o, e};
    m.lambda_min_nm = lmin_nm;
    m.lambda_max_nm = lmax_nm;
    m.citation = cite;
    return m;
}

/// test helper: isotropic material with constant index
inline Material make_constant_index(const std::string& name, double n) {
    Material m;
    m.name = name;
    m.symmetry = Symmetry::isotropic;
    AxisDispersion a{"constant", {n * n}};
    m.axes = {a, a, a};
    m.lambda_min_nm = 1.0;
    m.lambda_max_nm = 1.0e7;
    return m;
}

// ---------------------------------------------------------------------------
// materials database file
//
//   format 1
//   material <name> <symmetry> range <min_nm> <max_nm> cite "<citation>"
//   axis <o|e|x|y|z|iso> <formula> <coeff...>
//   end
//
// Values round-trip bit-exact through save/load (%.17g).

struct MaterialDb {
    std::map<std::string, Material> materials;

    const Material& get(const std::string& name) const {
        auto it = materials.find(name);
        if (it == materials.end()) throw ArgumentError("unknown material '" + name + "'");
        return it->second;
    }

    bool has(const std::string& name) const { return materials.count(name) != 0; }

    void add(const Material& m) { materials[m.name] = m; }

    static MaterialDb load(const std::string& path);
    void save(const std::string& path) const;
    std::string serialize() const;

    /// biaxial labeling must satisfy n_x <= n_y <= n_z across the range
    void validate() const {
        for (const auto& [name, m] : materials) {
            const int nsamp = 24;
            for (int i = 0; i <= nsamp; ++i) {
                const double lam = m.lambda_min_nm +
                                   (m.lambda_max_nm - m.lambda_min_nm) * i / double(nsamp);
                const double nx = m.n_axis(0, lam).f;
                const double ny = m.n_axis(1, lam).f;
                const double nz = m.n_axis(2, lam).f;
                if (!(nx > 1.0 && ny > 1.0 && nz > 1.0))
                    throw ConfigError(name + ": index not real > 1 inside transparency range");
                if (m.symmetry == Symmetry::biaxial && !(nx <= ny && ny <= nz))
                    throw ConfigError(name + ": principal axes violate n_x <= n_y <= n_z");
            }
        }
    }
};

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline int axis_slot(const std::string& tag) {
    if (tag == "o" || tag == "x" || tag == "iso") return 0;
    if (tag == "y") return 1;
    if (tag == "e" || tag == "z") return 2;
    throw ConfigError("unknown axis tag '" + tag + "'");
}

} // namespace detail

inline MaterialDb MaterialDb::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open materials file '" + path + "'");
    MaterialDb db;
    Material cur;
    bool in_material = false;
    bool saw_format = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos || line[pos] == '#') continue;
        std::istringstream ss(line);
        std::string tok;
        ss >> tok;
        auto fail = [&](const std::string& why) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + why);
        };
        if (tok == "format") {
            int ver = 0;
            ss >> ver;
            if (ver != 1) fail("unsupported format version");
            saw_format = true;
        } else if (tok == "material") {
            if (in_material) fail("missing 'end' before new material");
            if (!saw_format) fail("missing 'format' header");
            cur = Material{};
            std::string sym, kw;
            ss >> cur.name >> sym >> kw;
            if (sym == "uniaxial") cur.symmetry = Symmetry::uniaxial;
            else if (sym == "biaxial") cur.symmetry = Symmetry::biaxial;
            else if (sym == "isotropic") cur.symmetry = Symmetry::isotropic;
            else fail("unknown symmetry '" + sym + "'");
            if (kw != "range") fail("expected 'range'");
            ss >> cur.lambda_min_nm >> cur.lambda_max_nm;
            ss >> kw;
            if (kw != "cite") fail("expected 'cite'");
            std::string rest;
            std::getline(ss, rest);
            const auto q1 = rest.find('"');
            const auto q2 = rest.rfind('"');
            if (q1 == std::string::npos || q2 <= q1) fail("citation must be quoted");
            cur.citation = rest.substr(q1 + 1, q2 - q1 - 1);
            in_material = true;
        } else if (tok == "axis") {
            if (!in_material) fail("'axis' outside material block");
            std::string tag;
            AxisDispersion ax;
            ss >> tag >> ax.formula;
            double v;
            while (ss >> v) ax.coeff.push_back(v);
            const int slot = detail::axis_slot(tag);
            cur.axes[static_cast<size_t>(slot)] = ax;
            if (cur.symmetry == Symmetry::uniaxial && slot == 0) cur.axes[1] = ax;
            if (cur.symmetry == Symmetry::isotropic) cur.axes = {ax, ax, ax};
        } else if (tok == "end") {
            if (!in_material) fail("'end' without material");
            db.add(cur);
            in_material = false;
        } else {
            fail("unknown directive '" + tok + "'");
        }
    }
    if (in_material) throw ConfigError(path + ": unterminated material block");
    db.validate();
    return db;
}

inline std::string MaterialDb::serialize() const {
    std::ostringstream out;
    out << "# spdckit materials database\n";
    out << "format 1\n";
    for (const auto& [name, m] : materials) {
        const char* sym = m.symmetry == Symmetry::uniaxial   ? "uniaxial"
                          : m.symmetry == Symmetry::biaxial ? "biaxial"
                                                            : "isotropic";
        out << "material " << name << ' ' << sym << " range " << detail::fmt17(m.lambda_min_nm)
            << ' ' << detail::fmt17(m.lambda_max_nm) << " cite \"" << m.citation << "\"\n";
        auto put = [&](const char* tag, const AxisDispersion& ax) {
            out << "axis " << tag << ' ' << ax.formula;
            for (double c : ax.coeff) out << ' ' << detail::fmt17(c);
            out << '\n';
        };
        if (m.symmetry == Symmetry::uniaxial) {
            put("o", m.axes[0]);
            put("e", m.axes[2]);
        } else if (m.symmetry == Symmetry::biaxial) {
            put("x", m.axes[0]);
            put("y", m.axes[1]);
            put("z", m.axes[2]);
        } else {
            put("iso", m.axes[0]);
        }
        out << "end\n";
    }
    return out.str();
}

inline void MaterialDb::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write materials file '" + path + "'");
    out << serialize();
}

} // namespace spdc
