#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "spdc/spatial.hpp"

namespace spdc {

using cplx = std::complex<double>;

struct PumpSpec {
    enum class Kind { cw_diode, pulsed };
    double center_nm = 405.0;
    double sigma_radfs = 0.0; // Gaussian amplitude envelope exp(-(nu/sigma)^2)
    Kind kind = Kind::cw_diode;

    static PumpSpec from_fwhm_nm(double center_nm, double intensity_fwhm_nm, Kind kind) {
        if (!(intensity_fwhm_nm > 0.0)) throw ArgumentError("pump bandwidth must be > 0");
        PumpSpec p;
        p.center_nm = center_nm;
        p.sigma_radfs = sigma_from_intensity_fwhm(bandwidth_nm_to_radfs(intensity_fwhm_nm, center_nm));
        p.kind = kind;
        return p;
    }

    double intensity_fwhm_nm() const {
        return bandwidth_radfs_to_nm(intensity_fwhm_from_sigma(sigma_radfs), center_nm);
    }
};

struct SpectralFilter {
    enum class Shape { gaussian, tophat };
    double fwhm_nm = 10.0; // intensity FWHM at the daughter wavelength
    Shape shape = Shape::gaussian;

    /// amplitude response at detuning nu [rad/fs] around center lambda [nm]
    double amplitude(double nu, double center_nm) const {
        const double w = bandwidth_nm_to_radfs(fwhm_nm, center_nm);
        if (shape == Shape::tophat) return std::abs(nu) <= 0.5 * w ? 1.0 : 0.0;
        const double sigma = sigma_from_intensity_fwhm(w);
        return std::exp(-(nu / sigma) * (nu / sigma));
    }
};

// ---------------------------------------------------------------------------
// group delays
//
// Collinear group velocities along the cut direction; the daughters leave
// within ~3 degrees of the pump axis, where the projection correction is
// below 0.2%.  Branch roles for type-I: the pump phasematches on the fast
// branch, the daughters are born on the slow branch.

namespace detail {

inline double inv_vg(const Material& m, double lambda_nm, const Vec3& dir, Branch br) {
    check_interior(m, lambda_nm);
    return 1.0 / group_velocity(index_branch_d(m, lambda_nm, dir, br), lambda_nm);
}

} // namespace detail

struct ExitTimes {
    double t1_s, t1_i; // pair born in crystal 1 [fs]
    double t2_s, t2_i; // pair born in crystal 2
};

/// per-pair exit times from the back face of the second crystal, relative
/// to the pump reaching the front face of the first crystal: half-crystal
/// pump leg, half-crystal daughter leg in the birth crystal, full crossing
/// of the other crystal
inline ExitTimes crystal_exit_times(const TwoCrystalSource& src) {
    const Material& m = *src.c1.material;
    const Vec3 u = src.c1.cut_direction();
    const double d1 = src.c1.thickness_mm, d2 = src.c2.thickness_mm;
    const double lp = src.lambda_p_nm;

    const double pump_fast = detail::inv_vg(m, lp, u, Branch::fast);
    const double pump_slow = detail::inv_vg(m, lp, u, Branch::slow);
    auto t1 = [&](double lam) {
        return 0.5 * d1 * pump_fast + 0.5 * d1 * detail::inv_vg(m, lam, u, Branch::slow) +
               d2 * detail::inv_vg(m, lam, u, Branch::fast);
    };
    auto t2 = [&](double lam) {
        return d1 * pump_slow + 0.5 * d2 * pump_fast +
               0.5 * d2 * detail::inv_vg(m, lam, u, Branch::slow);
    };
    return {t1(src.lambda_s_nm), t1(src.lambda_i_nm), t2(src.lambda_s_nm), t2(src.lambda_i_nm)};
}

/// net delay between the pairs born in the two crystals for one arm [fs];
/// reduces to d (1/Vg_or(w_p) - 1/Vg_ex(w_daughter)) for equal thicknesses
inline double delta_t_dc(const TwoCrystalSource& src, double lambda_daughter_nm) {
    const ExitTimes t = crystal_exit_times(src);
    const bool is_s = std::abs(lambda_daughter_nm - src.lambda_s_nm) <=
                      std::abs(lambda_daughter_nm - src.lambda_i_nm);
    return is_s ? t.t2_s - t.t1_s : t.t2_i - t.t1_i;
}

/// delay a birefringent precompensator adds between the pump polarizations
/// [fs]; rotating the plate 90 degrees about the beam flips the sign
inline double tau_pc(const CrystalPlate& pc, double lambda_p_nm) {
    if (pc.thickness_mm == 0.0) return 0.0;
    const Material& m = *pc.material;
    const Vec3 u = pc.cut_direction();
    const double tau = pc.thickness_mm * (detail::inv_vg(m, lambda_p_nm, u, Branch::slow) -
                                          detail::inv_vg(m, lambda_p_nm, u, Branch::fast));
    return pc.orientation == PlateOrientation::rotated_90 ? -tau : tau;
}

/// temporal delay a spatial compensator adds in its arm [fs]
inline double tau_sc(const CrystalPlate& sc, double lambda_daughter_nm) {
    if (sc.thickness_mm == 0.0) return 0.0;
    const Material& m = *sc.material;
    const Vec3 u = sc.cut_direction();
    const double tau = sc.thickness_mm * (detail::inv_vg(m, lambda_daughter_nm, u, Branch::slow) -
                                          detail::inv_vg(m, lambda_daughter_nm, u, Branch::fast));
    return sc.orientation == PlateOrientation::rotated_90 ? -tau : tau;
}

struct DelayBudget {
    double dt_dc_s = 0.0, dt_dc_i = 0.0; // crystal pair delays
    double tau_pc = 0.0;                 // precompensator
    double tau_sc_s = 0.0, tau_sc_i = 0.0;

    double net_s() const { return dt_dc_s - tau_pc + tau_sc_s; }
    double net_i() const { return dt_dc_i - tau_pc + tau_sc_i; }
};

// ---------------------------------------------------------------------------
// joint two-photon amplitude in the spectral domain
//
//   f(nu_s, nu_i) = exp(-((nu_s+nu_i)/sigma_p)^2)
//                   * exp(-i Phi) sinc(Phi),
//   Phi = d/2 (D+ (nu_s+nu_i) + 1/4 D'' (nu_s-nu_i)^2)
//
// D+ is the inverse-group-velocity mismatch between the daughters at the
// degenerate wavelength and the pump; D'' the daughter GVD there.

/// D+ [fs/mm]
inline double pump_daughter_mismatch(const TwoCrystalSource& src) {
    const Material& m = *src.c1.material;
    const Vec3 u = src.c1.cut_direction();
    return detail::inv_vg(m, 2.0 * src.lambda_p_nm, u, Branch::slow) -
           detail::inv_vg(m, src.lambda_p_nm, u, Branch::fast);
}

/// D'' [fs^2/mm]
inline double daughter_gvd(const TwoCrystalSource& src) {
    const Material& m = *src.c1.material;
    const Vec3 u = src.c1.cut_direction();
    const double lam = 2.0 * src.lambda_p_nm;
    check_interior(m, lam);
    return gvd(index_branch_d(m, lam, u, Branch::slow), lam);
}

struct JtpaGrid {
    std::vector<double> nu_s; // rad/fs detunings from Omega_p/2
    std::vector<double> nu_i;
    std::vector<cplx> amplitude;     // row-major [is * nu_i.size() + ii], L2-normalized
    std::vector<double> extra_phase; // optional which-path phase beyond first order [rad]
    double d_plus = 0.0;
    double d_second = 0.0;

    size_t index(size_t is, size_t ii) const { return is * nu_i.size() + ii; }
    bool has_extra_phase() const { return !extra_phase.empty(); }
};

struct JtpaSpec {
    int n = 512;
    double halfwidth_s = 0.0; // rad/fs; 0 = automatic from pump, sinc and filters
    double halfwidth_i = 0.0;
    bool include_sinc = true;
    double truncation = 1e-4; // required amplitude falloff at the grid edge
};

namespace detail {

inline double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

inline cplx jtpa_value(double nu_s, double nu_i, double sigma_p, double half_d, double dp,
                       double dsec, bool include_sinc) {
    const double np = (nu_s + nu_i) / sigma_p;
    const double env = std::exp(-np * np);
    if (!include_sinc) return cplx(env, 0.0);
    const double arg = half_d * (dp * (nu_s + nu_i) + 0.25 * dsec * (nu_s - nu_i) * (nu_s - nu_i));
    return env * sinc(arg) * std::exp(cplx(0.0, -arg));
}

} // namespace detail

/// sample the JTPA on a uniform detuning grid and L2-normalize it; the grid
/// is widened until the filtered amplitude at the edges falls below the
/// truncation threshold
inline JtpaGrid jtpa(const TwoCrystalSource& src, const PumpSpec& pump, const JtpaSpec& spec = {},
                     const SpectralFilter& filter = {}) {
    if (spec.n < 16) throw ArgumentError("jtpa grid too small");
    if (!(pump.sigma_radfs > 0.0)) throw ArgumentError("pump sigma must be > 0");

    JtpaGrid g;
    g.d_plus = pump_daughter_mismatch(src);
    g.d_second = daughter_gvd(src);
    const double half_d = 0.5 * src.c1.thickness_mm;

    // initial half-widths: enough for the pump envelope, the sinc main
    // lobes and the filter passband
    double hw_s = spec.halfwidth_s, hw_i = spec.halfwidth_i;
    if (hw_s == 0.0 || hw_i == 0.0) {
        const double pump_w = 3.2 * pump.sigma_radfs;
        const double filt_w =
            2.4 * sigma_from_intensity_fwhm(bandwidth_nm_to_radfs(filter.fwhm_nm, 2.0 * pump.center_nm));
        const double auto_w = std::max(pump_w, filt_w);
        if (hw_s == 0.0) hw_s = auto_w;
        if (hw_i == 0.0) hw_i = auto_w;
    }

    const double lam_d = 2.0 * pump.center_nm;
    for (int attempt = 0;; ++attempt) {
        g.nu_s.resize(static_cast<size_t>(spec.n));
        g.nu_i.resize(static_cast<size_t>(spec.n));
        for (int k = 0; k < spec.n; ++k) {
            g.nu_s[static_cast<size_t>(k)] = -hw_s + 2.0 * hw_s * k / double(spec.n - 1);
            g.nu_i[static_cast<size_t>(k)] = -hw_i + 2.0 * hw_i * k / double(spec.n - 1);
        }
        g.amplitude.assign(g.nu_s.size() * g.nu_i.size(), cplx(0.0, 0.0));
        double peak = 0.0, edge = 0.0;
        for (size_t is = 0; is < g.nu_s.size(); ++is) {
            for (size_t ii = 0; ii < g.nu_i.size(); ++ii) {
                const cplx v = detail::jtpa_value(g.nu_s[is], g.nu_i[ii], pump.sigma_radfs, half_d,
                                                  g.d_plus, g.d_second, spec.include_sinc);
                g.amplitude[g.index(is, ii)] = v;
                const double fa = std::abs(v) * filter.amplitude(g.nu_s[is], lam_d) *
                                  filter.amplitude(g.nu_i[ii], lam_d);
                peak = std::max(peak, fa);
                if (is == 0 || ii == 0 || is + 1 == g.nu_s.size() || ii + 1 == g.nu_i.size())
                    edge = std::max(edge, fa);
            }
        }
        if (edge <= spec.truncation * peak) break;
        if (attempt >= 3)
            throw GridError("jtpa grid cannot satisfy the truncation requirement", 2.0 * hw_s,
                            2.0 * hw_i);
        hw_s *= 2.0;
        hw_i *= 2.0;
    }

    double norm2 = 0.0;
    for (const cplx& v : g.amplitude) norm2 += std::norm(v);
    if (!(norm2 > 0.0)) throw NumericError("jtpa amplitude vanished on the grid", 0.0);
    const double inv = 1.0 / std::sqrt(norm2);
    for (cplx& v : g.amplitude) v *= inv;
    return g;
}

// ---------------------------------------------------------------------------
// visibility
//
//   v(D_s, D_i) = sum |f_filtered|^2 exp(i (nu_s D_s + nu_i D_i)) / norm
//
// the frequency-domain equivalent of the JTPA self-convolution under
// relative delays; filters multiply the amplitude per arm (time-domain
// convolution with their impulse response).

inline cplx visibility(const JtpaGrid& g, double delay_s_fs, double delay_i_fs,
                       const SpectralFilter& filter_s, const SpectralFilter& filter_i,
                       double lambda_s_nm, double lambda_i_nm) {
    cplx acc(0.0, 0.0);
    double norm = 0.0;
    for (size_t is = 0; is < g.nu_s.size(); ++is) {
        const double fs = filter_s.amplitude(g.nu_s[is], lambda_s_nm);
        for (size_t ii = 0; ii < g.nu_i.size(); ++ii) {
            const double fi = filter_i.amplitude(g.nu_i[ii], lambda_i_nm);
            const size_t k = g.index(is, ii);
            const double w = std::norm(g.amplitude[k] * fs * fi);
            if (w == 0.0) continue;
            double phase = g.nu_s[is] * delay_s_fs + g.nu_i[ii] * delay_i_fs;
            if (g.has_extra_phase()) phase += g.extra_phase[k];
            acc += w * std::exp(cplx(0.0, phase));
            norm += w;
        }
    }
    if (!(norm > 0.0)) throw NumericError("zero norm after filtering", 0.0);
    return acc / norm;
}

/// convenience: both arms share the filter and the degenerate wavelength
inline cplx visibility(const JtpaGrid& g, double delay_s_fs, double delay_i_fs,
                       const SpectralFilter& filter, double lambda_d_nm) {
    return visibility(g, delay_s_fs, delay_i_fs, filter, filter, lambda_d_nm, lambda_d_nm);
}

// ---------------------------------------------------------------------------
// second-order which-path phase
//
// The Eq.-style model treats the two pair amplitudes as pure time shifts of
// one JTPA.  Exact material dispersion adds a differential spectral phase
// between the first-crystal path (daughters cross the second crystal fast,
// pump crossed half of crystal 1) and the second-crystal path (pump crossed
// crystal 1 slow); beyond first order this is not removable by a delay.
// Filling it makes first-order-only compensation visibly imperfect; the
// default model leaves it off so v(0,0) = 1 holds exactly.

inline void fill_second_order_phase(JtpaGrid& g, const TwoCrystalSource& src,
                                    const CrystalPlate* precomp = nullptr,
                                    const CrystalPlate* sc_s = nullptr,
                                    const CrystalPlate* sc_i = nullptr) {
    const Material& m = *src.c1.material;
    const Vec3 u = src.c1.cut_direction();
    const double d1 = src.c1.thickness_mm, d2 = src.c2.thickness_mm;
    const double w_p = omega_of_lambda(src.lambda_p_nm);
    const double w_d = 0.5 * w_p;

    auto k_branch = [&](const Material& mat, const Vec3& dir, double omega, Branch br) {
        return k_of_omega(mat, omega, dir, br);
    };

    // which-path phase difference (first-crystal pair minus second-crystal
    // pair) as a function of the daughter detunings
    auto path_phase = [&](double nu_s, double nu_i) {
        const double ws = w_d + nu_s, wi = w_d + nu_i, wp = w_p + nu_s + nu_i;
        double phi = 0.0;
        // daughters of crystal 1 cross crystal 2 on the fast branch while
        // the second-crystal pump leg crosses crystal 1 on the slow branch
        phi += d2 * (k_branch(m, u, ws, Branch::fast) + k_branch(m, u, wi, Branch::fast));
        phi -= d1 * k_branch(m, u, wp, Branch::slow);
        // birth half-legs
        phi += 0.5 * d1 * (k_branch(m, u, ws, Branch::slow) + k_branch(m, u, wi, Branch::slow));
        phi -= 0.5 * d2 * (k_branch(m, u, ws, Branch::slow) + k_branch(m, u, wi, Branch::slow));
        phi += 0.5 * d1 * k_branch(m, u, wp, Branch::fast);
        phi -= 0.5 * d2 * k_branch(m, u, wp, Branch::fast);
        // compensators: pump plates see the pump, arm plates the daughters
        if (precomp && precomp->thickness_mm > 0.0) {
            const Vec3 up = precomp->cut_direction();
            const double sgn = precomp->orientation == PlateOrientation::rotated_90 ? -1.0 : 1.0;
            phi += sgn * precomp->thickness_mm *
                   (k_branch(*precomp->material, up, wp, Branch::slow) -
                    k_branch(*precomp->material, up, wp, Branch::fast));
        }
        auto arm_plate = [&](const CrystalPlate* sc, double w_arm) {
            if (!sc || sc->thickness_mm == 0.0) return 0.0;
            const Vec3 ua = sc->cut_direction();
            const double sgn = sc->orientation == PlateOrientation::rotated_90 ? -1.0 : 1.0;
            return sgn * sc->thickness_mm *
                   (k_branch(*sc->material, ua, w_arm, Branch::slow) -
                    k_branch(*sc->material, ua, w_arm, Branch::fast));
        };
        phi -= arm_plate(sc_s, ws);
        phi -= arm_plate(sc_i, wi);
        return phi;
    };

    // subtract value and first-order slopes: the linear part is carried by
    // the visibility delay arguments
    const double phi0 = path_phase(0.0, 0.0);
    const double h = 1e-4;
    const double gs = (path_phase(h, 0.0) - path_phase(-h, 0.0)) / (2.0 * h);
    const double gi = (path_phase(0.0, h) - path_phase(0.0, -h)) / (2.0 * h);

    g.extra_phase.assign(g.nu_s.size() * g.nu_i.size(), 0.0);
    for (size_t is = 0; is < g.nu_s.size(); ++is)
        for (size_t ii = 0; ii < g.nu_i.size(); ++ii)
            g.extra_phase[g.index(is, ii)] =
                path_phase(g.nu_s[is], g.nu_i[ii]) - phi0 - gs * g.nu_s[is] - gi * g.nu_i[ii];
}

// ---------------------------------------------------------------------------
// precompensator design

struct PrecompensatorDesign {
    double thickness_mm = 0.0;
    double tau_fs = 0.0;            // delay the plate introduces
    bool needs_postcompensator = false; // per-arm delays differ; see the report
    double residual_mismatch_fs = 0.0;  // |net_s - net_i| after compensation
};

/// per-mm pump-polarization delay of a precompensator material/cut [fs/mm]
inline double pc_delay_per_mm(const Material& m, double theta_cut, double lambda_p_nm) {
    const Vec3 u = direction_from_angles(theta_cut, 0.0);
    return detail::inv_vg(m, lambda_p_nm, u, Branch::slow) -
           detail::inv_vg(m, lambda_p_nm, u, Branch::fast);
}

/// precompensator length nulling the mean arm delay; when the two arms
/// disagree the compromise optimum maximizes |v| and a post-downconversion
/// compensator is flagged
inline PrecompensatorDesign design_precompensator(const TwoCrystalSource& src,
                                                  const PumpSpec& pump, const Material& pc_material,
                                                  double pc_theta_cut, double tau_sc_s_fs = 0.0,
                                                  double tau_sc_i_fs = 0.0) {
    const double per_mm = pc_delay_per_mm(pc_material, pc_theta_cut, pump.center_nm);
    if (std::abs(per_mm) < 1e-6)
        throw ArgumentError(pc_material.name + ": not birefringent at the pump wavelength");

    const double need_s = delta_t_dc(src, src.lambda_s_nm) + tau_sc_s_fs;
    const double need_i = delta_t_dc(src, src.lambda_i_nm) + tau_sc_i_fs;

    PrecompensatorDesign out;
    double tau = 0.5 * (need_s + need_i);
    if (std::abs(need_s - need_i) > 1.0) {
        out.needs_postcompensator = true;
        // compromise optimum: maximize |v| on the delay line (tau, tau)
        const JtpaGrid g = jtpa(src, pump);
        const SpectralFilter f{};
        auto merit = [&](double t) {
            return -std::abs(visibility(g, need_s - t, need_i - t, f, f, src.lambda_s_nm,
                                        src.lambda_i_nm));
        };
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = std::min(need_s, need_i), b = std::max(need_s, need_i);
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = merit(x1), f2 = merit(x2);
        while (b - a > 0.01) {
            if (f1 < f2) {
                b = x2; x2 = x1; f2 = f1;
                x1 = b - gr * (b - a); f1 = merit(x1);
            } else {
                a = x1; x1 = x2; f1 = f2;
                x2 = a + gr * (b - a); f2 = merit(x2);
            }
        }
        tau = 0.5 * (a + b);
    }
    out.tau_fs = tau;
    out.thickness_mm = tau / per_mm;
    out.residual_mismatch_fs = std::abs(need_s - need_i);
    if (out.thickness_mm < 0.0) {
        // opposite sign: same plate rotated 90 degrees
        out.thickness_mm = -out.thickness_mm;
        out.tau_fs = tau;
    }
    return out;
}

// ---------------------------------------------------------------------------
// tangle against precompensator delay (the temporal tuning curve)

struct DelayScanPoint {
    double delay_fs;
    double tangle;
};

// forward use of qstate would be circular; tangle of the X state with
// coherence v is |v|^2 (Wootters closed form, verified in the qstate tests)
inline std::vector<DelayScanPoint> tangle_vs_delay(const TwoCrystalSource& src,
                                                   const PumpSpec& pump,
                                                   const std::vector<double>& pc_delays_fs,
                                                   const SpectralFilter& filter,
                                                   double tau_sc_s_fs = 0.0,
                                                   double tau_sc_i_fs = 0.0) {
    const JtpaGrid g = jtpa(src, pump, {}, filter);
    const double dts = delta_t_dc(src, src.lambda_s_nm) + tau_sc_s_fs;
    const double dti = delta_t_dc(src, src.lambda_i_nm) + tau_sc_i_fs;
    std::vector<DelayScanPoint> curve;
    curve.reserve(pc_delays_fs.size());
    for (double tau : pc_delays_fs) {
        const cplx v = visibility(g, dts - tau, dti - tau, filter, filter, src.lambda_s_nm,
                                  src.lambda_i_nm);
        curve.push_back({tau, std::norm(v)});
    }
    return curve;
}

} // namespace spdc
