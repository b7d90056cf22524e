#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <vector>

#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc {

using Matrix4c = Eigen::Matrix4cd;
using cplxd = std::complex<double>;

// Two-qubit polarization density matrix over the basis {HH, HV, VH, VV}.
struct TwoQubitState {
    Matrix4c rho = Matrix4c::Zero();

    void validate(double herm_tol = 1e-12, double trace_tol = 1e-12, double psd_tol = 1e-10) const {
        const Matrix4c diff = rho - rho.adjoint();
        if (diff.cwiseAbs().maxCoeff() > herm_tol) throw NumericError("rho not Hermitian", diff.cwiseAbs().maxCoeff());
        if (std::abs(rho.trace().real() - 1.0) > trace_tol || std::abs(rho.trace().imag()) > trace_tol)
            throw NumericError("rho trace != 1", std::abs(rho.trace().real() - 1.0));
        Eigen::SelfAdjointEigenSolver<Matrix4c> es(0.5 * (rho + rho.adjoint()));
        if (es.eigenvalues().minCoeff() < -psd_tol)
            throw NumericError("rho not positive semidefinite", es.eigenvalues().minCoeff());
    }
};

/// |psi(phi)> = (|HH> + e^{i phi} |VV>) / sqrt(2)
inline Eigen::Vector4cd bell_phi(double phi_rad) {
    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    v(0) = 1.0 / std::sqrt(2.0);
    v(3) = std::exp(cplxd(0.0, phi_rad)) / std::sqrt(2.0);
    return v;
}

/// trace over emission direction: rho = sum_k w_k |psi(phi_k)><psi(phi_k)|
inline TwoQubitState rho_spatial(const std::vector<double>& phases_rad,
                                 const std::vector<double>& weights = {}) {
    if (phases_rad.empty()) throw ArgumentError("rho_spatial needs at least one phase sample");
    std::vector<double> w = weights;
    if (w.empty()) w.assign(phases_rad.size(), 1.0 / double(phases_rad.size()));
    if (w.size() != phases_rad.size()) throw ArgumentError("weights/samples size mismatch");
    double wsum = 0.0;
    for (double x : w) {
        if (x < 0.0) throw ArgumentError("weights must be >= 0");
        wsum += x;
    }
    if (!(wsum > 0.0)) throw ArgumentError("weights sum to zero");

    cplxd mean_phase(0.0, 0.0); // <e^{-i phi}>
    for (size_t k = 0; k < phases_rad.size(); ++k)
        mean_phase += w[k] / wsum * std::exp(cplxd(0.0, -phases_rad[k]));

    TwoQubitState s;
    s.rho(0, 0) = 0.5;
    s.rho(3, 3) = 0.5;
    s.rho(0, 3) = 0.5 * mean_phase;
    s.rho(3, 0) = std::conj(s.rho(0, 3));
    return s;
}

/// trace over the time variable: X state with coherence v
inline TwoQubitState rho_temporal(cplxd v) {
    if (std::abs(v) > 1.0 + 1e-12) throw ArgumentError("|v| must be <= 1");
    TwoQubitState s;
    s.rho(0, 0) = 0.5;
    s.rho(3, 3) = 0.5;
    s.rho(0, 3) = 0.5 * v;
    s.rho(3, 0) = std::conj(s.rho(0, 3));
    return s;
}

/// spatial and spectral-temporal dephasing factorize to first order:
/// coherence = v/2 <e^{-i phi}>
inline TwoQubitState rho_combined(const std::vector<double>& phases_rad, cplxd v,
                                  const std::vector<double>& weights = {}) {
    TwoQubitState s = rho_spatial(phases_rad, weights);
    s.rho(0, 3) *= v;
    s.rho(3, 0) = std::conj(s.rho(0, 3));
    return s;
}

/// F = <psi| rho |psi>
inline double fidelity(const TwoQubitState& s, const Eigen::Vector4cd& target) {
    const cplxd f = target.adjoint() * s.rho * target;
    if (std::abs(f.imag()) > 1e-12) throw NumericError("fidelity not real", f.imag());
    return f.real();
}

struct EntanglementMeasures {
    double concurrence;
    double tangle;
};

/// Wootters concurrence from the eigenvalues of rho (sy x sy) rho* (sy x sy)
inline EntanglementMeasures concurrence_tangle(const TwoQubitState& s) {
    s.validate(1e-9, 1e-9, 1e-8);
    Matrix4c yy = Matrix4c::Zero();
    // sigma_y x sigma_y in the {HH, HV, VH, VV} basis
    yy(0, 3) = -1.0;
    yy(1, 2) = 1.0;
    yy(2, 1) = 1.0;
    yy(3, 0) = -1.0;
    const Matrix4c R = s.rho * yy * s.rho.conjugate() * yy;
    Eigen::ComplexEigenSolver<Matrix4c> es(R);
    std::array<double, 4> lam{};
    for (int i = 0; i < 4; ++i) lam[static_cast<size_t>(i)] = std::max(0.0, es.eigenvalues()(i).real());
    std::sort(lam.begin(), lam.end(), std::greater<>());
    const double c = std::max(0.0, std::sqrt(lam[0]) - std::sqrt(lam[1]) - std::sqrt(lam[2]) -
                                       std::sqrt(lam[3]));
    return {c, c * c};
}

/// arg <HH| rho |VV> in degrees; what a reconstructed phase map reports
inline double state_phase_deg(const TwoQubitState& s) {
    const cplxd coh = s.rho(0, 3);
    if (std::abs(coh) < 1e-9) throw DomainError("coherence too small, phase undefined");
    return rad2deg(std::arg(coh));
}

/// best fidelity over the family (|HH> + e^{i phi}|VV>)/sqrt(2):
/// F = (rho_HH,HH + rho_VV,VV)/2 + |rho_HH,VV|
inline double fidelity_max_entangled(const TwoQubitState& s) {
    return 0.5 * (s.rho(0, 0).real() + s.rho(3, 3).real()) + std::abs(s.rho(0, 3));
}

} // namespace spdc
