#pragma once

#include <stdexcept>
#include <string>

namespace spdc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// bad call-site input (NaN, negative length, unknown name, ...)
struct ArgumentError : Error {
    using Error::Error;
};

/// input outside the validity of the physical model (wavelength out of
/// transparency range, evanescent geometry, ...)
struct DomainError : Error {
    using Error::Error;
};

/// a numeric procedure failed; carries the residual it got stuck at
struct NumericError : Error {
    double residual;
    NumericError(const std::string& msg, double res) : Error(msg), residual(res) {}
};

/// requested phasematching has no real solution; carries the closest miss
struct NotPhasematchable : DomainError {
    double best_angle_rad;
    double residual_per_mm;
    NotPhasematchable(const std::string& msg, double best, double res)
        : DomainError(msg), best_angle_rad(best), residual_per_mm(res) {}
};

/// frequency grid cannot hold the amplitude at the requested truncation
struct GridError : Error {
    double suggested_halfwidth_s;
    double suggested_halfwidth_i;
    GridError(const std::string& msg, double hs, double hi)
        : Error(msg), suggested_halfwidth_s(hs), suggested_halfwidth_i(hi) {}
};

/// malformed configuration or data file
struct ConfigError : Error {
    using Error::Error;
};

} // namespace spdc
