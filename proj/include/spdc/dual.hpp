#pragma once

#include <cmath>

namespace spdc {

// Scalar carrying first and second derivatives with respect to a single
// parameter.  Dispersion formulas evaluated on D2 yield n, dn/dx, d2n/dx2
// exactly (no finite differences), which feeds group velocity, GVD and
// walkoff derivatives.
struct D2 {
    double f = 0.0;  // value
    double d = 0.0;  // first derivative
    double dd = 0.0; // second derivative

    constexpr D2() = default;
    constexpr D2(double v) : f(v) {}
    constexpr D2(double v, double d1, double d2) : f(v), d(d1), dd(d2) {}

    static constexpr D2 variable(double v) { return {v, 1.0, 0.0}; }
};

constexpr D2 operator+(const D2& a, const D2& b) { return {a.f + b.f, a.d + b.d, a.dd + b.dd}; }
constexpr D2 operator-(const D2& a, const D2& b) { return {a.f - b.f, a.d - b.d, a.dd - b.dd}; }
constexpr D2 operator-(const D2& a) { return {-a.f, -a.d, -a.dd}; }

constexpr D2 operator*(const D2& a, const D2& b) {
    return {a.f * b.f, a.d * b.f + a.f * b.d, a.dd * b.f + 2.0 * a.d * b.d + a.f * b.dd};
}

constexpr D2 operator/(const D2& a, const D2& b) {
    const double q = a.f / b.f;
    const double dq = (a.d - q * b.d) / b.f;
    const double ddq = (a.dd - 2.0 * dq * b.d - q * b.dd) / b.f;
    return {q, dq, ddq};
}

inline D2 sqrt(const D2& a) {
    const double s = std::sqrt(a.f);
    const double ds = a.d / (2.0 * s);
    const double dds = (a.dd - 2.0 * ds * ds) / (2.0 * s);
    return {s, ds, dds};
}

inline D2 sin(const D2& a) {
    const double s = std::sin(a.f), c = std::cos(a.f);
    return {s, c * a.d, c * a.dd - s * a.d * a.d};
}

inline D2 cos(const D2& a) {
    const double s = std::sin(a.f), c = std::cos(a.f);
    return {c, -s * a.d, -s * a.dd - c * a.d * a.d};
}

constexpr D2 sqr(const D2& a) { return a * a; }

} // namespace spdc
