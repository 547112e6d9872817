#pragma once

#include <array>
#include <cmath>

namespace xpcs {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(Vec3 const& a, Vec3 const& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(Vec3 const& a, Vec3 const& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, Vec3 const& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(Vec3 const& a, Vec3 const& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(Vec3 const& a) { return std::sqrt(dot(a, a)); }

inline Vec3 cross(Vec3 const& a, Vec3 const& b)
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

/// Wrap a coordinate into [0, L).
inline double wrap(double x, double L)
{
    double w = x - L * std::floor(x / L);
    // floor can leave w == L for tiny negative x
    return w >= L ? w - L : w;
}

inline Vec3 wrap(Vec3 const& r, double L) { return {wrap(r[0], L), wrap(r[1], L), wrap(r[2], L)}; }

} // namespace xpcs
