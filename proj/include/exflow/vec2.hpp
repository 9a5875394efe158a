#pragma once

#include <cmath>
#include <complex>

namespace exflow {

using Complex = std::complex<double>;

/// 2D point/vector in the physical or mapped plane.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}
    explicit Vec2(Complex z) : x(z.real()), y(z.imag()) {}

    Complex to_complex() const { return {x, y}; }

    /// Counterclockwise quarter turn: (x, y) -> (-y, x).
    constexpr Vec2 perp() const { return {-y, x}; }

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    constexpr bool operator==(const Vec2&) const = default;

    double norm2() const { return x * x + y * y; }
    double norm() const { return std::hypot(x, y); }
};

inline constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
inline constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

/// Row-major 2x2 real matrix applied to row vectors: v -> v * M.
struct Mat2 {
    double m00 = 0.0, m01 = 0.0;
    double m10 = 0.0, m11 = 0.0;

    constexpr Mat2 transpose() const { return {m00, m10, m01, m11}; }
    constexpr double det() const { return m00 * m11 - m01 * m10; }

    constexpr bool operator==(const Mat2&) const = default;
};

/// Row-vector application v * M.
inline constexpr Vec2 row_apply(Vec2 v, const Mat2& m) {
    return {v.x * m.m00 + v.y * m.m10, v.x * m.m01 + v.y * m.m11};
}

inline constexpr Mat2 matmul(const Mat2& a, const Mat2& b) {
    return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
            a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
}

}  // namespace exflow
