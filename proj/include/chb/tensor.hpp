#pragma once

#include <cmath>

namespace chb {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// Small dense 2x2 tensor, row-major components.
struct Mat2 {
    double xx = 0.0, xy = 0.0;
    double yx = 0.0, yy = 0.0;

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 outer(const Vec2& a, const Vec2& b) {
        return {a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y};
    }

    Mat2 operator+(const Mat2& o) const { return {xx + o.xx, xy + o.xy, yx + o.yx, yy + o.yy}; }
    Mat2 operator-(const Mat2& o) const { return {xx - o.xx, xy - o.xy, yx - o.yx, yy - o.yy}; }
    Mat2 operator*(double s) const { return {xx * s, xy * s, yx * s, yy * s}; }
    Vec2 operator*(const Vec2& v) const { return {xx * v.x + xy * v.y, yx * v.x + yy * v.y}; }

    double trace() const { return xx + yy; }
    Mat2 transpose() const { return {xx, yx, xy, yy}; }
    Mat2 sym() const { return {xx, 0.5 * (xy + yx), 0.5 * (xy + yx), yy}; }
    /// Double contraction A : B.
    double ddot(const Mat2& o) const { return xx * o.xx + xy * o.xy + yx * o.yx + yy * o.yy; }
    double frobenius_norm() const { return std::sqrt(ddot(*this)); }
};

inline Mat2 operator*(double s, const Mat2& m) { return m * s; }

} // namespace chb
