#pragma once

#include <cmath>

namespace magopt {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }

    // 90 degree counterclockwise rotation: (x,y) -> (-y,x).
    Vec2 perp() const { return {-y, x}; }

    Vec2 rotated(double alpha) const {
        const double c = std::cos(alpha);
        const double s = std::sin(alpha);
        return {c * x - s * y, s * x + c * y};
    }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

}  // namespace magopt
