// vec.hpp — 3-vector and quaternion primitives shared by all modules.
#pragma once

#include <cmath>

namespace sbr {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
inline Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
inline Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
inline Vec3 operator*(Vec3 a, double s) { return a *= s; }
inline Vec3 operator*(double s, Vec3 a) { return a *= s; }
inline Vec3 operator/(Vec3 a, double s) { return a *= (1.0 / s); }
inline bool operator==(const Vec3& a, const Vec3& b) { return a.x == b.x && a.y == b.y && a.z == b.z; }
inline bool operator!=(const Vec3& a, const Vec3& b) { return !(a == b); }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }
inline Vec3 normalized(const Vec3& a) { return a / norm(a); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

inline bool is_finite(const Vec3& a) {
    return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

// Tangent/bitangent frame around a unit vector n (Duff et al. branchless construction).
inline void orthonormal_basis(const Vec3& n, Vec3& t, Vec3& b) {
    const double sign = std::copysign(1.0, n.z);
    const double a = -1.0 / (sign + n.z);
    const double c = n.x * n.y * a;
    t = {1.0 + sign * n.x * n.x * a, sign * c, -sign * n.x};
    b = {c, sign + n.y * n.y * a, -n.y};
}

// Unit quaternion, scalar-first.
struct Quat {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;
};

inline double dot(const Quat& a, const Quat& b) {
    return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
}

inline double norm(const Quat& q) { return std::sqrt(dot(q, q)); }

inline Quat normalized(const Quat& q) {
    const double n = norm(q);
    return {q.w / n, q.x / n, q.y / n, q.z / n};
}

inline Quat axis_angle(const Vec3& axis, double angle_rad) {
    const Vec3 u = normalized(axis);
    const double h = 0.5 * angle_rad;
    const double s = std::sin(h);
    return {std::cos(h), u.x * s, u.y * s, u.z * s};
}

// Rotate v by unit quaternion q: v + 2 qv x (qv x v + w v).
inline Vec3 rotate(const Quat& q, const Vec3& v) {
    const Vec3 qv{q.x, q.y, q.z};
    const Vec3 t = 2.0 * cross(qv, v);
    return v + q.w * t + cross(qv, t);
}

// Shortest-arc spherical interpolation; falls back to nlerp for nearly parallel inputs.
inline Quat slerp(const Quat& a, Quat b, double s) {
    double d = dot(a, b);
    if (d < 0.0) {
        b = {-b.w, -b.x, -b.y, -b.z};
        d = -d;
    }
    if (d > 1.0 - 1e-10) {
        return normalized(Quat{a.w + s * (b.w - a.w), a.x + s * (b.x - a.x),
                               a.y + s * (b.y - a.y), a.z + s * (b.z - a.z)});
    }
    const double theta = std::acos(d);
    const double inv_sin = 1.0 / std::sin(theta);
    const double wa = std::sin((1.0 - s) * theta) * inv_sin;
    const double wb = std::sin(s * theta) * inv_sin;
    return {wa * a.w + wb * b.w, wa * a.x + wb * b.x, wa * a.y + wb * b.y, wa * a.z + wb * b.z};
}

} // namespace sbr
