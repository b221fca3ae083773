#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace cem {

constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    // scalar 2D cross product: this.x*o.y - this.y*o.x
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::sqrt(x * x + y * y); }
    double squared_norm() const { return x * x + y * y; }

    Vec2 normalized() const {
        const double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
    // 90-degree counterclockwise rotation
    Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return {v.x * s, v.y * s}; }

struct Mat2 {
    // row-major
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    static Mat2 rotation(double angle) {
        const double co = std::cos(angle), si = std::sin(angle);
        return {co, -si, si, co};
    }
    Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
    Mat2 transpose() const { return {a, c, b, d}; }
};

inline Vec2 rotate(double angle, const Vec2& v) {
    const double co = std::cos(angle), si = std::sin(angle);
    return {co * v.x - si * v.y, si * v.x + co * v.y};
}

struct Vec3 {
    double v[3] = {0.0, 0.0, 0.0};
    double& operator[](int i) { return v[i]; }
    double operator[](int i) const { return v[i]; }
    Vec3 operator+(const Vec3& o) const { return {{v[0] + o.v[0], v[1] + o.v[1], v[2] + o.v[2]}}; }
    Vec3 operator-(const Vec3& o) const { return {{v[0] - o.v[0], v[1] - o.v[1], v[2] - o.v[2]}}; }
    Vec3 operator*(double s) const { return {{v[0] * s, v[1] * s, v[2] * s}}; }
    double dot(const Vec3& o) const { return v[0] * o.v[0] + v[1] * o.v[1] + v[2] * o.v[2]; }
};

struct Mat3 {
    double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};

    static Mat3 identity() {
        Mat3 r;
        r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
        return r;
    }
    Vec3 operator*(const Vec3& x) const {
        Vec3 r;
        for (int i = 0; i < 3; ++i)
            r[i] = m[i][0] * x[0] + m[i][1] * x[1] + m[i][2] * x[2];
        return r;
    }
    // adjoint action: returns M^T x
    Vec3 transpose_mul(const Vec3& x) const {
        Vec3 r;
        for (int j = 0; j < 3; ++j)
            r[j] = m[0][j] * x[0] + m[1][j] * x[1] + m[2][j] * x[2];
        return r;
    }
};

// Wraps an angle into (-pi, pi]. Exact multiples of pi map to +pi.
inline double wrap_angle(double theta) {
    double t = std::fmod(theta + kPi, 2.0 * kPi);
    if (t <= 0.0) t += 2.0 * kPi;
    return t - kPi;
}

inline bool is_finite(double v) { return std::isfinite(v); }
inline bool is_finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }

// Deterministic RNG: xoshiro-free, just splitmix-seeded mt19937_64 with a
// hand-rolled uniform so output does not depend on libstdc++'s distribution
// implementation.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    uint64_t next_u64() {
        // splitmix64
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    uint64_t uniform_index(uint64_t n) { return next_u64() % n; }

    double normal() {
        // Box-Muller; consumes two uniforms per pair, caches the second.
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        const double r = std::sqrt(-2.0 * std::log(u1));
        cached_ = r * std::sin(2.0 * kPi * u2);
        has_cached_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

private:
    uint64_t state_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

// FNV-1a, used to derive per-(pair, net) seeds from shape names.
inline uint64_t hash_string(const char* s) {
    uint64_t h = 1469598103934665603ull;
    for (; *s; ++s) {
        h ^= static_cast<uint64_t>(static_cast<unsigned char>(*s));
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace cem
