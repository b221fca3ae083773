#pragma once

// Grain geometry: simple CCW polygons with exact signed distance, bounding
// radius, and mass properties. Shapes are immutable after construction.

#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cem/math.hpp"

namespace cem {

struct MassProperties {
    double mass = 0.0;     // kg
    double inertia = 0.0;  // kg m^2 about the COM
    Vec2 com;              // must be the origin after centering
};

namespace detail {

inline double polygon_signed_area(const std::vector<Vec2>& v) {
    double a = 0.0;
    for (size_t i = 0, n = v.size(); i < n; ++i) {
        const Vec2& p = v[i];
        const Vec2& q = v[(i + 1) % n];
        a += p.cross(q);
    }
    return 0.5 * a;
}

inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        return (q - p).cross(r - p);
    };
    const double o1 = orient(a, b, c);
    const double o2 = orient(a, b, d);
    const double o3 = orient(c, d, a);
    const double o4 = orient(c, d, b);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
}

}  // namespace detail

class Shape {
public:
    Shape(std::string name, std::vector<Vec2> vertices, double density)
        : name_(std::move(name)), vertices_(std::move(vertices)), density_(density) {
        if (vertices_.size() < 3)
            throw std::invalid_argument("Shape '" + name_ + "': needs >= 3 vertices");
        if (density_ <= 0.0)
            throw std::invalid_argument("Shape '" + name_ + "': density must be positive");
        const double area = detail::polygon_signed_area(vertices_);
        if (!(area > 1e-12))
            throw std::invalid_argument("Shape '" + name_ + "': polygon must be CCW with positive area");
        if (!is_simple())
            throw std::invalid_argument("Shape '" + name_ + "': polygon is self-intersecting");
        recenter(area);
        compute_mass_properties(area);
        bounding_radius_ = 0.0;
        for (const Vec2& p : vertices_)
            bounding_radius_ = std::max(bounding_radius_, p.norm());
    }

    const std::string& name() const { return name_; }
    const std::vector<Vec2>& vertices() const { return vertices_; }
    double density() const { return density_; }
    double bounding_radius() const { return bounding_radius_; }
    const MassProperties& mass_properties() const { return mass_props_; }

    // Exact signed distance to the polygon boundary in the body frame.
    // Negative inside (crossing-number parity).
    double sdf(const Vec2& p) const {
        double d2 = std::numeric_limits<double>::infinity();
        bool inside = false;
        const size_t n = vertices_.size();
        for (size_t i = 0, j = n - 1; i < n; j = i++) {
            const Vec2& vi = vertices_[i];
            const Vec2& vj = vertices_[j];
            const Vec2 e = vj - vi;
            const Vec2 w = p - vi;
            const double t = std::clamp(w.dot(e) / e.squared_norm(), 0.0, 1.0);
            d2 = std::min(d2, (w - e * t).squared_norm());
            // crossing test against the horizontal ray from p
            if ((vi.y > p.y) != (vj.y > p.y)) {
                const double xi = vi.x + (p.y - vi.y) / (vj.y - vi.y) * (vj.x - vi.x);
                if (p.x < xi) inside = !inside;
            }
        }
        const double d = std::sqrt(d2);
        return inside ? -d : d;
    }

private:
    bool is_simple() const {
        const size_t n = vertices_.size();
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = i + 1; j < n; ++j) {
                // skip shared-endpoint neighbors
                if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
                if (detail::segments_intersect(vertices_[i], vertices_[(i + 1) % n],
                                               vertices_[j], vertices_[(j + 1) % n]))
                    return false;
            }
        }
        return true;
    }

    void recenter(double area) {
        Vec2 c;
        const size_t n = vertices_.size();
        for (size_t i = 0; i < n; ++i) {
            const Vec2& p = vertices_[i];
            const Vec2& q = vertices_[(i + 1) % n];
            const double w = p.cross(q);
            c += (p + q) * w;
        }
        c *= 1.0 / (6.0 * area);
        for (Vec2& p : vertices_) p -= c;
    }

    void compute_mass_properties(double area) {
        mass_props_.mass = density_ * area;
        // second polar moment about the origin (= COM after recentering)
        double j = 0.0;
        const size_t n = vertices_.size();
        for (size_t i = 0; i < n; ++i) {
            const Vec2& p = vertices_[i];
            const Vec2& q = vertices_[(i + 1) % n];
            const double w = p.cross(q);
            j += w * (p.squared_norm() + p.dot(q) + q.squared_norm());
        }
        mass_props_.inertia = density_ * j / 12.0;
        mass_props_.com = Vec2{0.0, 0.0};
        if (!(mass_props_.mass > 0.0) || !(mass_props_.inertia > 0.0))
            throw std::invalid_argument("Shape '" + name_ + "': degenerate mass properties");
    }

    std::string name_;
    std::vector<Vec2> vertices_;
    double density_;
    double bounding_radius_ = 0.0;
    MassProperties mass_props_;
};

inline double sdf_eval(const Shape& s, const Vec2& p) { return s.sdf(p); }
inline double bounding_radius(const Shape& s) { return s.bounding_radius(); }
inline MassProperties mass_properties(const Shape& s) { return s.mass_properties(); }

// ---- generators ----

inline Shape make_box(const std::string& name, double width, double height, double density) {
    if (width <= 0.0 || height <= 0.0)
        throw std::invalid_argument("make_box: non-positive dimensions");
    const double hx = 0.5 * width, hy = 0.5 * height;
    return Shape(name, {{hx, -hy}, {hx, hy}, {-hx, hy}, {-hx, -hy}}, density);
}

inline Shape make_ngon(const std::string& name, int sides, double circumradius, double density) {
    if (sides < 3 || circumradius <= 0.0)
        throw std::invalid_argument("make_ngon: bad parameters");
    std::vector<Vec2> v;
    v.reserve(sides);
    for (int i = 0; i < sides; ++i) {
        const double a = 2.0 * kPi * i / sides;
        v.emplace_back(circumradius * std::cos(a), circumradius * std::sin(a));
    }
    return Shape(name, std::move(v), density);
}

// Annular arc sampled from a circle of the given radius. fraction in (0, 1];
// fraction = 1 yields a solid disc (the interior region is eliminated
// entirely, so no annulus is needed). The arc is symmetric about the +x axis
// so the recentered COM lands on that axis.
inline Shape make_arc(const std::string& name, double radius, double thickness, double fraction,
                      double density, int segments = 64) {
    if (radius <= 0.0 || thickness <= 0.0)
        throw std::invalid_argument("make_arc: non-positive dimensions");
    if (!(fraction > 0.0) || fraction > 1.0)
        throw std::invalid_argument("make_arc: fraction must be in (0, 1]");
    if (fraction >= 1.0)
        return make_ngon(name, std::max(segments, 64), radius, density);
    if (thickness >= radius)
        throw std::invalid_argument("make_arc: thickness must be < radius");
    const double half = fraction * kPi;
    const int n = std::max(8, static_cast<int>(segments * fraction));
    std::vector<Vec2> v;
    v.reserve(2 * (n + 1));
    for (int i = 0; i <= n; ++i) {  // outer rim, CCW
        const double a = -half + 2.0 * half * i / n;
        v.emplace_back(radius * std::cos(a), radius * std::sin(a));
    }
    const double rin = radius - thickness;
    for (int i = n; i >= 0; --i) {  // inner rim, back
        const double a = -half + 2.0 * half * i / n;
        v.emplace_back(rin * std::cos(a), rin * std::sin(a));
    }
    return Shape(name, std::move(v), density);
}

}  // namespace cem
