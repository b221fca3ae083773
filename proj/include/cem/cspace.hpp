#pragma once

// Ground-truth configuration-space contact queries. The distance between two
// shapes at a relative pose is recovered from the overlay objective
// E(x) = phiA(x) + phiB(x) + |phiA(x) - phiB(x)| = 2 max(phiA(x), phiB(x)),
// minimized over a 201x201 grid covering both bounding discs, with one
// 21x21 refinement pass over the winning cell.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cem/se2.hpp"
#include "cem/shape.hpp"

namespace cem {

struct HalfPlane {
    Vec2 normal;    // unit, material lies below {p : normal . p = offset}
    double offset = 0.0;

    HalfPlane() = default;
    HalfPlane(Vec2 n, double off) : normal(n.normalized()), offset(off) {}
};

struct ContactQuery {
    double d = 0.0;          // signed distance, negative = penetration
    Vec2 x_star;             // virtual contact point, world frame
    Vec2 n_world;            // unit contact normal, A -> B separation direction
    Vec3 grad_cfg;           // grad_{q_AB} d: (rotation, relative-frame translation)
    double proj_ra = 0.0;    // -r_A . n
    double proj_rb = 0.0;    //  r_B . n
    bool deep = false;       // d < -0.3 min(R_A, R_B): past the trustworthy range
};

inline constexpr int kOverlayGridN = 201;
inline constexpr int kRefineGridN = 21;

// Sampling objective of the virtual-contact-point search, exact-SDF form.
// phi_{q(B)}(x) = sdf_B(q_AB^{-1}(x)); the |phiA - phiB| term biases the
// minimizer toward locally balanced points, killing medial-axis ambiguity.
inline double overlay_objective(const Shape& a, const Shape& b, const Se2State& q_ab,
                                const Vec2& x) {
    const double pa = a.sdf(x);
    const double pb = b.sdf(apply(inverse(q_ab), x));
    return pa + pb + std::abs(pa - pb);
}

// Precomputed SDF samples of one shape on a regular grid around it; bilinear
// interpolation inside, exact polygon SDF fallback outside.
class SdfGrid {
public:
    explicit SdfGrid(const Shape& shape, int res = 512, double pad = 0.35)
        : shape_(shape), n_(res) {
        half_ = shape.bounding_radius() + pad;
        cell_ = 2.0 * half_ / (n_ - 1);
        inv_cell_ = 1.0 / cell_;
        data_.resize(static_cast<size_t>(n_) * n_);
        for (int j = 0; j < n_; ++j) {
            const double y = -half_ + j * cell_;
            for (int i = 0; i < n_; ++i) {
                const double x = -half_ + i * cell_;
                data_[static_cast<size_t>(j) * n_ + i] = static_cast<float>(shape.sdf({x, y}));
            }
        }
    }

    const Shape& shape() const { return shape_; }

    bool contains(const Vec2& p) const {
        const double m = half_ - cell_;
        return p.x >= -m && p.x <= m && p.y >= -m && p.y <= m;
    }

    // bilinear sample; caller must ensure contains(p)
    double sample(const Vec2& p) const {
        const double gx = (p.x + half_) * inv_cell_;
        const double gy = (p.y + half_) * inv_cell_;
        const int ix = static_cast<int>(gx);
        const int iy = static_cast<int>(gy);
        const double fx = gx - ix;
        const double fy = gy - iy;
        const float* row = &data_[static_cast<size_t>(iy) * n_ + ix];
        const double v00 = row[0], v10 = row[1];
        const double v01 = row[n_], v11 = row[n_ + 1];
        return (1.0 - fy) * (v00 + fx * (v10 - v00)) + fy * (v01 + fx * (v11 - v01));
    }

    double sample_or_exact(const Vec2& p) const {
        return contains(p) ? sample(p) : shape_.sdf(p);
    }

private:
    Shape shape_;  // owned copy: the grid must outlive any caller's shape
    int n_;
    double half_, cell_, inv_cell_;
    std::vector<float> data_;
};

// One shape pair's oracle. Holds the two (shareable) SDF grids.
class PairOracle {
public:
    PairOracle(std::shared_ptr<const SdfGrid> a, std::shared_ptr<const SdfGrid> b)
        : ga_(std::move(a)), gb_(std::move(b)) {}

    const Shape& shape_a() const { return ga_->shape(); }
    const Shape& shape_b() const { return gb_->shape(); }

    ContactQuery query(const Se2State& qa, const Se2State& qb) const {
        const Shape& sa = ga_->shape();
        const Shape& sb = gb_->shape();
        const double ra = sa.bounding_radius();
        const double rb = sb.bounding_radius();
        const Se2State q_ab = relative(qa, qb);
        const Se2State q_ba = inverse(q_ab);

        // scan domain: AABB of the union of the two bounding discs, A frame
        const Vec2 lo{std::min(-ra, q_ab.t.x - rb), std::min(-ra, q_ab.t.y - rb)};
        const Vec2 hi{std::max(ra, q_ab.t.x + rb), std::max(ra, q_ab.t.y + rb)};
        const double cx = (hi.x - lo.x) / (kOverlayGridN - 1);
        const double cy = (hi.y - lo.y) / (kOverlayGridN - 1);

        auto phi_a = [&](const Vec2& p) { return ga_->sample_or_exact(p); };
        auto phi_b = [&](const Vec2& p) { return gb_->sample_or_exact(apply(q_ba, p)); };

        // warm start at the midpoint of the center segment so the skip test
        // below engages from the first row
        Vec2 best_p = q_ab.t * 0.5;
        best_p.x = std::clamp(best_p.x, lo.x, hi.x);
        best_p.y = std::clamp(best_p.y, lo.y, hi.y);
        double best_m = std::max(phi_a(best_p), phi_b(best_p));
        bool best_is_grid = false;

        const double co = std::cos(q_ba.theta), si = std::sin(q_ba.theta);
        for (int j = 0; j < kOverlayGridN; ++j) {
            const double y = lo.y + j * cy;
            // B-frame coordinates walk linearly along the row
            double bx = co * lo.x - si * y + q_ba.t.x;
            double by = si * lo.x + co * y + q_ba.t.y;
            const double dbx = co * cx, dby = si * cx;
            for (int i = 0; i < kOverlayGridN; ++i, bx += dbx, by += dby) {
                const Vec2 p{lo.x + i * cx, y};
                double pa;
                if (ga_->contains(p)) {
                    pa = ga_->sample(p);
                } else {
                    // |p| - R lower-bounds the SDF outside the bounding circle
                    if (p.norm() - ra >= best_m) continue;
                    pa = sa.sdf(p);
                }
                if (pa >= best_m) continue;  // max(pa, pb) >= pa: cannot improve
                const Vec2 pbv{bx, by};
                double pb;
                if (gb_->contains(pbv)) {
                    pb = gb_->sample(pbv);
                } else {
                    if (pbv.norm() - rb >= best_m) continue;
                    pb = sb.sdf(pbv);
                }
                const double m = std::max(pa, pb);
                if (m < best_m) {
                    best_m = m;
                    best_p = p;
                    best_is_grid = true;
                }
            }
        }
        // tie-break note: the first strictly-better grid point wins, which is
        // the lowest row-major index among equal minima
        (void)best_is_grid;

        // refinement: 21x21 over the +-1-cell square around the winner
        Vec2 rlo{best_p.x - cx, best_p.y - cy};
        const double rcx = 2.0 * cx / (kRefineGridN - 1);
        const double rcy = 2.0 * cy / (kRefineGridN - 1);
        for (int j = 0; j < kRefineGridN; ++j) {
            for (int i = 0; i < kRefineGridN; ++i) {
                const Vec2 p{rlo.x + i * rcx, rlo.y + j * rcy};
                const double m = std::max(phi_a(p), phi_b(p));
                if (m < best_m) {
                    best_m = m;
                    best_p = p;
                }
            }
        }

        // reported quantities use exact SDFs at the refined point
        auto phi_a_exact = [&](const Vec2& p) { return sa.sdf(p); };

        auto phi_b_exact = [&](const Vec2& p) { return sb.sdf(apply(q_ba, p)); };
        ContactQuery out;
        out.d = phi_a_exact(best_p) + phi_b_exact(best_p);
        // normal from grad of phi_A at x*, central differences, one-cell step
        const Vec2 grad_a{(phi_a_exact({best_p.x + cx, best_p.y}) - phi_a_exact({best_p.x - cx, best_p.y})) / (2.0 * cx),
                          (phi_a_exact({best_p.x, best_p.y + cy}) - phi_a_exact({best_p.x, best_p.y - cy})) / (2.0 * cy)};
        const Vec2 n_rel = grad_a.normalized();
        out.n_world = rotate(qa.theta, n_rel);
        out.x_star = apply(qa, best_p);
        const Vec2 t_world = out.n_world.perp();
        out.grad_cfg = {{-(out.x_star - qb.t).dot(t_world), n_rel.x, n_rel.y}};
        out.proj_ra = -(out.x_star - qa.t).dot(out.n_world);
        out.proj_rb = (out.x_star - qb.t).dot(out.n_world);
        out.deep = out.d < -0.3 * std::min(ra, rb);
        return out;
    }

private:
    std::shared_ptr<const SdfGrid> ga_, gb_;
};

// Global grid cache keyed by shape name (shapes are immutable; a name
// identifies its geometry within one process).
class OracleCache {
public:
    static OracleCache& instance() {
        static OracleCache c;
        return c;
    }

    std::shared_ptr<const SdfGrid> grid_for(const Shape& s) {
        auto it = grids_.find(s.name());
        if (it != grids_.end()) return it->second;
        auto g = std::make_shared<SdfGrid>(s);
        grids_.emplace(s.name(), g);
        return g;
    }

    const PairOracle& oracle_for(const Shape& a, const Shape& b) {
        const std::string key = a.name() + "\x1f" + b.name();
        auto it = pairs_.find(key);
        if (it != pairs_.end()) return *it->second;
        auto p = std::make_unique<PairOracle>(grid_for(a), grid_for(b));
        return *pairs_.emplace(key, std::move(p)).first->second;
    }

private:
    std::map<std::string, std::shared_ptr<const SdfGrid>> grids_;
    std::map<std::string, std::unique_ptr<PairOracle>> pairs_;
};

inline ContactQuery query(const Shape& a, const Shape& b, const Se2State& qa, const Se2State& qb) {
    return OracleCache::instance().oracle_for(a, b).query(qa, qb);
}

// Analytic shape-vs-halfplane query; the plane plays the role of body A
// (normal points from the plane toward the body). The proj arms are computed
// from the deepest vertex projected onto the plane, so flat-face contact
// returns exactly offset - x_com . n regardless of which vertex wins.
// Vertex distances enter through a log-sum-exp softmin of width `tie_width`.
// A hard min has a bang-bang rotation gradient when a flat face rests on the
// plane (the winning corner alternates), which pumps a rocking chatter that
// ratchets tangentially near the friction-cone boundary. The softmin blends
// tied vertices smoothly: at a flat rest pose the virtual contact point is
// the face center and the rotation gradient crosses zero with a finite slope,
// giving a genuine stable equilibrium. At generic poses (nearest vertex
// clearly separated) every other term underflows and the result equals the
// hard min to machine precision; the gradient is exact for the smoothed
// distance everywhere.
inline ContactQuery query_halfplane(const Shape& s, const Se2State& q, const HalfPlane& h,
                                    double tie_width = 2e-3) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2& v : s.vertices())
        best = std::min(best, h.normal.dot(apply(q, v)) - h.offset);
    double acc = 0.0;
    Vec2 p_acc;
    for (const Vec2& v : s.vertices()) {
        const Vec2 p = apply(q, v);
        const double w = std::exp(-(h.normal.dot(p) - h.offset - best) / tie_width);
        acc += w;
        p_acc += p * w;
    }
    const Vec2 x_soft = p_acc * (1.0 / acc);

    ContactQuery out;
    out.d = best - tie_width * std::log(acc);
    out.n_world = h.normal;
    out.x_star = x_soft;
    const Vec2 t_world = h.normal.perp();
    out.grad_cfg = {{-(x_soft - q.t).dot(t_world), h.normal.x, h.normal.y}};
    const Vec2 on_plane = x_soft - h.normal * (h.normal.dot(x_soft) - h.offset);
    out.proj_ra = 0.0;  // the plane has no meaningful COM
    out.proj_rb = (on_plane - q.t).dot(h.normal);
    out.deep = out.d < -0.3 * s.bounding_radius();
    return out;
}

// Central finite differences of query(...).d with respect to q_B. Test-side
// oracle for the analytic gradient assembly; only meaningful in the smooth
// single-contact regime.
inline Vec3 grad_fd_check(const Shape& a, const Shape& b, const Se2State& qa, const Se2State& qb,
                          double step = 0.01) {
    Vec3 g;
    for (int k = 0; k < 3; ++k) {
        Vec3 qv = qb.as_vec();
        qv[k] += step;
        const double dp = query(a, b, qa, Se2State(qv[0], qv[1], qv[2])).d;
        qv[k] -= 2.0 * step;
        const double dm = query(a, b, qa, Se2State(qv[0], qv[1], qv[2])).d;
        g[k] = (dp - dm) / (2.0 * step);
    }
    return g;
}

}  // namespace cem
