#pragma once

// The time-stepping world: body storage, broad phase, persistent contact-pair
// cache, pluggable narrow-phase backends, force accumulation, and
// semi-implicit Euler integration.

#include <functional>
#include <optional>

#include "cem/contact_force.hpp"
#include "cem/contact_map.hpp"
#include "cem/cspace.hpp"
#include "cem/spatial_hash.hpp"

namespace cem {

enum class BodyKind { dynamic, fixed, kinematic };
enum class Backend { oracle, neural };

// pose is an exact closed-form function of time
struct KinematicScript {
    enum class Type { none, spin, slide };
    Type type = Type::none;
    Vec2 pivot;           // spin: world pivot
    double omega = 0.0;   // spin rate
    Vec2 vel;             // slide velocity
    double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();

    Se2State pose_at(const Se2State& base, double t) const {
        const double tau = std::clamp(t, t0, t1) - t0;
        switch (type) {
            case Type::spin: {
                const double a = omega * tau;
                return {base.theta + a, pivot + rotate(a, base.t - pivot)};
            }
            case Type::slide:
                return {base.theta, base.t + vel * tau};
            case Type::none:
                return base;
        }
        return base;
    }

    Se2Velocity velocity_at(const Se2State& pose, double t) const {
        if (t < t0 || t >= t1) return {};
        switch (type) {
            case Type::spin:
                return {omega, (pose.t - pivot).perp() * omega};
            case Type::slide:
                return {0.0, vel};
            case Type::none:
                return {};
        }
        return {};
    }
};

struct Body {
    const Shape* shape = nullptr;
    Se2State q;
    Se2Velocity v;
    BodyKind kind = BodyKind::dynamic;
    KinematicScript script;
    Se2State script_base;  // pose at t = 0 for kinematic bodies

    double mass() const { return shape->mass_properties().mass; }
    double inertia() const { return shape->mass_properties().inertia; }
    double radius() const { return shape->bounding_radius(); }
};

struct WorldParams {
    double dt = 1e-3;
    Vec2 gravity{0.0, -9.8};
    ContactParams contact;
    Backend backend = Backend::oracle;
    double broadphase_margin = 0.3;
    double eviction_margin = 0.05;   // spring survives separations below this
    double cache_trust_radius = 5e-3;  // narrow-phase first-order reuse radius
};

// per-contact instrumentation record (cone checks, penetration stats)
struct ContactEvent {
    int body_a = 0;          // -1-k for halfplane k in the A role
    int body_b = 0;
    double d = 0.0;
    double f_n_tot = 0.0;
    double f_t = 0.0;
};

class World {
public:
    WorldParams params;
    std::vector<Body> bodies;
    std::vector<HalfPlane> halfplanes;
    std::map<std::pair<std::string, std::string>, NeuralContactMap> neural_maps;
    std::function<void(const ContactEvent&)> observer;

    double time = 0.0;
    long step_count = 0;
    double last_max_penetration = 0.0;

    void step() {
        const double dt = params.dt;
        std::vector<GeneralizedForce> acc(bodies.size());
        for (size_t i = 0; i < bodies.size(); ++i) {
            if (bodies[i].kind != BodyKind::dynamic) continue;
            acc[i].fx += bodies[i].mass() * params.gravity.x;
            acc[i].fy += bodies[i].mass() * params.gravity.y;
        }

        last_max_penetration = 0.0;
        for (auto& [key, entry] : pair_cache_) entry.visited = false;

        // body-body contacts
        std::vector<BroadPhaseEntry> bp(bodies.size());
        for (size_t i = 0; i < bodies.size(); ++i)
            bp[i] = {bodies[i].q.t, bodies[i].radius(), bodies[i].kind != BodyKind::fixed};
        for (const auto& [i, j] : broad_phase(bp, params.broadphase_margin)) {
            // canonical roles: A is the lexically smaller shape name, so a
            // single oracle/map per unordered shape pair serves both orders
            int ia = i, ib = j;
            if (bodies[ib].shape->name() < bodies[ia].shape->name()) std::swap(ia, ib);
            const auto nq = narrow_phase(ia, ib);
            apply_contact({i, j}, ia, ib, nq, acc);
        }

        // body-halfplane contacts (always analytic)
        for (size_t i = 0; i < bodies.size(); ++i) {
            if (bodies[i].kind == BodyKind::fixed) continue;
            for (size_t k = 0; k < halfplanes.size(); ++k) {
                const auto q = query_halfplane(*bodies[i].shape, bodies[i].q, halfplanes[k]);
                const int plane_id = -1 - static_cast<int>(k);
                apply_contact({static_cast<int>(i), plane_id}, plane_id, static_cast<int>(i),
                              {q.d, q.grad_cfg, q.proj_ra, q.proj_rb}, acc);
            }
        }

        evict_stale_pairs();

        // semi-implicit Euler + scripted poses
        const double t_next = time + dt;
        for (size_t i = 0; i < bodies.size(); ++i) {
            Body& b = bodies[i];
            switch (b.kind) {
                case BodyKind::fixed:
                    b.v = {};
                    break;
                case BodyKind::kinematic:
                    b.q = b.script.pose_at(b.script_base, t_next);
                    b.v = b.script.velocity_at(b.q, t_next);
                    break;
                case BodyKind::dynamic: {
                    b.v.omega += dt * acc[i].torque / b.inertia();
                    b.v.v.x += dt * acc[i].fx / b.mass();
                    b.v.v.y += dt * acc[i].fy / b.mass();
                    b.q = Se2State(b.q.theta + dt * b.v.omega, b.q.t + b.v.v * dt);
                    break;
                }
            }
            if (!std::isfinite(b.q.theta) || !std::isfinite(b.q.t.x) || !std::isfinite(b.q.t.y) ||
                !std::isfinite(b.v.omega) || !std::isfinite(b.v.v.x) || !std::isfinite(b.v.v.y))
                throw std::runtime_error("non-finite state for body " + std::to_string(i) +
                                         " at step " + std::to_string(step_count) + " (t=" +
                                         std::to_string(time) + ")");
        }
        time = t_next;
        ++step_count;
    }

    double kinetic_energy() const {
        double e = 0.0;
        for (const auto& b : bodies) {
            if (b.kind != BodyKind::dynamic) continue;
            e += 0.5 * b.mass() * b.v.v.dot(b.v.v) + 0.5 * b.inertia() * b.v.omega * b.v.omega;
        }
        return e;
    }

    Vec2 linear_momentum() const {
        Vec2 p;
        for (const auto& b : bodies)
            if (b.kind == BodyKind::dynamic) p += b.v.v * b.mass();
        return p;
    }

    const NeuralContactMap& map_for(const std::string& sa, const std::string& sb) const {
        const auto it = neural_maps.find({sa, sb});
        if (it == neural_maps.end())
            throw std::runtime_error("no neural contact map for pair " + sa + "/" + sb);
        return it->second;
    }

    size_t cached_pair_count() const { return pair_cache_.size(); }

private:
    // reduced narrow-phase result: everything contact_force needs
    struct NarrowResult {
        double d = 0.0;
        Vec3 grad_cfg;
        double proj_ra = 0.0, proj_rb = 0.0;
    };

    struct PairEntry {
        ContactPairState spring;
        bool visited = false;
        // cached oracle query, first-order-extrapolated within the trust radius
        bool has_query = false;
        Se2State q_rel_ref;
        NarrowResult ref;
    };

    std::map<std::pair<int, int>, PairEntry> pair_cache_;

    NarrowResult narrow_phase(int ia, int ib) {
        const Body& a = bodies[ia];
        const Body& b = bodies[ib];
        const Se2State q_rel = relative(a.q, b.q);
        if (params.backend == Backend::neural) {
            // fixed-involved pairs without a trained map fall back to the
            // oracle; scene validation guarantees maps for dynamic pairs
            const auto it = neural_maps.find({a.shape->name(), b.shape->name()});
            if (it != neural_maps.end()) {
                const auto e = it->second.evaluate(q_rel);
                return {e.d, {{e.grad_theta, e.n_a_frame.x, e.n_a_frame.y}}, e.proj_ra,
                        e.proj_rb};
            }
            if (a.kind != BodyKind::fixed && b.kind != BodyKind::fixed)
                throw std::runtime_error("no neural contact map for pair " + a.shape->name() +
                                         "/" + b.shape->name());
        }
        // oracle backend with first-order reuse
        PairEntry& entry = pair_cache_[{std::min(ia, ib), std::max(ia, ib)}];
        const auto delta = [&]() {
            const double dth = wrap_angle(q_rel.theta - entry.q_rel_ref.theta);
            return std::sqrt(dth * dth + (q_rel.t - entry.q_rel_ref.t).dot(q_rel.t -
                                                                           entry.q_rel_ref.t));
        };
        if (!entry.has_query || delta() > params.cache_trust_radius) {
            const ContactQuery q = query(*a.shape, *b.shape, a.q, b.q);
            entry.has_query = true;
            entry.q_rel_ref = q_rel;
            entry.ref = {q.d, q.grad_cfg, q.proj_ra, q.proj_rb};
            return entry.ref;
        }
        NarrowResult r = entry.ref;
        const double dth = wrap_angle(q_rel.theta - entry.q_rel_ref.theta);
        const Vec2 dt_rel = q_rel.t - entry.q_rel_ref.t;
        r.d += r.grad_cfg[0] * dth + r.grad_cfg[1] * dt_rel.x + r.grad_cfg[2] * dt_rel.y;
        return r;
    }

    void apply_contact(std::pair<int, int> cache_key, int ia, int ib, const NarrowResult& nq,
                       std::vector<GeneralizedForce>& acc) {
        auto canon = [](std::pair<int, int> k) {
            return std::make_pair(std::min(k.first, k.second), std::max(k.first, k.second));
        };
        PairEntry& entry = pair_cache_[canon(cache_key)];
        entry.visited = true;
        if (nq.d >= params.eviction_margin) {
            entry.spring = {};  // separation past the grace band kills the spring
            return;
        }
        if (nq.d >= 0.0) return;  // grace band: spring alive, no force

        last_max_penetration = std::max(last_max_penetration, -nq.d);
        const bool a_is_plane = ia < 0;
        const Se2State qa = a_is_plane ? Se2State() : bodies[ia].q;
        const Se2Velocity va = a_is_plane ? Se2Velocity() : bodies[ia].v;
        const auto r = contact_force(nq.d, qa, bodies[ib].q, va, bodies[ib].v, nq.grad_cfg,
                                     nq.proj_ra, nq.proj_rb, params.contact, entry.spring,
                                     params.dt);
        entry.spring = r.state;
        if (!a_is_plane && bodies[ia].kind == BodyKind::dynamic) acc[ia] += r.on_a;
        if (bodies[ib].kind == BodyKind::dynamic) acc[ib] += r.on_b;
        if (observer) observer({ia, ib, nq.d, r.f_n_tot, r.f_t});
    }

    void evict_stale_pairs() {
        for (auto it = pair_cache_.begin(); it != pair_cache_.end();) {
            bool drop = false;
            if (!it->second.visited) {
                const auto [i, j] = it->first;
                if (i >= 0) {
                    const double gap = (bodies[i].q.t - bodies[j].q.t).norm() -
                                       bodies[i].radius() - bodies[j].radius();
                    drop = gap > params.eviction_margin;
                } else {
                    drop = true;  // halfplane pairs are re-tested every step
                }
            }
            it = drop ? pair_cache_.erase(it) : ++it;
        }
    }
};

}  // namespace cem
