#pragma once

// SE(2) group operations, relative configurations and their Jacobians,
// and point velocities. Everything here is a pure function on value types.

#include "cem/math.hpp"

namespace cem {

// Rigid pose: rotation by theta followed by translation of the COM.
// theta is always stored wrapped to (-pi, pi].
struct Se2State {
    double theta = 0.0;
    Vec2 t;

    Se2State() = default;
    Se2State(double theta_, Vec2 t_) : theta(wrap_angle(theta_)), t(t_) {}
    Se2State(double theta_, double x, double y) : theta(wrap_angle(theta_)), t(x, y) {}

    static Se2State identity() { return {}; }

    Vec3 as_vec() const { return {{theta, t.x, t.y}}; }
};

struct Se2Velocity {
    double omega = 0.0;
    Vec2 v;

    Se2Velocity() = default;
    Se2Velocity(double omega_, Vec2 v_) : omega(omega_), v(v_) {}
    Se2Velocity(double omega_, double vx, double vy) : omega(omega_), v(vx, vy) {}

    Vec3 as_vec() const { return {{omega, v.x, v.y}}; }
};

// Group action: q(p) = R(theta) p + t.
inline Vec2 apply(const Se2State& q, const Vec2& p) {
    return rotate(q.theta, p) + q.t;
}

inline Se2State inverse(const Se2State& q) {
    return {-q.theta, rotate(-q.theta, -q.t)};
}

// compose(a, b)(p) = a(b(p))
inline Se2State compose(const Se2State& a, const Se2State& b) {
    return {wrap_angle(a.theta + b.theta), rotate(a.theta, b.t) + a.t};
}

// q_AB = q_A^{-1} q_B: theta_AB = wrap(theta_B - theta_A),
// t_AB = R(-theta_A)(x_B - x_A).
inline Se2State relative(const Se2State& qa, const Se2State& qb) {
    return {wrap_angle(qb.theta - qa.theta), rotate(-qa.theta, qb.t - qa.t)};
}

// Jacobians of relative(qa, qb) with respect to each body's (theta, x, y).
// Rows index (theta_AB, x_AB, y_AB).
struct RelJacobians {
    Mat3 wrt_a;  // J_A
    Mat3 wrt_b;  // J_B
};

inline RelJacobians rel_jacobians(const Se2State& qa, const Se2State& qb) {
    RelJacobians j;
    const double co = std::cos(qa.theta), si = std::sin(qa.theta);
    // R(-theta_A) = [[co, si], [-si, co]]
    j.wrt_b.m[0][0] = 1.0;
    j.wrt_b.m[1][1] = co;  j.wrt_b.m[1][2] = si;
    j.wrt_b.m[2][1] = -si; j.wrt_b.m[2][2] = co;

    j.wrt_a.m[0][0] = -1.0;
    j.wrt_a.m[1][1] = -co;  j.wrt_a.m[1][2] = -si;
    j.wrt_a.m[2][1] = si;   j.wrt_a.m[2][2] = -co;
    // d/dtheta_A [R(-theta_A) u] = -R(pi/2 - theta_A) u, u = x_B - x_A
    const Vec2 u = qb.t - qa.t;
    j.wrt_a.m[1][0] = -(si * u.x - co * u.y);   // -(R(pi/2-tA) u).x = -( sin tA... )
    j.wrt_a.m[2][0] = -(co * u.x + si * u.y);
    return j;
}

// v_p = v + omega R(pi/2)(p_world - x)
inline Vec2 point_velocity(const Se2State& q, const Se2Velocity& qdot, const Vec2& p_world) {
    return qdot.v + qdot.omega * (p_world - q.t).perp();
}

}  // namespace cem
