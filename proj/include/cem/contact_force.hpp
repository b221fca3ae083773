#pragma once

// Narrow-phase force law: penalty normal force with viscous damping plus a
// spring-dashpot tangential friction model with stick/slip cone projection.
// Produces generalized forces (torque, force) for both bodies of a contact.

#include "cem/cspace.hpp"
#include "cem/se2.hpp"

namespace cem {

struct ContactParams {
    double k_n = 1e4;
    double k_t = 5e3;
    double gamma_n = 0.0;
    double gamma_t = 0.0;
    double mu = 0.3;
};

struct ContactPairState {
    double s = 0.0;  // tangential spring length, signed
    long age = 0;    // steps since creation
};

// ordered (torque, fx, fy) to match the (theta, x, y) state layout
struct GeneralizedForce {
    double torque = 0.0;
    double fx = 0.0;
    double fy = 0.0;

    GeneralizedForce& operator+=(const GeneralizedForce& o) {
        torque += o.torque;
        fx += o.fx;
        fy += o.fy;
        return *this;
    }
};

struct ContactForces {
    GeneralizedForce on_a;
    GeneralizedForce on_b;
    ContactPairState state;
    // instrumentation for cone checks and tests
    double f_n_tot = 0.0;
    double f_t = 0.0;
    Vec2 n_w;
    Vec2 t_w;
};

// Spring-shortening factor putting the tangential force exactly on the cone
// boundary: |-k_t (lambda s) - 1/2 gamma_t v_t| = mu |f_n_tot|, clamped [0,1].
// Only called when the trial force exceeds the cone and the viscous part
// alone does not (so s != 0).
inline double project_factor(double s, double v_t, double k_t, double gamma_t, double mu,
                             double f_n_tot) {
    const double f_max = mu * std::abs(f_n_tot);
    const double trial = -k_t * s - 0.5 * gamma_t * v_t;
    const double sgn = trial < 0.0 ? -1.0 : 1.0;
    if (s == 0.0) throw std::logic_error("project_factor: zero spring with super-cone trial");
    const double lambda = -(sgn * f_max + 0.5 * gamma_t * v_t) / (k_t * s);
    return std::clamp(lambda, 0.0, 1.0);
}

inline ContactForces contact_force(double d, const Se2State& qa, const Se2State& qb,
                                   const Se2Velocity& va, const Se2Velocity& vb,
                                   const Vec3& grad_cfg, double proj_ra, double proj_rb,
                                   const ContactParams& params, ContactPairState state,
                                   double dt) {
    for (double x : {d, grad_cfg[0], grad_cfg[1], grad_cfg[2], proj_ra, proj_rb, state.s,
                     va.omega, va.v.x, va.v.y, vb.omega, vb.v.x, vb.v.y})
        if (!std::isfinite(x)) throw std::invalid_argument("contact_force: non-finite input");

    ContactForces out;
    out.state = state;
    out.state.age += 1;

    // frames: normalize the translation part of the configuration gradient
    const Vec2 n_rel{grad_cfg[1], grad_cfg[2]};
    const double nn = n_rel.norm();
    if (nn < 1e-12) return out;  // degenerate multi-contact gradient: no force
    Vec3 n_cfg{{grad_cfg[0], n_rel.x / nn, n_rel.y / nn}};
    out.n_w = rotate(qa.theta, {n_cfg[1], n_cfg[2]});
    out.t_w = out.n_w.perp();

    // normal: adjoint Jacobians map the c-space gradient to each body's frame
    const RelJacobians jac = rel_jacobians(qa, qb);
    const Vec3 ga = jac.wrt_a.transpose_mul(n_cfg);
    const Vec3 gb = jac.wrt_b.transpose_mul(n_cfg);
    const double v_n = ga[0] * va.omega + ga[1] * va.v.x + ga[2] * va.v.y +
                       gb[0] * vb.omega + gb[1] * vb.v.x + gb[2] * vb.v.y;
    out.f_n_tot = params.k_n * std::abs(d) - 0.5 * params.gamma_n * v_n;
    out.on_a = {out.f_n_tot * ga[0], out.f_n_tot * ga[1], out.f_n_tot * ga[2]};
    out.on_b = {out.f_n_tot * gb[0], out.f_n_tot * gb[1], out.f_n_tot * gb[2]};

    // tangential spring-dashpot with cone projection
    const double v_t =
        out.t_w.dot(vb.v - va.v) + proj_rb * vb.omega + proj_ra * va.omega;
    out.state.s += v_t * dt;
    const double trial = -params.k_t * out.state.s - 0.5 * params.gamma_t * v_t;
    const double f_max = params.mu * std::abs(out.f_n_tot);
    if (0.5 * params.gamma_t * std::abs(v_t) > f_max) {
        out.state.s = 0.0;  // slip: the dashpot alone saturates the cone
        out.f_t = (v_t < 0.0 ? 1.0 : -1.0) * f_max;
    } else if (std::abs(trial) > f_max) {
        const double lambda = project_factor(out.state.s, v_t, params.k_t, params.gamma_t,
                                             params.mu, out.f_n_tot);
        out.state.s *= lambda;
        out.f_t = -params.k_t * out.state.s - 0.5 * params.gamma_t * v_t;
    } else {
        out.f_t = trial;
    }

    const double tau_a = -proj_ra * out.f_t;
    const double tau_b = -proj_rb * out.f_t;
    out.on_a += {-tau_a, -out.f_t * out.t_w.x, -out.f_t * out.t_w.y};
    out.on_b += {-tau_b, out.f_t * out.t_w.x, out.f_t * out.t_w.y};
    return out;
}

}  // namespace cem
