#pragma once

#include <array>

#include "tdcr/config.hpp"
#include "tdcr/types.hpp"

namespace tdcr {

// Joint positions p_0..p_24 of the planar chain (p_0 is the base, p_{j+1}
// is the end of link j, where its point mass sits).
std::array<Vec2, kNumJoints + 1> joint_positions(const Vec24& q,
                                                 const ContinuumModel& model);

inline Vec2 tip_position(const Vec24& q, const ContinuumModel& model) {
  return joint_positions(q, model)[kNumJoints];
}

// Drawn-in tendon displacement (dl_0, dl_1) relative to the undeformed
// configuration. Antagonistic routing with shared moment arms:
// dl_0 = sum_j d_j q_j, dl_1 = -dl_0.
Vec2 tendon_lengths(const Vec24& q, const ContinuumModel& model);

// J_f = d(dl)/dq. Constant under the constant-moment-arm routing; tests
// check the general contract J_f = d(dl)/dq by central finite differences.
Jac2x24 tendon_jacobian(const Vec24& q, const ContinuumModel& model);

struct DynamicsTerms {
  Mat24 M;   // generalized mass matrix
  Vec24 c;   // Coriolis / centrifugal vector
  Vec24 d;   // viscous joint damping D_diag * qdot
  Vec24 k;   // elastic joint torques K_diag * q
  Vec24 g;   // gravity torques
};

// Assembles all terms of M(q) qdd + c + d + k + g = tau for the planar
// serial chain with point masses at link ends.
DynamicsTerms dynamics_terms(const ContinuumState& state,
                             const ContinuumModel& model);

// Generalized torques from the external contact of `spec` at time t.
// `dt` converts a point impulse into a force pulse over one control step.
// The per-joint self-limit penalty is handled inside step_dynamics.
Vec24 contact_forces(const ContinuumState& state, const ContactSpec& spec,
                     double t, double dt, const ContinuumModel& model);

// True when the contact of `spec` exerts a nonzero force at time t
// (used for the logged contact flag and latency measurements).
bool contact_active(const ContinuumState& state, const ContactSpec& spec,
                    double t, double dt, const ContinuumModel& model);

// Projectile speed from the spring-gun energy balance v = sqrt(k_s/m)*dx.
double spring_gun_velocity(double k_s, double m_eff, double delta_x);

// First-order tracking of the commanded tendon force, clamped at zero.
Vec2 tendon_force_tracker(const Vec2& F_cmd, const Vec2& F_obs_prev, double dt,
                          double tau_F);

// Winch-side inertia and damping reflected through the rigid tendon
// coupling theta_out = dl/r, expressed at tendon level (per winch):
// m_eq = J_eq / r^2 [kg], c_eq = b_eq / r^2 [kg/s]. Each winch adds
// m_eq * d d^T to the generalized mass (the two antagonistic tendons share
// the moment-arm row up to sign, so the contributions coincide).
struct DriveCoupling {
  double m_eq = 0.0;
  double c_eq = 0.0;
};

// One semi-implicit Euler substep (velocity then position) of
// (M + M_drive) qdd = J_f^T F + tau_contact + tau_limit - c - d - k - g
//                     - drive damping.
// All spring/damper forces (joint elasticity/damping, drive damping,
// joint-limit and contact penalties) are linearized implicitly inside the
// velocity solve; tendon, Coriolis and gravity terms are explicit.
ContinuumState step_dynamics(const ContinuumState& state, const Vec2& F_obs,
                             const ContactSpec& spec, double t, double dt,
                             const ContinuumModel& model,
                             const DriveCoupling& drive = {});

// Kinetic + elastic + gravitational energy (limit/contact penalties
// excluded; used by the passivity audit on the free chain).
double total_energy(const ContinuumState& state, const ContinuumModel& model);

}  // namespace tdcr
