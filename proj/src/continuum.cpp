#include "tdcr/continuum.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace tdcr {

namespace {

constexpr int N = kNumJoints;

inline double cross2(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Chain kinematics shared by the dynamics assembly.
struct ChainKin {
  std::array<double, N> phi;      // absolute link angles
  std::array<Vec2, N> u;          // link direction (cos, sin)
  std::array<Vec2, N + 1> p;      // joint positions; p[j+1] = end of link j
  std::array<Vec2, N> v;          // velocity of mass j (end of link j)
  std::array<Vec2, N> a_bias;     // acceleration of mass j with qdd = 0
};

ChainKin chain_kinematics(const Vec24& q, const Vec24& qdot,
                          const ContinuumModel& model) {
  ChainKin kin;
  double phi = 0.0, phidot = 0.0;
  Vec2 p = Vec2::Zero(), v = Vec2::Zero(), a = Vec2::Zero();
  kin.p[0] = p;
  for (int j = 0; j < N; ++j) {
    phi += q[j];
    phidot += qdot[j];
    kin.phi[j] = phi;
    const double c = std::cos(phi), s = std::sin(phi);
    kin.u[j] = Vec2(c, s);
    const double l = model.link_lengths[j];
    p += l * kin.u[j];
    v += l * phidot * Vec2(-s, c);
    a += -l * phidot * phidot * kin.u[j];
    kin.p[j + 1] = p;
    kin.v[j] = v;
    kin.a_bias[j] = a;
  }
  return kin;
}

// Generalized torque at every joint a <= link from a point force applied at
// the end of `link`: tau_a += cross(x - p_a, f).
void apply_point_force(const std::array<Vec2, N + 1>& p, int link,
                       const Vec2& f, Vec24& tau) {
  const Vec2 x = p[link + 1];
  for (int a = 0; a <= link; ++a) tau[a] += cross2(x - p[a], f);
}

struct ContactEval {
  Vec24 tau = Vec24::Zero();
  // Implicit stabilization of stiff penalties: rows J (1 x 24 as Vec24)
  // with scalar weights dt^2*k + dt*c per contact, folded into the solve.
  int n_rows = 0;
  std::array<Vec24, N + 1> rows;
  std::array<double, N + 1> row_gain_k;  // dt^2 * penalty stiffness
  std::array<double, N + 1> row_gain_c;  // dt * penalty damping
  bool active = false;
};

// Row of d(penetration)/dq for a cylinder contact at the end of `link`:
// ddot = -n . v_pt = -(n^T J_c) qdot.
Vec24 penetration_row(const std::array<Vec2, N + 1>& p, int link,
                      const Vec2& n) {
  Vec24 row = Vec24::Zero();
  const Vec2 x = p[link + 1];
  for (int a = 0; a <= link; ++a) {
    const Vec2 col(-(x - p[a]).y(), (x - p[a]).x());  // d(x_pt)/dq_a
    row[a] = -n.dot(col);
  }
  return row;
}

ContactEval eval_contacts(const ContinuumState& state, const ContactSpec& spec,
                          double t, double dt, const ContinuumModel& model,
                          const ChainKin& kin) {
  ContactEval out;
  switch (spec.kind) {
    case ContactKind::None:
      break;
    case ContactKind::PointImpulse: {
      // Impulse delivered as an equivalent force pulse over one control step.
      if (t >= spec.onset && t < spec.onset + dt) {
        const double mag = spec.impulse / dt;
        const Vec2 dir(kin.u[spec.link_index].y(), -kin.u[spec.link_index].x());
        apply_point_force(kin.p, spec.link_index, mag * dir, out.tau);
        out.active = true;
      }
      break;
    }
    case ContactKind::RotatingPusher: {
      if (t >= spec.onset) {
        const double phase = std::fmod(t - spec.onset, spec.period);
        if (phase < spec.duty * spec.period) {
          const Vec2 dir(kin.u[spec.link_index].y(),
                         -kin.u[spec.link_index].x());
          apply_point_force(kin.p, spec.link_index, spec.force * dir, out.tau);
          out.active = true;
        }
      }
      break;
    }
    case ContactKind::Cylinder: {
      const Vec2 center(spec.cx, spec.cy);
      const double R = 0.5 * spec.diameter;
      for (int j = 0; j < N; ++j) {
        const Vec2 x = kin.p[j + 1];
        const Vec2 rel = x - center;
        const double dist = rel.norm();
        if (dist >= R || dist < 1e-12) continue;
        const Vec2 n = rel / dist;
        const double pen = R - dist;
        const double pen_rate = -n.dot(kin.v[j]);
        double f = spec.k_pen * pen + spec.c_pen * pen_rate;
        if (f < 0.0) f = 0.0;
        apply_point_force(kin.p, j, f * n, out.tau);
        if (out.n_rows <= N) {
          out.rows[out.n_rows] = penetration_row(kin.p, j, n);
          out.row_gain_k[out.n_rows] = dt * dt * spec.k_pen;
          out.row_gain_c[out.n_rows] = dt * spec.c_pen;
          ++out.n_rows;
        }
        out.active = true;
      }
      break;
    }
  }
  return out;
}

}  // namespace

std::array<Vec2, kNumJoints + 1> joint_positions(const Vec24& q,
                                                 const ContinuumModel& model) {
  return chain_kinematics(q, Vec24::Zero(), model).p;
}

Vec2 tendon_lengths(const Vec24& q, const ContinuumModel& model) {
  const double dl = model.moment_arms.dot(q);
  return Vec2(dl, -dl);
}

Jac2x24 tendon_jacobian(const Vec24&, const ContinuumModel& model) {
  Jac2x24 J;
  J.row(0) = model.moment_arms.transpose();
  J.row(1) = -model.moment_arms.transpose();
  return J;
}

DynamicsTerms dynamics_terms(const ContinuumState& state,
                             const ContinuumModel& model) {
  const ChainKin kin = chain_kinematics(state.q, state.qdot, model);
  DynamicsTerms out;

  // Suffix sums over point masses: A = sum m, B = sum m*x, C = sum m*|x|^2,
  // S1 = sum m*cross(x, a_bias), S2 = sum m*a_bias.
  std::array<double, N + 1> A{}, C{}, S1{};
  std::array<Vec2, N + 1> B, S2;
  B[N] = Vec2::Zero();
  S2[N] = Vec2::Zero();
  for (int j = N - 1; j >= 0; --j) {
    const double m = model.link_masses[j];
    const Vec2& x = kin.p[j + 1];
    A[j] = A[j + 1] + m;
    B[j] = B[j + 1] + m * x;
    C[j] = C[j + 1] + m * x.squaredNorm();
    S1[j] = S1[j + 1] + m * cross2(x, kin.a_bias[j]);
    S2[j] = S2[j + 1] + m * kin.a_bias[j];
  }

  for (int a = 0; a < N; ++a) {
    const Vec2& pa = kin.p[a];
    for (int b = a; b < N; ++b) {
      const Vec2& pb = kin.p[b];
      const double m_ab = C[b] - B[b].dot(pa + pb) + A[b] * pa.dot(pb);
      out.M(a, b) = m_ab;
      out.M(b, a) = m_ab;
    }
    out.c[a] = S1[a] - cross2(pa, S2[a]);
    out.g[a] = -(cross2(B[a], model.gravity) - A[a] * cross2(pa, model.gravity));
  }
  out.d = model.joint_damping.cwiseProduct(state.qdot);
  out.k = model.joint_stiffness.cwiseProduct(state.q);
  return out;
}

Vec24 contact_forces(const ContinuumState& state, const ContactSpec& spec,
                     double t, double dt, const ContinuumModel& model) {
  if (spec.kind != ContactKind::None && spec.kind != ContactKind::PointImpulse &&
      spec.kind != ContactKind::RotatingPusher &&
      spec.kind != ContactKind::Cylinder)
    throw ConfigError("contact_forces: unknown contact kind");
  const ChainKin kin = chain_kinematics(state.q, state.qdot, model);
  return eval_contacts(state, spec, t, dt, model, kin).tau;
}

bool contact_active(const ContinuumState& state, const ContactSpec& spec,
                    double t, double dt, const ContinuumModel& model) {
  const ChainKin kin = chain_kinematics(state.q, state.qdot, model);
  return eval_contacts(state, spec, t, dt, model, kin).active;
}

double spring_gun_velocity(double k_s, double m_eff, double delta_x) {
  if (!(k_s > 0) || !(m_eff > 0) || !(delta_x >= 0))
    throw ConfigError("spring_gun_velocity: inputs must be positive");
  return std::sqrt(k_s / m_eff) * delta_x;
}

Vec2 tendon_force_tracker(const Vec2& F_cmd, const Vec2& F_obs_prev, double dt,
                          double tau_F) {
  if (!(tau_F > 0)) throw ConfigError("tendon_force_tracker: tau_F must be > 0");
  Vec2 F = F_obs_prev + (dt / tau_F) * (F_cmd - F_obs_prev);
  return F.cwiseMax(0.0);
}

ContinuumState step_dynamics(const ContinuumState& state, const Vec2& F_obs,
                             const ContactSpec& spec, double t, double dt,
                             const ContinuumModel& model,
                             const DriveCoupling& drive) {
  if (!(dt > 0)) throw ConfigError("step_dynamics: dt must be > 0");
  if (drive.m_eq < 0 || drive.c_eq < 0)
    throw ConfigError("step_dynamics: drive coupling must be >= 0");
  const ChainKin kin = chain_kinematics(state.q, state.qdot, model);
  const DynamicsTerms terms = dynamics_terms(state, model);
  const ContactEval contact = eval_contacts(state, spec, t, dt, model, kin);

  Vec24 rhs = tendon_jacobian(state.q, model).transpose() * F_obs +
              contact.tau - terms.c - terms.d - terms.k - terms.g;

  // Reflected winch inertia/damping along the shared moment-arm direction
  // (both antagonistic winches contribute, hence the factor 2).
  Mat24 drive_M = Mat24::Zero();
  Mat24 drive_C = Mat24::Zero();
  if (drive.m_eq > 0 || drive.c_eq > 0) {
    const Mat24 ddT = model.moment_arms * model.moment_arms.transpose();
    drive_M = (2.0 * drive.m_eq) * ddT;
    drive_C = (2.0 * drive.c_eq) * ddT;
    rhs.noalias() -= drive_C * state.qdot;
  }

  // All spring/damper forces (joint elasticity and damping, joint-limit and
  // contact penalties) are linearized implicitly in the velocity solve:
  //   (M + dt*Cd + dt^2*Kk) dv = dt*f(q, v) - dt^2*Kk*v,  v' = v + dv,
  // where Cd/Kk are the damping/stiffness Jacobians of those forces. The
  // tip joints are far too stiff relative to their inertia for an explicit
  // step at the control substep size. Reduces to semi-implicit Euler for
  // the remaining (explicit) terms.
  Mat24 Asolve = terms.M + drive_M + dt * drive_C;
  Mat24 Xk;  // stiffness-type, enters A and the -Xk*v correction
  Xk.setZero();
  const double lim = model.joint_limit;
  for (int j = 0; j < N; ++j) {
    Asolve(j, j) += dt * model.joint_damping[j];
    Xk(j, j) += dt * dt * model.joint_stiffness[j];
    const double qj = state.q[j];
    if (qj > lim) {
      rhs[j] += -model.limit_stiffness * (qj - lim);
      Xk(j, j) += dt * dt * model.limit_stiffness;
    } else if (qj < -lim) {
      rhs[j] += -model.limit_stiffness * (qj + lim);
      Xk(j, j) += dt * dt * model.limit_stiffness;
    }
  }
  for (int r = 0; r < contact.n_rows; ++r) {
    const Mat24 JJt = contact.rows[r] * contact.rows[r].transpose();
    Xk.noalias() += contact.row_gain_k[r] * JJt;
    Asolve.noalias() += contact.row_gain_c[r] * JJt;
  }
  Asolve += Xk;

  Vec24 rhs_v = dt * rhs;
  rhs_v.noalias() -= Xk * state.qdot;

  Eigen::LLT<Mat24> llt(Asolve);
  if (llt.info() != Eigen::Success)
    throw NumericalError("step_dynamics: mass matrix factorization failed");

  ContinuumState next;
  next.qdot = state.qdot + llt.solve(rhs_v);
  next.q = state.q + dt * next.qdot;
  return next;
}

double total_energy(const ContinuumState& state, const ContinuumModel& model) {
  const DynamicsTerms terms = dynamics_terms(state, model);
  const double kinetic = 0.5 * state.qdot.dot(terms.M * state.qdot);
  const double elastic =
      0.5 * state.q.dot(model.joint_stiffness.cwiseProduct(state.q));
  const auto p = joint_positions(state.q, model);
  double grav = 0.0;
  for (int j = 0; j < N; ++j)
    grav -= model.link_masses[j] * model.gravity.dot(p[j + 1]);
  return kinetic + elastic + grav;
}

}  // namespace tdcr
