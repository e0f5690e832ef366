#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "tdcr/common.hpp"

namespace tdcr {

inline constexpr int kNumJoints = 24;
inline constexpr int kNumTendons = 2;

using Vec24 = Eigen::Matrix<double, kNumJoints, 1>;
using Mat24 = Eigen::Matrix<double, kNumJoints, kNumJoints>;
using Vec2 = Eigen::Vector2d;
using Jac2x24 = Eigen::Matrix<double, kNumTendons, kNumJoints>;

// RL-circuit constants of one DC motor.
struct MotorElectricalParams {
  double L = 0.0008;   // inductance [H]
  double R = 0.6;      // resistance [Ohm]
  double k_e = 0.09;   // back-EMF constant [V*s/rad]
  double k_t = 0.09;   // torque constant [N*m/A]
  double i_sat = 5.0;  // current saturation bound [A]

  void validate() const {
    if (!(L > 0)) throw ConfigError("motor.L must be > 0");
    if (!(R > 0)) throw ConfigError("motor.R must be > 0");
    if (!(k_e > 0)) throw ConfigError("motor.k_e must be > 0");
    if (!(k_t > 0)) throw ConfigError("motor.k_t must be > 0");
    if (!(i_sat > 0)) throw ConfigError("motor.i_sat must be > 0");
  }
};

// Geared winch transmission constants. J_eq/b_eq are always derived from
// G, J_m, b_m; they are never stored.
struct TransmissionParams {
  double G = 19.0;     // gear ratio
  double eta = 0.85;   // transmission efficiency
  double J_m = 5e-5;   // rotor inertia [kg*m^2]
  double b_m = 1e-4;   // rotor viscous damping [N*m*s/rad]
  double r = 0.005;    // winch radius [m]

  void validate() const {
    if (!(G >= 1)) throw ConfigError("trans.G must be >= 1");
    if (!(eta > 0 && eta <= 1)) throw ConfigError("trans.eta must be in (0, 1]");
    if (!(J_m > 0)) throw ConfigError("trans.J_m must be > 0");
    if (!(b_m > 0)) throw ConfigError("trans.b_m must be > 0");
    if (!(r > 0)) throw ConfigError("trans.r must be > 0");
  }
};

// Geometry, inertia and stiffness of the 24-coordinate planar pseudo-rigid
// chain. Defaults follow a logarithmic-spiral taper: lengths and moment arms
// shrink by lambda per link, masses by lambda^3 (volume), joint stiffness by
// lambda^4 (section-modulus trend).
struct ContinuumModel {
  Vec24 link_lengths;     // [m]
  Vec24 link_masses;      // [kg]
  Vec24 joint_stiffness;  // [N*m/rad]
  Vec24 joint_damping;    // [N*m*s/rad]
  Vec24 moment_arms;      // [m], shared by both tendons with opposite sign
  double joint_limit = 0.35;       // per-joint curl limit [rad]
  double limit_stiffness = 200.0;  // one-sided penalty stiffness [N*m/rad]
  Vec2 gravity = Vec2::Zero();     // [m/s^2]; off by default (planar rig)

  static ContinuumModel tapered(double l_base = 0.02, double lambda = 0.93,
                                double m_base = 0.01, double k_base = 0.05,
                                double d_base = 0.006, double b_base = 0.004) {
    ContinuumModel m;
    for (int j = 0; j < kNumJoints; ++j) {
      const double lj = std::pow(lambda, j);
      m.link_lengths[j] = l_base * lj;
      m.link_masses[j] = m_base * lj * lj * lj;
      m.joint_stiffness[j] = k_base * lj * lj * lj * lj;
      m.joint_damping[j] = b_base * lj * lj * lj * lj;
      m.moment_arms[j] = d_base * lj;
    }
    return m;
  }

  void validate() const {
    auto positive = [](const Vec24& v, const char* name) {
      for (int j = 0; j < kNumJoints; ++j)
        if (!(v[j] > 0))
          throw ConfigError(std::string("continuum.") + name +
                            " entries must be > 0");
    };
    positive(link_lengths, "link_lengths");
    positive(link_masses, "link_masses");
    positive(joint_stiffness, "joint_stiffness");
    positive(joint_damping, "joint_damping");
    positive(moment_arms, "moment_arms");
    auto taper = [](const Vec24& v, const char* name) {
      for (int j = 1; j < kNumJoints; ++j)
        if (v[j] > v[j - 1] + 1e-15)
          throw ConfigError(std::string("continuum.") + name +
                            " must be non-increasing base to tip");
    };
    taper(link_lengths, "link_lengths");
    taper(link_masses, "link_masses");
    taper(joint_stiffness, "joint_stiffness");
    taper(moment_arms, "moment_arms");
    if (!(joint_limit > 0)) throw ConfigError("continuum.joint_limit must be > 0");
    if (!(limit_stiffness > 0))
      throw ConfigError("continuum.limit_stiffness must be > 0");
  }
};

// Configuration of the chain: joint angles and angular velocities.
// The undeformed reference is q = 0 exactly.
struct ContinuumState {
  Vec24 q = Vec24::Zero();
  Vec24 qdot = Vec24::Zero();
};

// Output-shaft kinematics of one winch, tied to the tendon displacement by
// theta_out = dl/r (and derivatives).
struct WinchSide {
  int index = 0;
  double theta_out = 0.0;       // [rad]
  double theta_out_dot = 0.0;   // [rad/s]
  double theta_out_ddot = 0.0;  // [rad/s^2]
};

// Gains of the inner current PID.
struct CurrentControllerGains {
  double K_p = 4.0;    // [V/A]
  double K_i = 400.0;  // [V/(A*s)]
  double K_d = 0.001;  // [V*s/A]

  void validate() const {
    if (!(K_p > 0)) throw ConfigError("gains.K_p must be > 0");
    if (K_i < 0) throw ConfigError("gains.K_i must be >= 0");
    if (K_d < 0) throw ConfigError("gains.K_d must be >= 0");
  }
};

// Armature current plus PID bookkeeping for one motor.
struct ElectricalState {
  double i = 0.0;       // armature current [A]
  double I_e = 0.0;     // error integral [A*s]
  double e_prev = 0.0;  // previous error [A]
};

// All per-cycle signals of one tendon channel.
struct LoopState {
  double t = 0.0;
  Vec2 i_cmd = Vec2::Zero();
  Vec2 e = Vec2::Zero();
  Vec2 I_e = Vec2::Zero();
  Vec2 i_obs_star = Vec2::Zero();   // post-controller current (clamped)
  Vec2 i_obs_dstar = Vec2::Zero();  // reconstructed current (unclamped)
  Vec2 u_ff = Vec2::Zero();
  Vec2 u_fb = Vec2::Zero();
  Vec2 F_cmd = Vec2::Zero();
  Vec2 F_obs = Vec2::Zero();
  Vec2 theta_out = Vec2::Zero();
  Vec2 theta_out_dot = Vec2::Zero();
  Vec2 theta_out_ddot = Vec2::Zero();
};

inline double clamp_sym(double v, double bound) {
  return v > bound ? bound : (v < -bound ? -bound : v);
}

}  // namespace tdcr
