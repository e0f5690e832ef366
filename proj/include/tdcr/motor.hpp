#pragma once

#include <functional>
#include <vector>

#include "tdcr/types.hpp"

namespace tdcr {

// One semi-implicit Euler step of the RL circuit
//   L di/dt = u - R i - k_e theta_m_dot - d
// The R i term is taken implicitly: L is small, so an explicit step at the
// control rate would be marginally stable.
inline ElectricalState step_circuit(ElectricalState state, double u,
                                    double theta_m_dot, double d, double dt,
                                    const MotorElectricalParams& p) {
  const double drive = u - p.k_e * theta_m_dot - d;
  state.i = (state.i + dt / p.L * drive) / (1.0 + dt * p.R / p.L);
  return state;
}

// Electromagnetic torque tau_m = k_t * i.
inline double torque_from_current(double i, const MotorElectricalParams& p) {
  return p.k_t * i;
}

// Voltage predicted by the electrical model to reach the commanded current:
// L*di_cmd + R*i_cmd + back-EMF from the previous cycle's shaft speed.
inline double feedforward_voltage(double i_cmd, double di_cmd,
                                  double theta_m_dot_prev,
                                  const MotorElectricalParams& p) {
  return p.L * di_cmd + p.R * i_cmd + p.k_e * theta_m_dot_prev;
}

struct PidOutput {
  double u = 0.0;
  ElectricalState state;
};

// PID on the current error; derivative by backward difference on the error.
// When `freeze_integral` is set the integral state is not advanced
// (anti-windup while the commanded voltage exceeds the supply bound).
inline PidOutput pid_feedback(double e, ElectricalState state, double dt,
                              const CurrentControllerGains& g,
                              bool freeze_integral = false) {
  const double I_e_next = freeze_integral ? state.I_e : state.I_e + e * dt;
  const double u =
      g.K_p * e + g.K_i * I_e_next + g.K_d * (e - state.e_prev) / dt;
  state.I_e = I_e_next;
  state.e_prev = e;
  return {u, state};
}

// Test oracle: fine-step RK4 integration of the closed-loop error dynamics
//   (L + K_d) e'' + (R + K_p) e' + K_i e = d_dot(t).
// Returns e sampled at multiples of dt_sample up to t_end (inclusive start).
std::vector<double> error_ode_oracle(const CurrentControllerGains& g,
                                     const MotorElectricalParams& p,
                                     const std::function<double(double)>& d_dot,
                                     double e0, double edot0, double t_end,
                                     double dt_sample, int substeps = 20);

// ---- transmission -----------------------------------------------------

// Motor-side inertia and damping reflected through the gear ratio.
inline std::pair<double, double> reflect_params(const TransmissionParams& p) {
  return {p.G * p.G * p.J_m, p.G * p.G * p.b_m};
}

// Torque delivered through the gearbox.
inline double output_torque(double tau_m, const TransmissionParams& p) {
  return p.eta * p.G * tau_m;
}

// Output-shaft kinematics from tendon displacement and winch radius.
inline WinchSide winch_kinematics(double delta_l, double delta_l_dot,
                                  double delta_l_ddot, double r) {
  if (!(r > 0)) throw ConfigError("winch radius must be > 0");
  WinchSide w;
  w.theta_out = delta_l / r;
  w.theta_out_dot = delta_l_dot / r;
  w.theta_out_ddot = delta_l_ddot / r;
  return w;
}

// Commanded tendon force from the winch-side torque balance, using the
// previous cycle's kinematics. Clamped at zero: a tendon cannot push.
inline double commanded_tendon_force(double tau_eq, const WinchSide& prev,
                                     const TransmissionParams& p) {
  const auto [J_eq, b_eq] = reflect_params(p);
  const double F =
      (tau_eq - J_eq * prev.theta_out_ddot - b_eq * prev.theta_out_dot) / p.r;
  return F > 0.0 ? F : 0.0;
}

// Current reconstructed from the robot-side mechanics (the intrinsic
// sensing channel).
inline double reconstruct_current(const WinchSide& side, double F_obs,
                                  const TransmissionParams& p, double k_t) {
  const auto [J_eq, b_eq] = reflect_params(p);
  const double denom = p.eta * p.G * k_t;
  if (!(denom > 0)) throw ConfigError("eta*G*k_t must be > 0");
  return (J_eq * side.theta_out_ddot + b_eq * side.theta_out_dot +
          p.r * F_obs) /
         denom;
}

}  // namespace tdcr
