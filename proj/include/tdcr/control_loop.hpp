#pragma once

#include <array>
#include <optional>

#include "tdcr/continuum.hpp"
#include "tdcr/log.hpp"
#include "tdcr/motor.hpp"

namespace tdcr {

// Result of the current-control step for one tendon.
struct StepJaResult {
  double i_obs_star = 0.0;  // clamped to +/- i_sat
  double e = 0.0;
  double u_ff = 0.0;
  double u_fb = 0.0;
  ElectricalState state;
};

// Feedforward + PID current control against the RL plant. `i_obs_dstar_prev`
// is the reconstruction from the previous cycle; the returned i_obs_star is
// the post-controller current i_cmd - e(t_k).
StepJaResult step_ja(double i_cmd, double di_cmd, double i_obs_dstar_prev,
                     double theta_m_dot_prev, double d, double dt,
                     const ElectricalState& es, const MotorElectricalParams& p,
                     const CurrentControllerGains& g, double u_max);

// Controlled current -> commanded tendon force, using the previous cycle's
// winch kinematics.
double step_jb(double i_obs_star, const WinchSide& prev_winch,
               const TransmissionParams& p, double k_t);

// Closed-loop simulator executing the j_a -> j_b -> j_c cycle at the control
// rate, with the plant substepped n_sub times per cycle. One instance owns
// all mutable state; instances are independent.
class Simulator {
 public:
  explicit Simulator(const ScenarioConfig& cfg);

  // Executes one control cycle and appends one log row.
  void step();

  void run_all() {
    while (step_index_ < steps_total_) step();
  }

  int steps_total() const { return steps_total_; }
  int step_index() const { return step_index_; }
  double time() const { return step_index_ * cfg_.dt; }

  const LoopState& loop() const { return loop_; }
  double filtered_current(int tendon) const { return filt_value_[tendon]; }
  bool contact_now() const { return contact_flag_; }

  // Mutable access for online strategies (e.g. recoil after detection).
  FeedbackChannel& feedback(int tendon) { return fb_[tendon]; }
  const ScenarioConfig& config() const { return cfg_; }
  const ContinuumState& state() const { return plant_; }
  ContinuumState& mutable_state() { return plant_; }

  TimeSeriesLog take_log();

 private:
  double outer_feedback(int tendon, double t);
  double disturbance(int tendon, double t);

  ScenarioConfig cfg_;
  ContinuumModel model_;
  ContinuumState plant_;
  DriveCoupling drive_;
  std::array<FeedbackChannel, kNumTendons> fb_;

  std::array<ElectricalState, kNumTendons> es_;
  std::array<double, kNumTendons> i_cmd_prev_{};
  std::array<WinchSide, kNumTendons> winch_prev_;
  std::array<double, kNumTendons> i_obs_dstar_prev_{};
  std::array<double, kNumTendons> outer_int_{};
  Vec2 F_obs_ = Vec2::Zero();
  std::array<std::array<double, 5>, kNumTendons> ddot_hist_{};
  std::array<int, kNumTendons> ddot_count_{};
  std::array<MovingAverage, kNumTendons> filt_;
  std::array<double, kNumTendons> filt_value_{};
  bool first_cycle_ = true;
  bool contact_flag_ = false;
  Rng rng_;

  LoopState loop_;
  int step_index_ = 0;
  int steps_total_ = 0;
  TimeSeriesLog log_;
  void append_row(double t, const Vec2& dl, const Vec2& dldot);
};

// Executes the configured scenario start to finish and returns the log.
TimeSeriesLog run_scenario(const ScenarioConfig& cfg);

// ---- trace analysis helpers --------------------------------------------

// Time shift (obs relative to cmd) maximizing the cross-correlation of the
// mean-removed signals; used as the steady-state delay estimate.
double xcorr_delay(const std::vector<double>& cmd,
                   const std::vector<double>& obs, double dt,
                   double max_lag = 0.5);

// 10-90% rise time of a step response. `settled` is the final value the
// response is judged against; returns NaN when the levels are never crossed.
double rise_time_10_90(const std::vector<double>& y, double dt,
                       double settled);

// Spearman rank correlation.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace tdcr
