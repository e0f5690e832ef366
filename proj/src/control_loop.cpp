#include "tdcr/control_loop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tdcr {

StepJaResult step_ja(double i_cmd, double di_cmd, double i_obs_dstar_prev,
                     double theta_m_dot_prev, double d, double dt,
                     const ElectricalState& es, const MotorElectricalParams& p,
                     const CurrentControllerGains& g, double u_max) {
  StepJaResult out;
  const double e = i_cmd - i_obs_dstar_prev;
  out.u_ff = feedforward_voltage(i_cmd, di_cmd, theta_m_dot_prev, p);

  PidOutput pid = pid_feedback(e, es, dt, g, /*freeze_integral=*/false);
  if (std::abs(out.u_ff + pid.u) > u_max) {
    // Anti-windup: hold the integral while the supply bound is exceeded.
    pid = pid_feedback(e, es, dt, g, /*freeze_integral=*/true);
  }
  out.u_fb = pid.u;
  const double u = clamp_sym(out.u_ff + out.u_fb, u_max);

  out.state = step_circuit(pid.state, u, theta_m_dot_prev, d, dt, p);
  out.e = i_cmd - out.state.i;
  out.i_obs_star = clamp_sym(i_cmd - out.e, p.i_sat);
  return out;
}

double step_jb(double i_obs_star, const WinchSide& prev_winch,
               const TransmissionParams& p, double k_t) {
  const double tau_m = i_obs_star * k_t;
  const double tau_eq = output_torque(tau_m, p);
  return commanded_tendon_force(tau_eq, prev_winch, p);
}

Simulator::Simulator(const ScenarioConfig& cfg)
    : cfg_(cfg),
      model_(cfg.make_continuum_model()),
      fb_{cfg.fb[0], cfg.fb[1]},
      filt_{MovingAverage(cfg.filter_window), MovingAverage(cfg.filter_window)},
      rng_(cfg.seed) {
  cfg_.validate();
  if (!cfg_.baseline) {
    // The winch is rigidly coupled to the tendon: its reflected inertia and
    // damping load the arm. The baseline single-dynamics model has no
    // actuator, so the coupling is zero there.
    const auto [J_eq, b_eq] = reflect_params(cfg_.trans);
    drive_.m_eq = J_eq / (cfg_.trans.r * cfg_.trans.r);
    drive_.c_eq = b_eq / (cfg_.trans.r * cfg_.trans.r);
  }
  steps_total_ = static_cast<int>(std::floor(cfg_.duration / cfg_.dt));
  plant_.q.setConstant(cfg_.init_q);
  for (int i = 0; i < kNumTendons; ++i) winch_prev_[i].index = i;

  // A non-zero initial configuration has non-zero tendon displacement; seed
  // the winch angles accordingly so theta_out = dl/r holds from row 0.
  const Vec2 dl0 = tendon_lengths(plant_.q, model_);
  for (int i = 0; i < kNumTendons; ++i)
    winch_prev_[i].theta_out = dl0[i] / cfg_.trans.r;

  log_.columns = TimeSeriesLog::standard_columns();
  log_.data.assign(log_.columns.size(), {});
  log_.header_comment = cfg_.serialize();
  append_row(0.0, dl0, Vec2::Zero());
}

double Simulator::disturbance(int, double t) {
  switch (cfg_.dist.kind) {
    case DisturbanceKind::None: return 0.0;
    case DisturbanceKind::Sine:
      return cfg_.dist.amp * std::sin(2.0 * M_PI * cfg_.dist.freq * t);
    case DisturbanceKind::Noise: return cfg_.dist.std * rng_.gauss();
  }
  return 0.0;
}

double Simulator::outer_feedback(int tendon, double t) {
  const FeedbackChannel& ch = fb_[tendon];
  const double set = t >= ch.onset ? ch.setpoint : 0.0;
  if (ch.mode == FeedbackVariant::Current)
    return clamp_sym(set, cfg_.motor.i_sat);

  double err = 0.0;
  const Vec2 dl = tendon_lengths(plant_.q, model_);
  const Vec2 dldot = tendon_jacobian(plant_.q, model_) * plant_.qdot;
  switch (ch.mode) {
    case FeedbackVariant::Displacement: err = set - dl[tendon]; break;
    case FeedbackVariant::Velocity: err = set - dldot[tendon]; break;
    case FeedbackVariant::Force: err = set - F_obs_[tendon]; break;
    case FeedbackVariant::Current: break;
  }
  const double integ_cand = outer_int_[tendon] + err * cfg_.dt;
  const double cand = ch.kp * err + ch.ki * integ_cand;
  if (std::abs(cand) <= cfg_.motor.i_sat) {
    outer_int_[tendon] = integ_cand;  // anti-windup: freeze at the clamp
    return cand;
  }
  return clamp_sym(ch.kp * err + ch.ki * outer_int_[tendon], cfg_.motor.i_sat);
}

void Simulator::step() {
  const double t = step_index_ * cfg_.dt;
  const double dt = cfg_.dt;
  loop_ = LoopState{};
  loop_.t = t + dt;

  if (!cfg_.baseline) {
    for (int i = 0; i < kNumTendons; ++i) {
      // outer loop (Eq. of the alternative feedback points) -> i_cmd
      const double i_cmd = outer_feedback(i, t);
      const double di_cmd =
          first_cycle_ ? 0.0 : (i_cmd - i_cmd_prev_[i]) / dt;
      // step j_a
      const double theta_m_dot_prev =
          cfg_.trans.G * winch_prev_[i].theta_out_dot;
      const double d = disturbance(i, t);
      const StepJaResult ja =
          step_ja(i_cmd, di_cmd, i_obs_dstar_prev_[i], theta_m_dot_prev, d, dt,
                  es_[i], cfg_.motor, cfg_.gains, cfg_.u_max);
      es_[i] = ja.state;
      i_cmd_prev_[i] = i_cmd;
      // step j_b
      const double F_cmd =
          step_jb(ja.i_obs_star, winch_prev_[i], cfg_.trans, cfg_.motor.k_t);
      loop_.i_cmd[i] = i_cmd;
      loop_.e[i] = ja.e;
      loop_.I_e[i] = es_[i].I_e;
      loop_.i_obs_star[i] = ja.i_obs_star;
      loop_.u_ff[i] = ja.u_ff;
      loop_.u_fb[i] = ja.u_fb;
      loop_.F_cmd[i] = F_cmd;
    }
    // step j_c: tendon-force tracking, plant substeps, observation
    F_obs_ = tendon_force_tracker(loop_.F_cmd, F_obs_, dt, cfg_.tau_F);
  } else {
    // Baseline single robot-dynamics model: the setpoint force is applied
    // to the plant directly, with no electrical or transmission dynamics.
    for (int i = 0; i < kNumTendons; ++i) {
      const double set = t >= fb_[i].onset ? fb_[i].setpoint : 0.0;
      loop_.F_cmd[i] = std::max(set, 0.0);
    }
    F_obs_ = loop_.F_cmd;
  }
  loop_.F_obs = F_obs_;

  contact_flag_ = false;
  const double dt_sub = dt / cfg_.n_sub;
  for (int s = 0; s < cfg_.n_sub; ++s) {
    const double ts = t + s * dt_sub;
    if (contact_active(plant_, cfg_.contact, ts, dt, model_))
      contact_flag_ = true;
    plant_ =
        step_dynamics(plant_, F_obs_, cfg_.contact, ts, dt_sub, model_, drive_);
  }

  const Vec2 dl = tendon_lengths(plant_.q, model_);
  const Vec2 dldot = tendon_jacobian(plant_.q, model_) * plant_.qdot;
  for (int i = 0; i < kNumTendons; ++i) {
    const double theta_out = dl[i] / cfg_.trans.r;
    const double theta_dot = dldot[i] / cfg_.trans.r;
    // theta_ddot by backward difference, smoothed with a 5-sample median
    // to suppress differentiation noise.
    const double raw_ddot = (theta_dot - winch_prev_[i].theta_out_dot) / dt;
    auto& hist = ddot_hist_[i];
    hist[ddot_count_[i] % 5] = raw_ddot;
    ++ddot_count_[i];
    std::array<double, 5> sorted{};
    const int n = std::min(ddot_count_[i], 5);
    std::copy_n(hist.begin(), 5, sorted.begin());
    std::sort(sorted.begin(), sorted.begin() + n);
    const double theta_ddot = sorted[(n - 1) / 2];

    WinchSide w;
    w.index = i;
    w.theta_out = theta_out;
    w.theta_out_dot = theta_dot;
    w.theta_out_ddot = theta_ddot;
    double i_rec = reconstruct_current(w, F_obs_[i], cfg_.trans, cfg_.motor.k_t);
    if (cfg_.meas_noise_std > 0) i_rec += cfg_.meas_noise_std * rng_.gauss();
    winch_prev_[i] = w;
    i_obs_dstar_prev_[i] = i_rec;

    loop_.theta_out[i] = theta_out;
    loop_.theta_out_dot[i] = theta_dot;
    loop_.theta_out_ddot[i] = theta_ddot;
    loop_.i_obs_dstar[i] = i_rec;
    filt_value_[i] = filt_[i].push(i_rec);
  }
  first_cycle_ = false;
  ++step_index_;
  append_row(loop_.t, dl, dldot);
}

void Simulator::append_row(double t, const Vec2& dl, const Vec2& dldot) {
  const Vec2 tip = tip_position(plant_.q, model_);
  std::size_t c = 0;
  auto push = [&](double v) { log_.data[c++].push_back(v); };
  push(t);
  for (int i = 0; i < 2; ++i) push(loop_.i_cmd[i]);
  for (int i = 0; i < 2; ++i) push(loop_.i_obs_star[i]);
  for (int i = 0; i < 2; ++i) push(loop_.i_obs_dstar[i]);
  for (int i = 0; i < 2; ++i) push(filt_value_[i]);
  for (int i = 0; i < 2; ++i) push(loop_.u_ff[i]);
  for (int i = 0; i < 2; ++i) push(loop_.u_fb[i]);
  for (int i = 0; i < 2; ++i) push(loop_.F_cmd[i]);
  for (int i = 0; i < 2; ++i) push(loop_.F_obs[i]);
  for (int i = 0; i < 2; ++i) push(dl[i]);
  for (int i = 0; i < 2; ++i) push(dldot[i]);
  for (int i = 0; i < 2; ++i) push(loop_.theta_out[i]);
  push(tip.x());
  push(tip.y());
  push(contact_flag_ ? 1.0 : 0.0);
}

TimeSeriesLog Simulator::take_log() { return std::move(log_); }

TimeSeriesLog run_scenario(const ScenarioConfig& cfg) {
  Simulator sim(cfg);
  sim.run_all();
  return sim.take_log();
}

double xcorr_delay(const std::vector<double>& cmd,
                   const std::vector<double>& obs, double dt, double max_lag) {
  if (cmd.size() != obs.size() || cmd.size() < 2)
    throw NumericalError("xcorr_delay: traces must be equal length >= 2");
  const int n = static_cast<int>(cmd.size());
  const int lag_max = std::min<int>(static_cast<int>(max_lag / dt), n - 2);
  // normalized correlation coefficient over the overlap, per lag
  double best = -2.0;
  int best_lag = 0;
  for (int lag = 0; lag <= lag_max; ++lag) {
    const int m = n - lag;
    double mc = 0.0, mo = 0.0;
    for (int k = lag; k < n; ++k) {
      mc += cmd[k - lag];
      mo += obs[k];
    }
    mc /= m;
    mo /= m;
    double s = 0.0, vc = 0.0, vo = 0.0;
    for (int k = lag; k < n; ++k) {
      const double a = cmd[k - lag] - mc, b = obs[k] - mo;
      s += a * b;
      vc += a * a;
      vo += b * b;
    }
    const double rho = s / std::sqrt(vc * vo + 1e-300);
    if (rho > best) {
      best = rho;
      best_lag = lag;
    }
  }
  return best_lag * dt;
}

double rise_time_10_90(const std::vector<double>& y, double dt,
                       double settled) {
  const double lo = 0.1 * settled, hi = 0.9 * settled;
  double t10 = -1, t90 = -1;
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (t10 < 0 && y[k] >= lo) t10 = k * dt;
    if (t90 < 0 && y[k] >= hi) {
      t90 = k * dt;
      break;
    }
  }
  if (t10 < 0 || t90 < 0) return std::numeric_limits<double>::quiet_NaN();
  return t90 - t10;
}

static std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * (i + j) + 1.0;  // average rank for ties
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw NumericalError("spearman: need equal-length inputs, n >= 2");
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ma += ra[k];
    mb += rb[k];
  }
  ma /= n;
  mb /= n;
  double num = 0, da = 0, db = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num += (ra[k] - ma) * (rb[k] - mb);
    da += (ra[k] - ma) * (ra[k] - ma);
    db += (rb[k] - mb) * (rb[k] - mb);
  }
  if (da == 0 || db == 0) throw NumericalError("spearman: constant input");
  return num / std::sqrt(da * db);
}

}  // namespace tdcr
