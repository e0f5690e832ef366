#include "tdcr/perception.hpp"

#include <algorithm>
#include <cmath>

#include "tdcr/control_loop.hpp"

namespace tdcr {

std::string to_string(DetectRule r) {
  switch (r) {
    case DetectRule::Abs: return "abs";
    case DetectRule::Rel: return "rel";
    case DetectRule::Slope: return "slope";
  }
  return "?";
}

ContactDetector::ContactDetector(const DetectorConfig& cfg, double dt)
    : cfg_(cfg), dt_(dt) {
  cfg_.validate();
  if (!(dt > 0)) throw ConfigError("detector: dt must be > 0");
  baseline_buf_.reserve(cfg_.baseline_window);
  slope_buf_.reserve(cfg_.window);
}

std::optional<ContactEvent> ContactDetector::push(double sample) {
  // update the slope window first: the slope at sample k includes k
  if (static_cast<int>(slope_buf_.size()) == cfg_.window)
    slope_buf_.erase(slope_buf_.begin());
  slope_buf_.push_back(sample);

  std::optional<ContactEvent> out;
  const double t = n_ * dt_;
  const bool warm = n_ >= cfg_.baseline_window;
  if (warm && t >= last_event_time_ + cfg_.refractory) {
    // baseline: median of the trailing window, excluding the current sample
    std::vector<double> tmp(baseline_buf_);
    std::nth_element(tmp.begin(), tmp.begin() + tmp.size() / 2, tmp.end());
    double baseline = tmp[tmp.size() / 2];
    if (tmp.size() % 2 == 0) {
      const double hi = baseline;
      std::nth_element(tmp.begin(), tmp.begin() + tmp.size() / 2 - 1,
                       tmp.end());
      baseline = 0.5 * (baseline + tmp[tmp.size() / 2 - 1]);
      (void)hi;
    }

    // rolling least-squares slope over the slope window
    const int w = static_cast<int>(slope_buf_.size());
    double sy = 0.0, sjy = 0.0;
    for (int j = 0; j < w; ++j) {
      sy += slope_buf_[j];
      sjy += j * slope_buf_[j];
    }
    double slope = 0.0;
    if (w >= 2) {
      const double sxx = dt_ * dt_ * w * (double(w) * w - 1.0) / 12.0;
      const double sxy = dt_ * (sjy - 0.5 * (w - 1) * sy);
      slope = sxy / sxx;
    }

    const double rise = std::abs(sample - baseline);
    std::optional<DetectRule> rule;
    if (rise >= cfg_.abs_rise)
      rule = DetectRule::Abs;
    else if (rise > 0.0 && rise >= cfg_.rel_rise * std::abs(baseline))
      rule = DetectRule::Rel;
    else if (std::abs(slope) >= cfg_.slope)
      rule = DetectRule::Slope;
    if (rule) {
      out = ContactEvent{t, *rule, sample, baseline};
      last_event_time_ = t;
    }
  }

  if (static_cast<int>(baseline_buf_.size()) == cfg_.baseline_window)
    baseline_buf_.erase(baseline_buf_.begin());
  baseline_buf_.push_back(sample);
  ++n_;
  return out;
}

std::vector<ContactEvent> detect_contact(const std::vector<double>& i_trace,
                                         double dt,
                                         const DetectorConfig& cfg) {
  if (static_cast<int>(i_trace.size()) <= cfg.baseline_window)
    throw ConfigError("detect_contact: trace shorter than baseline window");
  ContactDetector det(cfg, dt);
  std::vector<ContactEvent> events;
  for (double v : i_trace)
    if (auto e = det.push(v)) events.push_back(*e);
  return events;
}

std::vector<double> sensitivity_profile(const ScenarioConfig& base_cfg,
                                        const std::vector<int>& links) {
  if (base_cfg.contact.kind != ContactKind::PointImpulse)
    throw ConfigError("sensitivity_profile: needs a point-impulse scenario");
  std::vector<double> shifts;
  shifts.reserve(links.size());
  for (int link : links) {
    ScenarioConfig cfg = base_cfg;
    cfg.contact.link_index = link;
    cfg.validate();
    const double onset = cfg.contact.onset;
    if (!(onset > 0.2) || !(cfg.duration > onset + 0.5))
      throw ConfigError(
          "sensitivity_profile: onset must leave a baseline window and a "
          "post-impact window");
    const TimeSeriesLog log = run_scenario(cfg);
    const auto& f = log.col("i_obs_dstar_filt_0");
    const auto& t = log.col("t");
    double base = 0.0, shift = 0.0;
    int nb = 0, ns = 0;
    for (std::size_t k = 0; k < t.size(); ++k)
      if (t[k] >= onset - 0.2 && t[k] < onset) {
        base += f[k];
        ++nb;
      }
    base /= nb;
    for (std::size_t k = 0; k < t.size(); ++k)
      if (t[k] >= onset) {
        shift += std::abs(f[k] - base);
        ++ns;
      }
    shifts.push_back(shift / ns);
  }
  return shifts;
}

double apparent_period(const std::vector<double>& i_trace, double dt) {
  const int n = static_cast<int>(i_trace.size());
  if (n < 16) throw ConfigError("apparent_period: trace too short");
  // linear detrend
  double sy = 0.0, sjy = 0.0;
  for (int k = 0; k < n; ++k) {
    sy += i_trace[k];
    sjy += k * i_trace[k];
  }
  const double sxx = n * (double(n) * n - 1.0) / 12.0;
  const double b = (sjy - 0.5 * (n - 1) * sy) / sxx;
  const double a = sy / n - b * 0.5 * (n - 1);
  std::vector<double> y(n);
  for (int k = 0; k < n; ++k) y[k] = i_trace[k] - (a + b * k);

  double r0 = 0.0;
  for (int k = 0; k < n; ++k) r0 += y[k] * y[k];
  r0 /= n;
  if (!(r0 > 0)) throw NumericalError("apparent_period: period not recoverable");

  const int lag_max = n / 2;
  std::vector<double> rho(lag_max + 1, 0.0);
  rho[0] = 1.0;
  for (int l = 1; l <= lag_max; ++l) {
    double s = 0.0;
    for (int k = 0; k + l < n; ++k) s += y[k] * y[k + l];
    rho[l] = s / ((n - l) * r0);
  }

  // First prominent peak: the autocorrelation must first decay below the
  // prominence floor (ripple superimposed on the zero-lag shoulder is not a
  // period), then the first local maximum at or above the floor wins.
  constexpr double kFloor = 0.5;
  bool past_shoulder = false;
  for (int l = 1; l < lag_max; ++l) {
    if (!past_shoulder) {
      if (rho[l] < kFloor) past_shoulder = true;
      continue;
    }
    if (rho[l] >= kFloor && rho[l] >= rho[l - 1] && rho[l] > rho[l + 1])
      return l * dt;
  }
  throw NumericalError("apparent_period: period not recoverable");
}

UncurlResult active_uncurl_scan(const ScenarioConfig& cfg,
                                const ContactSpec& obstacle,
                                const DetectorConfig& det) {
  ScenarioConfig run_cfg = cfg;
  run_cfg.contact = obstacle;
  run_cfg.det = det;
  Simulator sim(run_cfg);

  // the driven tendon is the velocity-mode channel
  int drive = 0;
  for (int i = 0; i < kNumTendons; ++i)
    if (run_cfg.fb[i].mode == FeedbackVariant::Velocity) drive = i;

  const double dl0 =
      tendon_lengths(Vec24::Constant(run_cfg.init_q),
                     run_cfg.make_continuum_model())[drive];
  ContactDetector detector(det, run_cfg.dt);
  std::optional<ContactEvent> event;
  bool recoiling = false;
  const double fwd_set = run_cfg.fb[drive].setpoint;
  // Arm the detector once the drive is on and the observation filter has
  // flushed the start-up transient; the baseline then reflects free motion.
  const double t_arm =
      run_cfg.fb[drive].onset + run_cfg.filter_window * run_cfg.dt;
  double t_first_push = -1.0;
  while (sim.step_index() < sim.steps_total()) {
    sim.step();
    if (sim.time() < t_arm) continue;
    if (t_first_push < 0) t_first_push = sim.time();
    const double i_filt = sim.filtered_current(drive);
    if (!event) {
      if (auto e = detector.push(i_filt)) {
        event = e;
        event->time += t_first_push;  // detector time starts at arming
        // stop the scan and recoil toward the initial shape
        sim.feedback(drive).setpoint = -fwd_set;
        recoiling = true;
      }
    } else if (recoiling) {
      const double dl_now = sim.loop().theta_out[drive] * run_cfg.trans.r;
      const bool returned =
          fwd_set > 0 ? dl_now <= dl0 : dl_now >= dl0;
      if (returned) {
        sim.feedback(drive).setpoint = 0.0;
        recoiling = false;
      }
    }
  }
  return {event, sim.take_log()};
}

}  // namespace tdcr
