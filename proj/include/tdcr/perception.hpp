#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tdcr/config.hpp"
#include "tdcr/log.hpp"

namespace tdcr {

enum class DetectRule { Abs, Rel, Slope };

std::string to_string(DetectRule r);

struct ContactEvent {
  double time = 0.0;      // [s]
  DetectRule rule = DetectRule::Abs;
  double value = 0.0;     // current at trigger [A]
  double baseline = 0.0;  // rolling baseline at trigger [A]
};

// Streaming rate-based contact detector: rolling-median baseline, rolling
// least-squares slope, three threshold rules with a refractory period.
// One instance per trace; push() consumes one sample per control cycle.
class ContactDetector {
 public:
  explicit ContactDetector(const DetectorConfig& cfg, double dt);

  std::optional<ContactEvent> push(double sample);

  int samples_seen() const { return n_; }

 private:
  DetectorConfig cfg_;
  double dt_;
  std::vector<double> baseline_buf_;  // ring, last baseline_window samples
  std::vector<double> slope_buf_;     // ring, last window samples
  int n_ = 0;
  double last_event_time_ = -1e300;
};

// Offline application of the detector to a whole trace.
// Requires trace length > baseline window.
std::vector<ContactEvent> detect_contact(const std::vector<double>& i_trace,
                                         double dt,
                                         const DetectorConfig& cfg);

// Runs one single-contact simulation per entry of `links` (identical
// impulse) and returns the per-link steady shift of the filtered
// reconstructed current: mean |i_filt - pre-impact baseline| over the
// post-impact window.
std::vector<double> sensitivity_profile(const ScenarioConfig& base_cfg,
                                        const std::vector<int>& links);

// Lag of the first prominent autocorrelation peak of the detrended trace.
// Throws NumericalError("period not recoverable") when no peak clears the
// prominence floor.
double apparent_period(const std::vector<double>& i_trace, double dt);

struct UncurlResult {
  std::optional<ContactEvent> event;
  TimeSeriesLog log;
};

// Velocity-drive uncurl with the online detector on the driven tendon's
// filtered reconstructed current. On detection the drive reverses
// (recoil) until the tendon displacement returns to its initial value,
// then holds. `obstacle` overrides cfg.contact.
UncurlResult active_uncurl_scan(const ScenarioConfig& cfg,
                                const ContactSpec& obstacle,
                                const DetectorConfig& det);

}  // namespace tdcr
