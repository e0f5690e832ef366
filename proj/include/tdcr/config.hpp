#pragma once

#include <cstdint>
#include <string>

#include "tdcr/types.hpp"

namespace tdcr {

enum class ScenarioKind {
  ForceStep,
  ExtremeCurl,
  SingleContact,
  PeriodicContact,
  ActiveUncurl,
  WrapCylinder,
};

enum class FeedbackVariant { Current, Displacement, Velocity, Force };

enum class ContactKind { None, PointImpulse, RotatingPusher, Cylinder };

enum class DisturbanceKind { None, Sine, Noise };

std::string to_string(ScenarioKind k);
std::string to_string(FeedbackVariant v);
std::string to_string(ContactKind k);
std::string to_string(DisturbanceKind k);

// One tendon channel of the outer loop: feedback variant, constant setpoint
// engaged at `onset`, and PI gains mapping the mechanical error to current.
struct FeedbackChannel {
  FeedbackVariant mode = FeedbackVariant::Current;
  double setpoint = 0.0;
  double onset = 0.0;  // setpoint is 0 before this time [s]
  double kp = 0.0;
  double ki = 0.0;
};

// External contact description for a scenario.
struct ContactSpec {
  ContactKind kind = ContactKind::None;
  int link_index = kNumJoints - 1;
  double force = 0.0;    // pusher normal force [N]
  double impulse = 0.0;  // point impulse [N*s]
  double onset = 0.0;    // [s]
  double period = 0.1;   // pusher period [s]
  double duty = 0.5;     // pusher on-fraction of the period
  double cx = 0.0, cy = 0.0;  // cylinder center [m]
  double diameter = 0.0;      // cylinder diameter [m]
  double k_pen = 2000.0;      // penalty stiffness [N/m]
  double c_pen = 8.0;         // penalty damping [N*s/m]

  void validate() const;
};

// Additive voltage disturbance d(t) in the motor circuit.
struct DisturbanceSpec {
  DisturbanceKind kind = DisturbanceKind::None;
  double amp = 0.0;   // sine amplitude [V]
  double freq = 1.0;  // sine frequency [Hz]
  double std = 0.0;   // noise standard deviation [V]
};

// Rate-based contact detector thresholds (defaults per the adaptive rule:
// absolute rise, relative rise of baseline, slope).
struct DetectorConfig {
  double abs_rise = 0.8;      // [A]
  double rel_rise = 0.5;      // fraction of baseline
  double slope = 6.0;         // [A/s]
  int window = 50;            // rolling slope window [samples]
  int baseline_window = 200;  // rolling-median baseline [samples]
  double refractory = 0.3;    // [s]

  void validate() const;
};

// Declarative experiment description. All defaults are config-overridable.
struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::ForceStep;
  double dt = 0.001;      // 1 kHz control loop
  double duration = 2.0;  // [s]
  std::uint64_t seed = 0;
  int n_sub = 10;            // plant substeps per control cycle
  int filter_window = 100;   // moving-average window [samples]
  bool baseline = false;     // single robot-dynamics comparison model
  double init_q = 0.0;       // uniform initial joint angle [rad]
  double u_max = 24.0;       // supply voltage bound [V]
  double tau_F = 0.02;       // tendon-force tracker time constant [s]
  double meas_noise_std = 0.0;  // noise on logged reconstructed current [A]

  MotorElectricalParams motor;
  CurrentControllerGains gains;
  TransmissionParams trans;

  // Continuum taper parameters (the full per-joint arrays derive from these).
  double c_l_base = 0.02, c_lambda = 0.93, c_m_base = 0.01, c_k_base = 0.05,
         c_d_base = 0.006, c_b_base = 0.004;
  double joint_limit = 0.35, limit_stiffness = 200.0;
  double gravity_x = 0.0, gravity_y = 0.0;

  FeedbackChannel fb[kNumTendons];
  ContactSpec contact;
  DisturbanceSpec dist;
  DetectorConfig det;

  ContinuumModel make_continuum_model() const;
  void validate() const;

  // Serializes every resolved key; reloading the result yields
  // field-identical values.
  std::string serialize() const;
};

// Parses a flat key = value document (dotted sections, '#' comments).
// Scenario-kind defaults are applied first, then overrides from the
// document. Unknown keys and malformed values are errors naming the key.
ScenarioConfig load_config(const std::string& text);

// Causal moving average: output[k] = mean of the last min(k+1, window)
// inputs. The warm-up uses the available prefix rather than zero padding.
std::vector<double> moving_average(const std::vector<double>& x, int window);

// Streaming counterpart with identical semantics, used by the online log.
class MovingAverage {
 public:
  explicit MovingAverage(int window);
  double push(double v);

 private:
  int window_;
  std::vector<double> buf_;
  std::size_t count_ = 0;
  double sum_ = 0.0;
};

}  // namespace tdcr
