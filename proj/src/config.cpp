#include "tdcr/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

namespace tdcr {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double Rng::gauss() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double mag = std::sqrt(-2.0 * std::log(u1));
  spare_ = mag * std::sin(2.0 * M_PI * u2);
  has_spare_ = true;
  return mag * std::cos(2.0 * M_PI * u2);
}

std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::ForceStep: return "force-step";
    case ScenarioKind::ExtremeCurl: return "extreme-curl";
    case ScenarioKind::SingleContact: return "single-contact";
    case ScenarioKind::PeriodicContact: return "periodic-contact";
    case ScenarioKind::ActiveUncurl: return "active-uncurl";
    case ScenarioKind::WrapCylinder: return "wrap-cylinder";
  }
  return "?";
}

std::string to_string(FeedbackVariant v) {
  switch (v) {
    case FeedbackVariant::Current: return "current";
    case FeedbackVariant::Displacement: return "displacement";
    case FeedbackVariant::Velocity: return "velocity";
    case FeedbackVariant::Force: return "force";
  }
  return "?";
}

std::string to_string(ContactKind k) {
  switch (k) {
    case ContactKind::None: return "none";
    case ContactKind::PointImpulse: return "point-impulse";
    case ContactKind::RotatingPusher: return "rotating-pusher";
    case ContactKind::Cylinder: return "cylinder";
  }
  return "?";
}

std::string to_string(DisturbanceKind k) {
  switch (k) {
    case DisturbanceKind::None: return "none";
    case DisturbanceKind::Sine: return "sine";
    case DisturbanceKind::Noise: return "noise";
  }
  return "?";
}

static ScenarioKind parse_scenario(const std::string& s) {
  for (auto k : {ScenarioKind::ForceStep, ScenarioKind::ExtremeCurl,
                 ScenarioKind::SingleContact, ScenarioKind::PeriodicContact,
                 ScenarioKind::ActiveUncurl, ScenarioKind::WrapCylinder})
    if (to_string(k) == s) return k;
  throw ConfigError("scenario: unknown scenario kind '" + s + "'");
}

static FeedbackVariant parse_variant(const std::string& key, const std::string& s) {
  for (auto v : {FeedbackVariant::Current, FeedbackVariant::Displacement,
                 FeedbackVariant::Velocity, FeedbackVariant::Force})
    if (to_string(v) == s) return v;
  throw ConfigError(key + ": unknown feedback mode '" + s + "'");
}

static ContactKind parse_contact(const std::string& key, const std::string& s) {
  for (auto k : {ContactKind::None, ContactKind::PointImpulse,
                 ContactKind::RotatingPusher, ContactKind::Cylinder})
    if (to_string(k) == s) return k;
  throw ConfigError(key + ": unknown contact kind '" + s + "'");
}

static DisturbanceKind parse_dist(const std::string& key, const std::string& s) {
  for (auto k : {DisturbanceKind::None, DisturbanceKind::Sine, DisturbanceKind::Noise})
    if (to_string(k) == s) return k;
  throw ConfigError(key + ": unknown disturbance kind '" + s + "'");
}

void ContactSpec::validate() const {
  if (link_index < 0 || link_index >= kNumJoints)
    throw ConfigError("contact.link must be in [0, 24)");
  if (kind == ContactKind::Cylinder && !(diameter > 0))
    throw ConfigError("contact.diameter must be > 0 for cylinder contact");
  if (kind == ContactKind::RotatingPusher && !(period > 0))
    throw ConfigError("contact.period must be > 0");
  if (!(duty > 0 && duty < 1)) throw ConfigError("contact.duty must be in (0, 1)");
  if (!(k_pen > 0)) throw ConfigError("contact.k_pen must be > 0");
  if (c_pen < 0) throw ConfigError("contact.c_pen must be >= 0");
}

void DetectorConfig::validate() const {
  if (!(abs_rise > 0)) throw ConfigError("det.abs_rise must be > 0");
  if (!(rel_rise > 0)) throw ConfigError("det.rel_rise must be > 0");
  if (!(slope > 0)) throw ConfigError("det.slope must be > 0");
  if (window < 2) throw ConfigError("det.window must be >= 2");
  if (baseline_window < 2) throw ConfigError("det.baseline_window must be >= 2");
  if (refractory < 0) throw ConfigError("det.refractory must be >= 0");
}

ContinuumModel ScenarioConfig::make_continuum_model() const {
  ContinuumModel m = ContinuumModel::tapered(c_l_base, c_lambda, c_m_base,
                                             c_k_base, c_d_base, c_b_base);
  m.joint_limit = joint_limit;
  m.limit_stiffness = limit_stiffness;
  m.gravity = Vec2(gravity_x, gravity_y);
  m.validate();
  return m;
}

void ScenarioConfig::validate() const {
  if (!(dt > 0)) throw ConfigError("dt must be > 0");
  if (!(duration > 0)) throw ConfigError("duration must be > 0");
  if (n_sub < 1) throw ConfigError("n_sub must be >= 1");
  if (filter_window < 1) throw ConfigError("filter.window must be >= 1");
  if (!(u_max > 0)) throw ConfigError("u_max must be > 0");
  if (!(tau_F > 0)) throw ConfigError("tau_F must be > 0");
  if (meas_noise_std < 0) throw ConfigError("meas.noise_std must be >= 0");
  motor.validate();
  gains.validate();
  trans.validate();
  contact.validate();
  det.validate();
  make_continuum_model();
}

namespace {

// Table-driven key registry so parsing, serialization and the unknown-key
// check share one source of truth.
struct KeyBinding {
  std::string key;
  std::function<void(ScenarioConfig&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

double parse_number(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": malformed numeric value '" + s + "'");
  }
}

std::vector<KeyBinding> make_registry() {
  std::vector<KeyBinding> reg;
  auto num = [&reg](const std::string& key, double ScenarioConfig::* f) {
    reg.push_back({key,
                   [key, f](ScenarioConfig& c, const std::string& s) {
                     c.*f = parse_number(key, s);
                   },
                   [f](const ScenarioConfig& c) { return format_double(c.*f); }});
  };
  auto integer = [&reg](const std::string& key, int ScenarioConfig::* f) {
    reg.push_back({key,
                   [key, f](ScenarioConfig& c, const std::string& s) {
                     const double v = parse_number(key, s);
                     if (v != std::floor(v))
                       throw ConfigError(key + ": expected an integer");
                     c.*f = static_cast<int>(v);
                   },
                   [f](const ScenarioConfig& c) { return std::to_string(c.*f); }});
  };
  auto sub = [&reg](const std::string& key, auto member, auto field) {
    using M = std::decay_t<decltype(std::declval<ScenarioConfig>().*member)>;
    using F = std::decay_t<decltype(std::declval<M>().*field)>;
    reg.push_back({key,
                   [key, member, field](ScenarioConfig& c, const std::string& s) {
                     if constexpr (std::is_same_v<F, int>) {
                       const double v = parse_number(key, s);
                       if (v != std::floor(v))
                         throw ConfigError(key + ": expected an integer");
                       c.*member.*field = static_cast<int>(v);
                     } else {
                       c.*member.*field = parse_number(key, s);
                     }
                   },
                   [member, field](const ScenarioConfig& c) {
                     if constexpr (std::is_same_v<F, int>)
                       return std::to_string(c.*member.*field);
                     else
                       return format_double(c.*member.*field);
                   }});
  };

  reg.push_back({"scenario",
                 [](ScenarioConfig& c, const std::string& s) {
                   c.scenario = parse_scenario(s);
                 },
                 [](const ScenarioConfig& c) { return to_string(c.scenario); }});
  num("dt", &ScenarioConfig::dt);
  num("duration", &ScenarioConfig::duration);
  reg.push_back({"seed",
                 [](ScenarioConfig& c, const std::string& s) {
                   try {
                     c.seed = std::stoull(s);
                   } catch (const std::exception&) {
                     throw ConfigError("seed: malformed numeric value '" + s + "'");
                   }
                 },
                 [](const ScenarioConfig& c) { return std::to_string(c.seed); }});
  integer("n_sub", &ScenarioConfig::n_sub);
  integer("filter.window", &ScenarioConfig::filter_window);
  reg.push_back({"baseline",
                 [](ScenarioConfig& c, const std::string& s) {
                   if (s == "true" || s == "1") c.baseline = true;
                   else if (s == "false" || s == "0") c.baseline = false;
                   else throw ConfigError("baseline: expected true/false");
                 },
                 [](const ScenarioConfig& c) {
                   return std::string(c.baseline ? "true" : "false");
                 }});
  num("init_q", &ScenarioConfig::init_q);
  num("u_max", &ScenarioConfig::u_max);
  num("tau_F", &ScenarioConfig::tau_F);
  num("meas.noise_std", &ScenarioConfig::meas_noise_std);

  sub("motor.L", &ScenarioConfig::motor, &MotorElectricalParams::L);
  sub("motor.R", &ScenarioConfig::motor, &MotorElectricalParams::R);
  sub("motor.k_e", &ScenarioConfig::motor, &MotorElectricalParams::k_e);
  sub("motor.k_t", &ScenarioConfig::motor, &MotorElectricalParams::k_t);
  sub("motor.i_sat", &ScenarioConfig::motor, &MotorElectricalParams::i_sat);

  sub("gains.kp", &ScenarioConfig::gains, &CurrentControllerGains::K_p);
  sub("gains.ki", &ScenarioConfig::gains, &CurrentControllerGains::K_i);
  sub("gains.kd", &ScenarioConfig::gains, &CurrentControllerGains::K_d);

  sub("trans.G", &ScenarioConfig::trans, &TransmissionParams::G);
  sub("trans.eta", &ScenarioConfig::trans, &TransmissionParams::eta);
  sub("trans.J_m", &ScenarioConfig::trans, &TransmissionParams::J_m);
  sub("trans.b_m", &ScenarioConfig::trans, &TransmissionParams::b_m);
  sub("trans.r", &ScenarioConfig::trans, &TransmissionParams::r);

  num("continuum.l_base", &ScenarioConfig::c_l_base);
  num("continuum.lambda", &ScenarioConfig::c_lambda);
  num("continuum.m_base", &ScenarioConfig::c_m_base);
  num("continuum.k_base", &ScenarioConfig::c_k_base);
  num("continuum.d_base", &ScenarioConfig::c_d_base);
  num("continuum.b_base", &ScenarioConfig::c_b_base);
  num("continuum.joint_limit", &ScenarioConfig::joint_limit);
  num("continuum.limit_stiffness", &ScenarioConfig::limit_stiffness);
  num("continuum.gravity_x", &ScenarioConfig::gravity_x);
  num("continuum.gravity_y", &ScenarioConfig::gravity_y);

  for (int i = 0; i < kNumTendons; ++i) {
    const std::string p = "fb.mode_" + std::to_string(i);
    reg.push_back({p,
                   [p, i](ScenarioConfig& c, const std::string& s) {
                     c.fb[i].mode = parse_variant(p, s);
                   },
                   [i](const ScenarioConfig& c) { return to_string(c.fb[i].mode); }});
    auto fbnum = [&reg, i](const std::string& key, double FeedbackChannel::* f) {
      reg.push_back({key,
                     [key, i, f](ScenarioConfig& c, const std::string& s) {
                       c.fb[i].*f = parse_number(key, s);
                     },
                     [i, f](const ScenarioConfig& c) {
                       return format_double(c.fb[i].*f);
                     }});
    };
    const std::string sfx = "_" + std::to_string(i);
    fbnum("fb.set" + sfx, &FeedbackChannel::setpoint);
    fbnum("fb.onset" + sfx, &FeedbackChannel::onset);
    fbnum("fb.kp" + sfx, &FeedbackChannel::kp);
    fbnum("fb.ki" + sfx, &FeedbackChannel::ki);
  }

  reg.push_back({"contact.kind",
                 [](ScenarioConfig& c, const std::string& s) {
                   c.contact.kind = parse_contact("contact.kind", s);
                 },
                 [](const ScenarioConfig& c) { return to_string(c.contact.kind); }});
  reg.push_back({"contact.link",
                 [](ScenarioConfig& c, const std::string& s) {
                   const double v = parse_number("contact.link", s);
                   if (v != std::floor(v))
                     throw ConfigError("contact.link: expected an integer");
                   c.contact.link_index = static_cast<int>(v);
                 },
                 [](const ScenarioConfig& c) {
                   return std::to_string(c.contact.link_index);
                 }});
  auto cnum = [&reg](const std::string& key, double ContactSpec::* f) {
    reg.push_back({key,
                   [key, f](ScenarioConfig& c, const std::string& s) {
                     c.contact.*f = parse_number(key, s);
                   },
                   [f](const ScenarioConfig& c) {
                     return format_double(c.contact.*f);
                   }});
  };
  cnum("contact.force", &ContactSpec::force);
  cnum("contact.impulse", &ContactSpec::impulse);
  cnum("contact.onset", &ContactSpec::onset);
  cnum("contact.period", &ContactSpec::period);
  cnum("contact.duty", &ContactSpec::duty);
  cnum("contact.cx", &ContactSpec::cx);
  cnum("contact.cy", &ContactSpec::cy);
  cnum("contact.diameter", &ContactSpec::diameter);
  cnum("contact.k_pen", &ContactSpec::k_pen);
  cnum("contact.c_pen", &ContactSpec::c_pen);

  reg.push_back({"dist.kind",
                 [](ScenarioConfig& c, const std::string& s) {
                   c.dist.kind = parse_dist("dist.kind", s);
                 },
                 [](const ScenarioConfig& c) { return to_string(c.dist.kind); }});
  auto dnum = [&reg](const std::string& key, double DisturbanceSpec::* f) {
    reg.push_back({key,
                   [key, f](ScenarioConfig& c, const std::string& s) {
                     c.dist.*f = parse_number(key, s);
                   },
                   [f](const ScenarioConfig& c) { return format_double(c.dist.*f); }});
  };
  dnum("dist.amp", &DisturbanceSpec::amp);
  dnum("dist.freq", &DisturbanceSpec::freq);
  dnum("dist.std", &DisturbanceSpec::std);

  auto detnum = [&reg](const std::string& key, double DetectorConfig::* f) {
    reg.push_back({key,
                   [key, f](ScenarioConfig& c, const std::string& s) {
                     c.det.*f = parse_number(key, s);
                   },
                   [f](const ScenarioConfig& c) { return format_double(c.det.*f); }});
  };
  detnum("det.abs_rise", &DetectorConfig::abs_rise);
  detnum("det.rel_rise", &DetectorConfig::rel_rise);
  detnum("det.slope", &DetectorConfig::slope);
  detnum("det.refractory", &DetectorConfig::refractory);
  auto detint = [&reg](const std::string& key, int DetectorConfig::* f) {
    reg.push_back({key,
                   [key, f](ScenarioConfig& c, const std::string& s) {
                     const double v = parse_number(key, s);
                     if (v != std::floor(v))
                       throw ConfigError(key + ": expected an integer");
                     c.det.*f = static_cast<int>(v);
                   },
                   [f](const ScenarioConfig& c) { return std::to_string(c.det.*f); }});
  };
  detint("det.window", &DetectorConfig::window);
  detint("det.baseline_window", &DetectorConfig::baseline_window);

  return reg;
}

const std::vector<KeyBinding>& registry() {
  static const std::vector<KeyBinding> reg = make_registry();
  return reg;
}

// Scenario-kind defaults; applied before user overrides.
void apply_scenario_defaults(ScenarioConfig& c) {
  switch (c.scenario) {
    case ScenarioKind::ForceStep:
      c.duration = 2.0;
      c.fb[0] = {FeedbackVariant::Force, 1.0, 0.1, 0.0003, 0.15};
      c.fb[1] = {FeedbackVariant::Current, 0.0, 0.0, 0.0, 0.0};
      break;
    case ScenarioKind::ExtremeCurl:
      c.duration = 3.5;
      c.fb[0] = {FeedbackVariant::Velocity, 0.02, 0.0, 20.0, 150.0};
      c.fb[1] = {FeedbackVariant::Current, 0.02, 0.0, 0.0, 0.0};
      break;
    case ScenarioKind::SingleContact:
      c.duration = 2.5;
      c.trans.G = 1.0;
      c.fb[0] = {FeedbackVariant::Current, 0.3, 0.0, 0.0, 0.0};
      c.fb[1] = {FeedbackVariant::Current, 0.3, 0.0, 0.0, 0.0};
      c.contact.kind = ContactKind::PointImpulse;
      c.contact.link_index = kNumJoints - 1;
      c.contact.impulse = 0.002;
      c.contact.onset = 1.0;
      break;
    case ScenarioKind::PeriodicContact:
      c.duration = 4.0;
      c.trans.G = 1.0;
      c.filter_window = 14;
      c.fb[0] = {FeedbackVariant::Current, 0.3, 0.0, 0.0, 0.0};
      c.fb[1] = {FeedbackVariant::Current, 0.3, 0.0, 0.0, 0.0};
      c.contact.kind = ContactKind::RotatingPusher;
      c.contact.link_index = kNumJoints - 1;
      c.contact.force = 0.01;
      c.contact.onset = 0.5;
      c.contact.period = 0.1;
      c.meas_noise_std = 1.5e-6;
      break;
    case ScenarioKind::ActiveUncurl:
      c.duration = 1.1;
      c.init_q = 0.3;
      c.filter_window = 20;
      c.fb[0] = {FeedbackVariant::Current, 0.02, 0.0, 0.0, 0.0};
      c.fb[1] = {FeedbackVariant::Velocity, 0.05, 0.2, 20.0, 150.0};
      break;
    case ScenarioKind::WrapCylinder:
      c.duration = 4.0;
      c.fb[0] = {FeedbackVariant::Velocity, 0.008, 0.0, 20.0, 150.0};
      c.fb[1] = {FeedbackVariant::Current, 0.0, 0.0, 0.0, 0.0};
      c.contact.kind = ContactKind::Cylinder;
      c.contact.cx = 0.07;
      c.contact.cy = 0.055;
      c.contact.diameter = 0.04;
      // a stiff object arrests the wrap at a diameter-dependent curl; the
      // softer default would let the frictionless arm squeeze past
      c.contact.k_pen = 2e4;
      c.contact.c_pen = 50.0;
      break;
  }
}

}  // namespace

ScenarioConfig load_config(const std::string& text) {
  // First pass: collect key/value pairs, find the scenario kind.
  std::vector<std::pair<std::string, std::string>> pairs;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    pairs.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }

  ScenarioConfig cfg;
  bool scenario_seen = false;
  for (const auto& [k, v] : pairs) {
    if (k == "scenario") {
      cfg.scenario = parse_scenario(v);
      scenario_seen = true;
    }
  }
  if (!scenario_seen) throw ConfigError("scenario: key is required");
  apply_scenario_defaults(cfg);

  std::map<std::string, const KeyBinding*> by_key;
  for (const auto& b : registry()) by_key[b.key] = &b;
  for (const auto& [k, v] : pairs) {
    const auto it = by_key.find(k);
    if (it == by_key.end()) throw ConfigError(k + ": unknown config key");
    it->second->set(cfg, v);
  }
  cfg.validate();
  return cfg;
}

std::string ScenarioConfig::serialize() const {
  std::string out;
  for (const auto& b : registry()) {
    out += b.key;
    out += " = ";
    out += b.get(*this);
    out += '\n';
  }
  return out;
}

std::vector<double> moving_average(const std::vector<double>& x, int window) {
  if (window < 1) throw ConfigError("moving_average: window must be >= 1");
  std::vector<double> out(x.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sum += x[k];
    if (k >= static_cast<std::size_t>(window)) sum -= x[k - window];
    const std::size_t n = std::min<std::size_t>(k + 1, window);
    out[k] = sum / static_cast<double>(n);
  }
  return out;
}

MovingAverage::MovingAverage(int window) : window_(window) {
  if (window < 1) throw ConfigError("moving_average: window must be >= 1");
  buf_.assign(static_cast<std::size_t>(window), 0.0);
}

double MovingAverage::push(double v) {
  // Same accumulation order as the batch moving_average, so the streamed
  // and batch results are bit-identical.
  const std::size_t idx = count_ % buf_.size();
  const double old = buf_[idx];
  buf_[idx] = v;
  sum_ += v;
  if (count_ >= buf_.size()) sum_ -= old;
  ++count_;
  return sum_ / static_cast<double>(std::min(count_, buf_.size()));
}

}  // namespace tdcr
