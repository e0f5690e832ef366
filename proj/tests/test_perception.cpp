#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "tdcr/control_loop.hpp"
#include "tdcr/perception.hpp"

using namespace tdcr;

namespace {

constexpr double kDt = 1e-3;

std::vector<double> flat(double level, int n) {
  return std::vector<double>(n, level);
}

void append_ramp(std::vector<double>& y, double slope, int n) {
  double v = y.back();
  for (int k = 0; k < n; ++k) y.push_back(v += slope * kDt);
}

void append_flat(std::vector<double>& y, int n) {
  y.insert(y.end(), n, y.back());
}

}  // namespace

TEST_CASE("detector: constant trace produces no events") {
  DetectorConfig cfg;
  const auto ev = detect_contact(flat(1.0, 1000), kDt, cfg);
  CHECK(ev.empty());
  const auto ev0 = detect_contact(flat(0.0, 1000), kDt, cfg);
  CHECK(ev0.empty());
}

TEST_CASE("detector: step exactly at the absolute threshold fires abs") {
  DetectorConfig cfg;
  auto y = flat(10.0, 400);
  y.insert(y.end(), 50, 10.0 + cfg.abs_rise);  // rise exactly 0.8 A
  const auto ev = detect_contact(y, kDt, cfg);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].rule == DetectRule::Abs);
  CHECK(ev[0].time == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(ev[0].baseline == doctest::Approx(10.0));
}

TEST_CASE("detector: 90% of the absolute threshold does not fire") {
  DetectorConfig cfg;
  auto y = flat(10.0, 400);
  append_ramp(y, 3.0, 240);  // +0.72 A over 0.24 s, slope 3 < 6
  append_flat(y, 300);
  CHECK(detect_contact(y, kDt, cfg).empty());
}

TEST_CASE("detector: step exactly at the relative threshold fires rel") {
  DetectorConfig cfg;
  auto y = flat(0.2, 400);
  y.insert(y.end(), 50, 0.2 + cfg.rel_rise * 0.2);  // +50% of baseline
  const auto ev = detect_contact(y, kDt, cfg);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].rule == DetectRule::Rel);
  CHECK(ev[0].baseline == doctest::Approx(0.2));
}

TEST_CASE("detector: 90% of the relative threshold does not fire") {
  DetectorConfig cfg;
  auto y = flat(0.2, 400);
  append_ramp(y, 0.375, 240);  // +0.09 A = 45% of baseline
  append_flat(y, 300);
  CHECK(detect_contact(y, kDt, cfg).empty());
}

TEST_CASE("detector: ramp exactly at the slope threshold fires slope") {
  DetectorConfig cfg;
  auto y = flat(20.0, 400);
  append_ramp(y, cfg.slope, 120);  // rise 0.72 A < abs, < 50% of 20 A
  append_flat(y, 100);
  const auto ev = detect_contact(y, kDt, cfg);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].rule == DetectRule::Slope);
  // fires once the rolling window is fully inside the ramp
  CHECK(ev[0].time > 0.4);
  CHECK(ev[0].time < 0.4 + (cfg.window + 2) * kDt);
}

TEST_CASE("detector: 90% of the slope threshold does not fire") {
  DetectorConfig cfg;
  auto y = flat(20.0, 400);
  append_ramp(y, 0.9 * cfg.slope, 120);
  append_flat(y, 300);
  CHECK(detect_contact(y, kDt, cfg).empty());
}

TEST_CASE("detector: refractory suppresses re-triggers") {
  DetectorConfig cfg;
  auto pulse = [](std::vector<double>& y, int width) {
    y.insert(y.end(), width, y.back() + 1.0);
    y.insert(y.end(), width, y[0]);
  };
  auto y = flat(10.0, 400);
  pulse(y, 10);                       // event 1
  append_flat(y, 180);                // second pulse 0.2 s later: suppressed
  pulse(y, 10);
  append_flat(y, 400);                // third pulse well past refractory
  pulse(y, 10);
  append_flat(y, 50);
  const auto ev = detect_contact(y, kDt, cfg);
  REQUIRE(ev.size() == 2);
  CHECK(ev[1].time - ev[0].time > cfg.refractory);
}

TEST_CASE("detector: rule attribution is deterministic across runs") {
  DetectorConfig cfg;
  auto y = flat(0.5, 400);
  append_ramp(y, 8.0, 150);
  append_flat(y, 400);
  append_ramp(y, -8.0, 150);
  append_flat(y, 400);
  const auto a = detect_contact(y, kDt, cfg);
  const auto b = detect_contact(y, kDt, cfg);
  REQUIRE(a.size() == b.size());
  REQUIRE(!a.empty());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].time == b[k].time);
    CHECK(a[k].rule == b[k].rule);
    CHECK(a[k].value == b[k].value);
    CHECK(a[k].baseline == b[k].baseline);
  }
}

TEST_CASE("detector: streaming and batch application agree") {
  DetectorConfig cfg;
  auto y = flat(1.0, 400);
  y.insert(y.end(), 50, 2.5);
  append_flat(y, 100);
  const auto batch = detect_contact(y, kDt, cfg);
  ContactDetector det(cfg, kDt);
  std::vector<ContactEvent> stream;
  for (double v : y)
    if (auto e = det.push(v)) stream.push_back(*e);
  REQUIRE(batch.size() == stream.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    CHECK(batch[k].time == stream[k].time);
    CHECK(batch[k].rule == stream[k].rule);
  }
}

TEST_CASE("detector: trace shorter than the baseline window is rejected") {
  DetectorConfig cfg;
  CHECK_THROWS_AS(detect_contact(flat(1.0, cfg.baseline_window), kDt, cfg),
                  ConfigError);
}

TEST_CASE("detector config validation") {
  DetectorConfig bad;
  bad.window = 0;
  CHECK_THROWS_AS(ContactDetector(bad, kDt), ConfigError);
  DetectorConfig bad2;
  bad2.refractory = -1.0;
  CHECK_THROWS_AS(ContactDetector(bad2, kDt), ConfigError);
  DetectorConfig good;
  CHECK_THROWS_AS(ContactDetector(good, 0.0), ConfigError);
}

TEST_CASE("apparent_period: pure sinusoid of period 0.1 s") {
  std::vector<double> y;
  for (int k = 0; k < 3000; ++k)
    y.push_back(std::sin(2.0 * M_PI * 10.0 * k * kDt));
  const double p = apparent_period(y, kDt);
  CHECK(std::abs(p - 0.1) <= kDt + 1e-12);
}

TEST_CASE("apparent_period: sinusoid survives a linear trend") {
  std::vector<double> y;
  for (int k = 0; k < 3000; ++k)
    y.push_back(0.5 * k * kDt + std::sin(2.0 * M_PI * 10.0 * k * kDt));
  const double p = apparent_period(y, kDt);
  CHECK(std::abs(p - 0.1) <= kDt + 1e-12);
}

TEST_CASE("apparent_period: white noise is not recoverable") {
  Rng rng(7);
  std::vector<double> y;
  for (int k = 0; k < 3000; ++k) y.push_back(rng.gauss());
  CHECK_THROWS_AS(apparent_period(y, kDt), NumericalError);
}

TEST_CASE("apparent_period: degenerate inputs") {
  CHECK_THROWS_AS(apparent_period(flat(1.0, 8), kDt), ConfigError);
  CHECK_THROWS_AS(apparent_period(flat(1.0, 3000), kDt), NumericalError);
}

TEST_CASE("sensitivity profile: rejects non-impulse scenarios") {
  auto cfg = load_config("scenario = force-step\n");
  CHECK_THROWS_AS(sensitivity_profile(cfg, {2, 8}), ConfigError);
}

TEST_CASE("sensitivity profile: distal contacts shift the current most") {
  const auto cfg = load_config("scenario = single-contact\n");
  const std::vector<int> links = {2, 8, 14, 20, 23};
  const auto shifts = sensitivity_profile(cfg, links);
  REQUIRE(shifts.size() == links.size());
  for (double s : shifts) CHECK(s > 0.0);
  // tip shift dominates the base shift
  CHECK(shifts.back() >= 2.0 * shifts.front());
  // monotone trend along the arm
  std::vector<double> idx(links.begin(), links.end());
  CHECK(spearman(idx, shifts) >= 0.8);
}

TEST_CASE("periodic contact: apparent period degrades toward the base") {
  auto period_at = [](int link) {
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "scenario = periodic-contact\ncontact.link = %d\nseed = 1\n",
                  link);
    const auto cfg = load_config(buf);
    const auto log = run_scenario(cfg);
    const auto& f = log.col("i_obs_dstar_filt_0");
    const auto& t = log.col("t");
    std::vector<double> seg;
    for (std::size_t k = 0; k < t.size(); ++k)
      if (t[k] >= 1.0) seg.push_back(f[k]);
    return apparent_period(seg, cfg.dt);
  };
  const double tip = period_at(23);
  const double mid = period_at(14);
  const double base = period_at(2);
  // the tip follows the true 0.1 s excitation most faithfully
  CHECK(tip >= 0.1);
  CHECK(tip < 0.2);
  CHECK(base > tip);
  const double e_tip = std::abs(tip - 0.1);
  const double e_mid = std::abs(mid - 0.1);
  const double e_base = std::abs(base - 0.1);
  CHECK(e_tip <= e_mid);
  CHECK(e_mid <= e_base);
  CHECK(e_tip < e_base);
}

TEST_CASE("active uncurl: free motion yields no event") {
  const auto cfg = load_config("scenario = active-uncurl\n");
  ContactSpec none;
  none.kind = ContactKind::None;
  DetectorConfig det;
  const auto res = active_uncurl_scan(cfg, none, det);
  CHECK(!res.event.has_value());
  CHECK(res.log.col("t").size() > 1000);
}

TEST_CASE("active uncurl: obstacle triggers one sharp event") {
  const auto cfg = load_config("scenario = active-uncurl\n");
  ContactSpec obs;
  obs.kind = ContactKind::Cylinder;
  obs.cx = 0.18;
  obs.cy = -0.055;
  obs.diameter = 0.04;
  obs.k_pen = 2e4;
  obs.c_pen = 50.0;
  DetectorConfig det;
  const auto res = active_uncurl_scan(cfg, obs, det);
  REQUIRE(res.event.has_value());
  const auto& t = res.log.col("t");
  const auto& c = res.log.col("contact");
  double pen = -1.0;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (c[k] > 0.5) {
      pen = t[k];
      break;
    }
  REQUIRE(pen > 0.0);
  CHECK(res.event->time >= pen);
  CHECK(res.event->time - pen < 0.1);  // latency under 100 ms
}
