#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tdcr/config.hpp"
#include "tdcr/control_loop.hpp"
#include "tdcr/log.hpp"

using namespace tdcr;

TEST_CASE("minimal config gets scenario defaults") {
  const auto cfg = load_config("scenario = force-step\n");
  CHECK(cfg.dt == doctest::Approx(0.001));
  CHECK(cfg.filter_window == 100);
  CHECK(cfg.trans.G == doctest::Approx(19.0));
  CHECK(cfg.motor.i_sat == doctest::Approx(5.0));
}

TEST_CASE("config errors name the offending key") {
  CHECK_THROWS_WITH_AS(load_config("scenario = force-step\ndt = 0\n"),
                       doctest::Contains("dt"), ConfigError);
  CHECK_THROWS_WITH_AS(load_config("scenario = warp-drive\n"),
                       doctest::Contains("scenario"), ConfigError);
  CHECK_THROWS_WITH_AS(load_config("scenario = force-step\nbogus.key = 1\n"),
                       doctest::Contains("bogus.key"), ConfigError);
  CHECK_THROWS_WITH_AS(load_config("scenario = force-step\nmotor.R = abc\n"),
                       doctest::Contains("motor.R"), ConfigError);
  CHECK_THROWS_AS(load_config("dt = 0.001\n"), ConfigError);  // no scenario
}

TEST_CASE("G override enables direct-drive mode") {
  const auto cfg = load_config("scenario = single-contact\ntrans.G = 1\n");
  CHECK(cfg.trans.G == doctest::Approx(1.0));
}

TEST_CASE("config round-trip is field-identical") {
  const auto cfg = load_config(
      "scenario = wrap-cylinder\n"
      "dt = 0.0005\n"
      "seed = 1234\n"
      "trans.eta = 0.73\n"
      "contact.diameter = 0.0315\n"
      "fb.mode_0 = velocity\n"
      "fb.set_0 = 0.0123\n");
  const auto again = load_config(cfg.serialize());
  CHECK(cfg.serialize() == again.serialize());
  CHECK(again.trans.eta == cfg.trans.eta);
  CHECK(again.contact.diameter == cfg.contact.diameter);
  CHECK(again.seed == cfg.seed);
}

TEST_CASE("moving average: constants, steps, identity") {
  // constant preserved
  std::vector<double> c(300, 2.0);
  for (double v : moving_average(c, 100)) CHECK(v == doctest::Approx(2.0));

  // unit step at k = 0 with prefix-mean warm-up stays at 1
  std::vector<double> s0(10, 1.0);
  for (double v : moving_average(s0, 4)) CHECK(v == doctest::Approx(1.0));

  // unit step at k = 2 of a zero prefix: 0, 0, 1/3, 2/4, ...
  std::vector<double> s2 = {0, 0, 1, 1, 1, 1};
  const auto y = moving_average(s2, 4);
  CHECK(y[0] == doctest::Approx(0.0));
  CHECK(y[1] == doctest::Approx(0.0));
  CHECK(y[2] == doctest::Approx(1.0 / 3.0));
  CHECK(y[3] == doctest::Approx(2.0 / 4.0));
  CHECK(y[4] == doctest::Approx(3.0 / 4.0));

  // window 1 is the identity
  std::vector<double> x = {3.0, -1.5, 2.25, 0.0};
  CHECK(moving_average(x, 1) == x);

  CHECK_THROWS_AS(moving_average(x, 0), ConfigError);
}

TEST_CASE("moving average is linear") {
  Rng rng(7);
  std::vector<double> x(257), y(257);
  for (auto& v : x) v = rng.uniform(-1, 1);
  for (auto& v : y) v = rng.uniform(-1, 1);
  const double a = 2.5, b = -0.75;
  for (int window : {1, 3, 17, 100}) {
    std::vector<double> z(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) z[k] = a * x[k] + b * y[k];
    const auto mz = moving_average(z, window);
    const auto mx = moving_average(x, window);
    const auto my = moving_average(y, window);
    for (std::size_t k = 0; k < x.size(); ++k)
      CHECK(mz[k] == doctest::Approx(a * mx[k] + b * my[k]).epsilon(1e-12));
  }
}

TEST_CASE("streaming moving average matches the batch filter bit-exactly") {
  Rng rng(11);
  std::vector<double> x(500);
  for (auto& v : x) v = rng.gauss();
  MovingAverage ma(100);
  const auto batch = moving_average(x, 100);
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(ma.push(x[k]) == batch[k]);
}

TEST_CASE("identical config and seed give byte-identical logs") {
  const auto cfg = load_config(
      "scenario = single-contact\nduration = 0.2\nseed = 99\n"
      "meas.noise_std = 0.01\n");
  const auto a = run_scenario(cfg).to_csv();
  const auto b = run_scenario(cfg).to_csv();
  CHECK(a == b);
  CHECK(a.find("# tdcr-log-1") == 0);
}

TEST_CASE("log row count and spacing") {
  const auto cfg = load_config("scenario = force-step\nduration = 0.1\n");
  const auto log = run_scenario(cfg);
  CHECK(log.rows() == 101);  // floor(duration/dt) + 1
  const auto& t = log.col("t");
  for (std::size_t k = 1; k < t.size(); ++k)
    CHECK(t[k] - t[k - 1] == doctest::Approx(cfg.dt).epsilon(1e-9));
}

TEST_CASE("log csv round-trips through load") {
  const auto cfg = load_config("scenario = force-step\nduration = 0.05\n");
  auto log = run_scenario(cfg);
  log.save_csv("/tmp/tdcr_test_log.csv");
  const auto back = TimeSeriesLog::load_csv("/tmp/tdcr_test_log.csv");
  CHECK(back.columns == log.columns);
  REQUIRE(back.rows() == log.rows());
  for (std::size_t c = 0; c < log.columns.size(); ++c)
    for (std::size_t r = 0; r < log.rows(); ++r)
      CHECK(back.data[c][r] == log.data[c][r]);
}
