#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tdcr/control_loop.hpp"
#include "tdcr/motor.hpp"

using namespace tdcr;

TEST_CASE("reflected inertia and damping scale with G^2") {
  TransmissionParams p;
  p.G = 19.0;
  p.J_m = 5e-5;
  p.b_m = 1e-4;
  const auto [J_eq, b_eq] = reflect_params(p);
  CHECK(J_eq == doctest::Approx(19.0 * 19.0 * 5e-5));
  CHECK(b_eq == doctest::Approx(19.0 * 19.0 * 1e-4));

  p.G = 1.0;
  const auto [J1, b1] = reflect_params(p);
  CHECK(J1 == doctest::Approx(p.J_m));
  CHECK(b1 == doctest::Approx(p.b_m));
}

TEST_CASE("output torque scales with eta * G") {
  TransmissionParams p;
  p.G = 19.0;
  p.eta = 0.85;
  CHECK(output_torque(0.2, p) == doctest::Approx(0.85 * 19.0 * 0.2));
  p.eta = 1.0;
  p.G = 1.0;
  CHECK(output_torque(0.2, p) == doctest::Approx(0.2));  // identity limit
}

TEST_CASE("winch kinematics divide by the radius") {
  const auto w = winch_kinematics(0.004, 0.02, -0.5, 0.005);
  CHECK(w.theta_out == doctest::Approx(0.8));
  CHECK(w.theta_out_dot == doctest::Approx(4.0));
  CHECK(w.theta_out_ddot == doctest::Approx(-100.0));
  CHECK_THROWS_AS(winch_kinematics(0.0, 0.0, 0.0, 0.0), ConfigError);
}

TEST_CASE("commanded tendon force: torque balance and the pull-only clamp") {
  TransmissionParams p;  // defaults: G=19, J_m=5e-5, b_m=1e-4, r=0.005
  const auto [J_eq, b_eq] = reflect_params(p);

  WinchSide rest;  // stationary winch: F = tau_eq / r
  CHECK(commanded_tendon_force(0.01, rest, p) ==
        doctest::Approx(0.01 / p.r));

  WinchSide moving;
  moving.theta_out_dot = 0.5;
  moving.theta_out_ddot = 1.0;
  const double expect = (0.05 - J_eq * 1.0 - b_eq * 0.5) / p.r;
  REQUIRE(expect > 0.0);
  CHECK(commanded_tendon_force(0.05, moving, p) == doctest::Approx(expect));

  // inertial + damping load exceeding the drive torque clamps at zero
  WinchSide fast;
  fast.theta_out_dot = 50.0;
  fast.theta_out_ddot = 500.0;
  CHECK(commanded_tendon_force(0.001, fast, p) == doctest::Approx(0.0));
}

TEST_CASE("current reconstruction inverts the forward chain exactly") {
  TransmissionParams p;
  const double k_t = 0.09;
  // forward: i -> tau_m -> tau_eq -> F (with known winch kinematics),
  // then reconstruct i from (theta_ddot, theta_dot, F).
  for (double i : {0.05, 0.3, 1.2, 4.9}) {
    WinchSide w;
    w.theta_out_dot = 1.7;
    w.theta_out_ddot = -12.0;
    const double tau_eq = output_torque(torque_from_current(i, {}), p);
    const double F = commanded_tendon_force(tau_eq, w, p);
    REQUIRE(F > 0.0);  // keep clear of the clamp so the identity is exact
    CHECK(reconstruct_current(w, F, p, k_t) == doctest::Approx(i).epsilon(1e-12));
  }
}

TEST_CASE("reconstruction identity holds through step_jb") {
  TransmissionParams p;
  const double k_t = 0.09;
  WinchSide w;
  w.theta_out_dot = 0.4;
  w.theta_out_ddot = 3.0;
  const double i_star = 0.8;
  const double F = step_jb(i_star, w, p, k_t);
  REQUIRE(F > 0.0);
  CHECK(reconstruct_current(w, F, p, k_t) ==
        doctest::Approx(i_star).epsilon(1e-12));
}

TEST_CASE("direct drive (G = 1) multiplies force sensitivity per ampere") {
  TransmissionParams geared;  // G = 19
  TransmissionParams direct = geared;
  direct.G = 1.0;
  WinchSide rest;
  const double k_t = 0.09;
  const double F_geared = step_jb(1.0, rest, geared, k_t);
  const double F_direct = step_jb(1.0, rest, direct, k_t);
  // force per ampere scales with eta*G*k_t/r
  CHECK(F_geared / F_direct == doctest::Approx(19.0).epsilon(1e-12));
  // and the same external force change maps to a 19x smaller current change
  const double dF = 0.5;
  const double di_geared = reconstruct_current(rest, dF, geared, k_t);
  const double di_direct = reconstruct_current(rest, dF, direct, k_t);
  CHECK(di_direct / di_geared == doctest::Approx(19.0).epsilon(1e-12));
}

TEST_CASE("parameter validation bounds") {
  TransmissionParams p;
  p.eta = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.eta = 1.1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.eta = 1.0;
  CHECK_NOTHROW(p.validate());
  p.G = 0.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
