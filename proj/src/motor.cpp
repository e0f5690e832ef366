#include "tdcr/motor.hpp"

#include <cmath>

namespace tdcr {

std::vector<double> error_ode_oracle(const CurrentControllerGains& g,
                                     const MotorElectricalParams& p,
                                     const std::function<double(double)>& d_dot,
                                     double e0, double edot0, double t_end,
                                     double dt_sample, int substeps) {
  if (!(t_end > 0)) throw ConfigError("error_ode_oracle: t_end must be > 0");
  if (!(dt_sample > 0)) throw ConfigError("error_ode_oracle: dt_sample must be > 0");
  const double a = p.L + g.K_d;
  const double b = p.R + g.K_p;
  const double c = g.K_i;
  if (!(a > 0)) throw ConfigError("error_ode_oracle: L + K_d must be > 0");

  const double h = dt_sample / substeps;
  auto f = [&](double t, double e, double v, double& de, double& dv) {
    de = v;
    dv = (d_dot(t) - b * v - c * e) / a;
  };

  const auto n = static_cast<std::size_t>(std::floor(t_end / dt_sample)) + 1;
  std::vector<double> out;
  out.reserve(n);
  double e = e0, v = edot0, t = 0.0;
  out.push_back(e);
  for (std::size_t k = 1; k < n; ++k) {
    for (int s = 0; s < substeps; ++s) {
      double k1e, k1v, k2e, k2v, k3e, k3v, k4e, k4v;
      f(t, e, v, k1e, k1v);
      f(t + h / 2, e + h / 2 * k1e, v + h / 2 * k1v, k2e, k2v);
      f(t + h / 2, e + h / 2 * k2e, v + h / 2 * k2v, k3e, k3v);
      f(t + h, e + h * k3e, v + h * k3v, k4e, k4v);
      e += h / 6 * (k1e + 2 * k2e + 2 * k3e + k4e);
      v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
      t += h;
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace tdcr
