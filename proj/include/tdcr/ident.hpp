#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tdcr/config.hpp"

namespace tdcr {

// Drive-train parameter triple, in reporting order.
struct DriveParams {
  double eta = 0.85;  // transmission efficiency
  double b_m = 1e-4;  // rotor viscous damping [N*m*s/rad]
  double J_m = 5e-5;  // rotor inertia [kg*m^2]
};

// Robust current-mismatch fit of [eta, b_m, J_m] against a reference trace.
struct IdentProblem {
  std::vector<double> t_ref;  // timestamps [s]; only used for consistency
  std::vector<double> i_ref;  // measured current trace [A]
  // Excitations are simulated in order and their currents concatenated;
  // the reference trace must have the same total length.
  std::vector<ScenarioConfig> excitations;

  // feasible box
  double eta_lo = 0.6, eta_hi = 1.0;
  double b_m_lo = 1e-5, b_m_hi = 1e-3;
  double J_m_lo = 5e-6, J_m_hi = 5e-4;

  double huber_delta = 0.5;  // robust-loss scale [A]
  int max_evals = 2000;      // total objective-evaluation budget
  int n_starts = 8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct IdentResult {
  DriveParams p_star;
  double objective = 0.0;
  int evaluations = 0;
  // best-so-far objective after every evaluation, per start (non-increasing)
  std::vector<std::vector<double>> start_traces;
};

// Default two-part excitation: a tendon-force step plus a velocity-drive
// ramp, short enough for identification inside a multistart budget.
std::vector<ScenarioConfig> default_excitations();

// Simulates the excitations at p and returns the concatenated reconstructed
// current of tendon 0.
std::vector<double> simulate_current(const IdentProblem& prob,
                                     const DriveParams& p);

// Sum over samples of the squared Huber value of the current mismatch.
// Simulation failure is reported as +infinity.
double ident_objective(const DriveParams& p, const IdentProblem& prob);

// Multistart Nelder-Mead in (eta, log b_m, log J_m) with box projection.
// Deterministic given the problem seed.
IdentResult identify(const IdentProblem& prob);

// Reads a reference current trace from a TimeSeriesLog CSV; accepts the
// column name `i_real` as an alias for `i_obs_dstar_0`.
void load_reference(const std::string& csv_path, std::vector<double>& t_out,
                    std::vector<double>& i_out);

std::string format_ident_report(const IdentProblem& prob,
                                const IdentResult& res);

}  // namespace tdcr
