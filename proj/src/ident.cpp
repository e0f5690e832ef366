#include "tdcr/ident.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tdcr/control_loop.hpp"
#include "tdcr/log.hpp"

namespace tdcr {

namespace {

double huber(double x, double delta) {
  const double a = std::abs(x);
  return a <= delta ? 0.5 * x * x : delta * (a - 0.5 * delta);
}

}  // namespace

void IdentProblem::validate() const {
  if (i_ref.empty()) throw ConfigError("ident: empty reference trace");
  if (!t_ref.empty() && t_ref.size() != i_ref.size())
    throw ConfigError("ident: timestamp/current length mismatch");
  if (excitations.empty()) throw ConfigError("ident: no excitation scenarios");
  if (!(eta_lo < eta_hi) || !(b_m_lo < b_m_hi) || !(J_m_lo < J_m_hi))
    throw ConfigError("ident: empty feasible box");
  if (!(huber_delta > 0)) throw ConfigError("ident: huber_delta must be > 0");
  if (max_evals < 1 || n_starts < 1)
    throw ConfigError("ident: budget and start count must be positive");
  for (const auto& cfg : excitations) cfg.validate();
}

std::vector<ScenarioConfig> default_excitations() {
  // Short force step: excites the steady torque balance (eta, b_m).
  auto step = load_config(
      "scenario = force-step\n"
      "duration = 0.5\n"
      "n_sub = 4\n"
      "fb.onset_0 = 0.05\n");
  // Velocity-drive ramp: the acceleration transient makes J_m observable.
  auto ramp = load_config(
      "scenario = extreme-curl\n"
      "duration = 0.5\n"
      "n_sub = 4\n"
      "fb.set_0 = 0.01\n"
      "fb.onset_0 = 0.05\n");
  return {step, ramp};
}

std::vector<double> simulate_current(const IdentProblem& prob,
                                     const DriveParams& p) {
  std::vector<double> out;
  for (const auto& base : prob.excitations) {
    ScenarioConfig cfg = base;
    cfg.trans.eta = p.eta;
    cfg.trans.b_m = p.b_m;
    cfg.trans.J_m = p.J_m;
    const TimeSeriesLog log = run_scenario(cfg);
    const auto& i = log.col("i_obs_dstar_0");
    out.insert(out.end(), i.begin(), i.end());
  }
  return out;
}

double ident_objective(const DriveParams& p, const IdentProblem& prob) {
  std::vector<double> i_sim;
  try {
    i_sim = simulate_current(prob, p);
  } catch (const std::exception&) {
    return std::numeric_limits<double>::infinity();
  }
  if (i_sim.size() != prob.i_ref.size())
    throw ConfigError("ident: reference length does not match excitation");
  double loss = 0.0;
  for (std::size_t k = 0; k < i_sim.size(); ++k) {
    const double rho = huber(i_sim[k] - prob.i_ref[k], prob.huber_delta);
    loss += rho * rho;
  }
  return std::isfinite(loss) ? loss
                             : std::numeric_limits<double>::infinity();
}

namespace {

using Coord = std::array<double, 3>;  // (eta, log b_m, log J_m)

struct Box {
  double lo[3], hi[3];

  Coord project(Coord x) const {
    for (int i = 0; i < 3; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    return x;
  }
};

DriveParams to_params(const Coord& x) {
  return {x[0], std::exp(x[1]), std::exp(x[2])};
}

}  // namespace

IdentResult identify(const IdentProblem& prob) {
  prob.validate();

  // The lower bounds are open; keep iterates strictly inside by a hair.
  constexpr double kEps = 1e-9;
  const Box box{{prob.eta_lo + kEps, std::log(prob.b_m_lo) + kEps,
                 std::log(prob.J_m_lo) + kEps},
                {prob.eta_hi, std::log(prob.b_m_hi) - kEps,
                 std::log(prob.J_m_hi) - kEps}};

  Rng rng(prob.seed);
  std::vector<Coord> starts(prob.n_starts);
  for (auto& s : starts)
    for (int i = 0; i < 3; ++i) s[i] = rng.uniform(box.lo[i], box.hi[i]);

  IdentResult res;
  res.objective = std::numeric_limits<double>::infinity();
  const int per_start = std::max(8, prob.max_evals / prob.n_starts);

  for (int si = 0; si < prob.n_starts; ++si) {
    std::vector<double> trace;
    int evals = 0;
    double best_here = std::numeric_limits<double>::infinity();
    auto eval = [&](const Coord& x) {
      const double f = ident_objective(to_params(x), prob);
      ++evals;
      ++res.evaluations;
      best_here = std::min(best_here, f);
      trace.push_back(best_here);
      if (f < res.objective) {
        res.objective = f;
        res.p_star = to_params(x);
      }
      return f;
    };

    // initial simplex around the start point
    const double steps[3] = {0.05, 0.4, 0.4};
    std::array<Coord, 4> pt;
    std::array<double, 4> fv;
    pt[0] = starts[si];
    for (int i = 1; i < 4; ++i) {
      pt[i] = starts[si];
      const int j = i - 1;
      pt[i][j] += pt[i][j] + steps[j] <= box.hi[j] ? steps[j] : -steps[j];
      pt[i] = box.project(pt[i]);
    }
    for (int i = 0; i < 4; ++i) fv[i] = eval(pt[i]);

    while (evals < per_start) {
      // order the simplex
      std::array<int, 4> ord = {0, 1, 2, 3};
      std::sort(ord.begin(), ord.end(),
                [&](int a, int b) { return fv[a] < fv[b]; });
      {
        std::array<Coord, 4> p2;
        std::array<double, 4> f2;
        for (int i = 0; i < 4; ++i) {
          p2[i] = pt[ord[i]];
          f2[i] = fv[ord[i]];
        }
        pt = p2;
        fv = f2;
      }
      // convergence: simplex collapsed in value and size
      double spread = 0.0;
      for (int i = 0; i < 3; ++i)
        spread = std::max(spread, std::abs(pt[3][i] - pt[0][i]));
      if (spread < 1e-6) break;  // ~1e-4 % in parameters; far below tolerance

      Coord c{};  // centroid of the best three
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) c[j] += pt[i][j] / 3.0;

      auto along = [&](double t) {
        Coord x;
        for (int j = 0; j < 3; ++j) x[j] = c[j] + t * (c[j] - pt[3][j]);
        return box.project(x);
      };
      const Coord xr = along(1.0);
      const double fr = eval(xr);
      if (fr < fv[0]) {
        const Coord xe = along(2.0);
        const double fe = eval(xe);
        if (fe < fr) {
          pt[3] = xe;
          fv[3] = fe;
        } else {
          pt[3] = xr;
          fv[3] = fr;
        }
      } else if (fr < fv[2]) {
        pt[3] = xr;
        fv[3] = fr;
      } else {
        const bool outside = fr < fv[3];
        const Coord xc = along(outside ? 0.5 : -0.5);
        const double fc = eval(xc);
        if (fc < std::min(fr, fv[3])) {
          pt[3] = xc;
          fv[3] = fc;
        } else {
          // shrink toward the best vertex
          for (int i = 1; i < 4; ++i) {
            for (int j = 0; j < 3; ++j)
              pt[i][j] = pt[0][j] + 0.5 * (pt[i][j] - pt[0][j]);
            pt[i] = box.project(pt[i]);
            fv[i] = eval(pt[i]);
            if (evals >= per_start) break;
          }
        }
      }
    }
    res.start_traces.push_back(std::move(trace));
  }

  if (!std::isfinite(res.objective))
    throw NumericalError("ident: no feasible evaluation within the budget");
  return res;
}

void load_reference(const std::string& csv_path, std::vector<double>& t_out,
                    std::vector<double>& i_out) {
  const TimeSeriesLog log = TimeSeriesLog::load_csv(csv_path);
  t_out = log.column_index("t") >= 0 ? log.col("t") : std::vector<double>{};
  if (log.column_index("i_real") >= 0)
    i_out = log.col("i_real");
  else if (log.column_index("i_obs_dstar_0") >= 0)
    i_out = log.col("i_obs_dstar_0");
  else
    throw IoError("ident: reference CSV has neither i_real nor i_obs_dstar_0");
}

std::string format_ident_report(const IdentProblem& prob,
                                const IdentResult& res) {
  std::ostringstream os;
  os << "identification report\n"
     << "  samples     " << prob.i_ref.size() << "\n"
     << "  starts      " << prob.n_starts << "\n"
     << "  evaluations " << res.evaluations << "\n"
     << "  objective   " << format_double(res.objective) << "\n"
     << "  eta         " << format_double(res.p_star.eta) << "\n"
     << "  b_m         " << format_double(res.p_star.b_m) << "\n"
     << "  J_m         " << format_double(res.p_star.J_m) << "\n";
  return os.str();
}

}  // namespace tdcr
