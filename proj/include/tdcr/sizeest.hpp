#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tdcr/config.hpp"

namespace tdcr {

// One wrapping run: label plus the two intrinsic traces.
struct WrapSample {
  int id = 0;
  double D_c = 0.0;               // true cylinder diameter [m]
  std::vector<double> i;          // reconstructed current [A]
  std::vector<double> dl;         // tendon displacement [m]
  double dt = 1e-3;               // [s]
  std::string provenance = "simulated";
  std::uint64_t seed = 0;
};

inline constexpr int kNumFeatures = 16;
using FeatureVector = std::array<double, kNumFeatures>;

// Frozen feature order (see extract_features).
extern const std::array<const char*, kNumFeatures> kFeatureNames;

// Deterministic 16-vector: current statistics, displacement statistics,
// DFT spectral features (0-50 Hz), and electromechanical couplings.
// Requires trace length >= 64.
FeatureVector extract_features(const WrapSample& sample);

// ---- base models ---------------------------------------------------------

struct RidgeModel {
  std::vector<double> w;
  double intercept = 0.0;
};

// Exact regularized normal equations on centered data.
RidgeModel train_ridge(const std::vector<FeatureVector>& X,
                       const std::vector<double>& y, double lambda);
double predict_ridge(const RidgeModel& m, const FeatureVector& x);

struct SvrModel {
  std::vector<FeatureVector> sv;  // support vectors (beta != 0)
  std::vector<double> beta;       // alpha - alpha*
  double bias = 0.0;
  double gamma = 1.0 / 16.0;
  double epsilon = 0.001;  // tube [m]
  double C = 10.0;
  double kkt_violation = 0.0;  // final max violating-pair gap
};

// Epsilon-insensitive RBF SVR via SMO (maximal violating pair) to KKT
// tolerance 1e-4. Desk scale: rows <= 100.
SvrModel train_svr(const std::vector<FeatureVector>& X,
                   const std::vector<double>& y, double C, double epsilon,
                   double gamma);
double predict_svr(const SvrModel& m, const FeatureVector& x);

// ---- meta-learner --------------------------------------------------------

// One depth-2 regression tree over the 2-vector of base predictions.
struct MetaTree {
  // node layout: 0 root, 1-2 children; leaves 0..3 indexed by path
  int feat[3] = {0, 0, 0};
  double thresh[3] = {0, 0, 0};
  double leaf[4] = {0, 0, 0, 0};
};

struct EnsembleHyper {
  double ridge_lambda = 1.0;
  double svr_C = 10.0;
  double svr_epsilon = 0.001;
  double svr_gamma = 1.0 / 16.0;
  int trees = 50;
  int depth = 2;  // fixed by MetaTree layout
  double learning_rate = 0.1;
  int folds = 5;
};

struct EnsembleModel {
  static constexpr const char* kVersion = "tdcr-sizeest-1";
  std::array<double, kNumFeatures> feat_mean{};
  std::array<double, kNumFeatures> feat_scale{};
  RidgeModel ridge;
  SvrModel svr;
  std::vector<MetaTree> meta;
  double meta_init = 0.0;
  EnsembleHyper hyper;
  std::uint64_t fold_seed = 0;
};

// K-fold out-of-fold stacking; fold assignment is keyed to sample id, so
// sample order does not affect the trained model.
EnsembleModel train_ensemble(const std::vector<WrapSample>& samples,
                             const EnsembleHyper& hyper, std::uint64_t seed);

double predict(const EnsembleModel& model, const WrapSample& sample);

// JSON persistence of every coefficient.
std::string serialize_model(const EnsembleModel& model);
EnsembleModel deserialize_model(const std::string& text);

// ---- dataset -------------------------------------------------------------

// Wrap-cylinder runs for every diameter x rep with +-10% seeded jitter on
// cylinder placement and drive speed. Defaults reproduce the 35-sample set.
std::vector<WrapSample> generate_dataset(
    const std::vector<double>& diameters = {0.01, 0.02, 0.03, 0.04, 0.05,
                                            0.06, 0.07},
    int reps = 5, std::uint64_t seed = 0);

// Directory of per-sample trace CSVs plus manifest.csv
// (id, D_c, seed, provenance, file).
void save_dataset(const std::vector<WrapSample>& samples,
                  const std::string& dir);
std::vector<WrapSample> load_dataset(const std::string& dir);

// ---- evaluation ----------------------------------------------------------

struct Metrics {
  double mae = 0.0;
  double r2 = 0.0;
};

// MAE and R^2; throws NumericalError for constant y_true (R^2 undefined).
Metrics metrics(const std::vector<double>& y_true,
                const std::vector<double>& y_pred);

// Deterministic fold index of a sample id under a seed.
int fold_of(int sample_id, const std::vector<int>& all_ids, int folds,
            std::uint64_t seed);

}  // namespace tdcr
