#include "tdcr/sizeest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "tdcr/control_loop.hpp"
#include "tdcr/log.hpp"

namespace tdcr {

const std::array<const char*, kNumFeatures> kFeatureNames = {
    "i_mean",        "i_std",          "i_max",         "i_final",
    "i_t90",         "i_abs_integral", "dl_final",      "dldot_max",
    "dldot_t_stall", "f_dominant",     "band_0_5",      "band_5_50",
    "slope_i_dl",    "i_at_stall",     "corr_i_dldot",  "i_post_mean",
};

namespace {

double mean_of(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  double s = 0.0;
  for (std::size_t k = lo; k < hi; ++k) s += v[k];
  return s / static_cast<double>(hi - lo);
}

double median_of(std::vector<double> v) {
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + m, v.end());
  double med = v[m];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + m - 1, v.end());
    med = 0.5 * (med + v[m - 1]);
  }
  return med;
}

}  // namespace

FeatureVector extract_features(const WrapSample& sample) {
  const auto& i = sample.i;
  const auto& dl = sample.dl;
  const double dt = sample.dt;
  const std::size_t n = i.size();
  if (n < 64) throw ConfigError("extract_features: trace shorter than 64");
  if (dl.size() != n)
    throw ConfigError("extract_features: trace length mismatch");
  if (!(dt > 0)) throw ConfigError("extract_features: dt must be > 0");

  // backward-difference tendon speed, smoothed
  std::vector<double> dldot(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) dldot[k] = (dl[k] - dl[k - 1]) / dt;
  dldot = moving_average(dldot, 100);

  FeatureVector f{};

  // current statistics
  const double i_mean = mean_of(i, 0, n);
  double var = 0.0, i_max = -std::numeric_limits<double>::infinity(),
         i_abs = 0.0;
  for (double v : i) {
    var += (v - i_mean) * (v - i_mean);
    i_max = std::max(i_max, v);
    i_abs += std::abs(v) * dt;
  }
  f[0] = i_mean;
  f[1] = std::sqrt(var / n);
  f[2] = i_max;
  f[3] = i.back();
  if (i_max > 0.0) {
    for (std::size_t k = 0; k < n; ++k)
      if (i[k] >= 0.9 * i_max) {
        f[4] = k * dt;
        break;
      }
  }
  f[5] = i_abs;

  // displacement statistics
  f[6] = dl.back();
  std::size_t peak = 0;
  for (std::size_t k = 0; k < n; ++k)
    if (dldot[k] > dldot[peak]) peak = k;
  f[7] = dldot[peak];
  const double med = median_of(dldot);
  std::size_t stall = 0;  // all-zero speed: stall at the start by convention
  if (f[7] > 0.0) {
    stall = n - 1;
    for (std::size_t k = peak; k < n; ++k)
      if (dldot[k] < 0.1 * med) {
        stall = k;
        break;
      }
  }
  f[8] = stall * dt;

  // spectrum of the detrended current, 0-50 Hz
  {
    double sy = 0.0, sjy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      sy += i[k];
      sjy += k * i[k];
    }
    const double nn = static_cast<double>(n);
    const double sxx = nn * (nn * nn - 1.0) / 12.0;
    const double b = (sjy - 0.5 * (nn - 1) * sy) / sxx;
    const double a = sy / nn - b * 0.5 * (nn - 1);
    const std::size_t k_max = std::min<std::size_t>(
        n / 2, static_cast<std::size_t>(50.0 * nn * dt));
    double best_mag = 0.0;
    for (std::size_t k = 1; k <= k_max; ++k) {
      double re = 0.0, im = 0.0;
      const double w = 2.0 * M_PI * k / nn;
      for (std::size_t m = 0; m < n; ++m) {
        const double y = i[m] - (a + b * m);
        re += y * std::cos(w * m);
        im -= y * std::sin(w * m);
      }
      const double mag2 = re * re + im * im;
      const double freq = k / (nn * dt);
      if (mag2 > best_mag) {
        best_mag = mag2;
        f[9] = freq;
      }
      if (freq <= 5.0)
        f[10] += mag2 / nn;
      else
        f[11] += mag2 / nn;
    }
  }

  // electromechanical couplings; the wrap phase ends at the stall sample
  {
    const std::size_t m = stall + 1;
    const double mx = mean_of(dl, 0, m), my = mean_of(i, 0, m);
    double sxy = 0.0, sxx2 = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      sxy += (dl[k] - mx) * (i[k] - my);
      sxx2 += (dl[k] - mx) * (dl[k] - mx);
    }
    f[12] = sxx2 > 0.0 ? sxy / sxx2 : 0.0;
  }
  f[13] = i[stall];
  {
    const double mv = mean_of(dldot, 0, n);
    double sxy = 0.0, sxx2 = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      sxy += (dldot[k] - mv) * (i[k] - i_mean);
      sxx2 += (dldot[k] - mv) * (dldot[k] - mv);
      syy += (i[k] - i_mean) * (i[k] - i_mean);
    }
    f[14] = sxx2 > 0.0 && syy > 0.0 ? sxy / std::sqrt(sxx2 * syy) : 0.0;
  }
  f[15] = mean_of(i, stall, n);

  for (double v : f)
    if (!std::isfinite(v)) throw NumericalError("extract_features: non-finite");
  return f;
}

// ---- ridge ----------------------------------------------------------------

RidgeModel train_ridge(const std::vector<FeatureVector>& X,
                       const std::vector<double>& y, double lambda) {
  const int n = static_cast<int>(X.size());
  if (n < 2 || y.size() != X.size())
    throw ConfigError("train_ridge: need >= 2 rows and matching labels");
  if (lambda < 0) throw ConfigError("train_ridge: lambda must be >= 0");

  Eigen::MatrixXd A(n, kNumFeatures);
  Eigen::VectorXd b(n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < kNumFeatures; ++c) A(r, c) = X[r][c];
    b(r) = y[r];
  }
  const Eigen::RowVectorXd xm = A.colwise().mean();
  const double ym = b.mean();
  A.rowwise() -= xm;
  b.array() -= ym;

  const Eigen::MatrixXd M =
      A.transpose() * A +
      lambda * Eigen::MatrixXd::Identity(kNumFeatures, kNumFeatures);
  if (lambda == 0.0) {
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible())
      throw NumericalError("train_ridge: singular system at lambda = 0");
  }
  const Eigen::VectorXd w = M.ldlt().solve(A.transpose() * b);

  RidgeModel out;
  out.w.assign(w.data(), w.data() + kNumFeatures);
  out.intercept = ym - xm * w;
  return out;
}

double predict_ridge(const RidgeModel& m, const FeatureVector& x) {
  double s = m.intercept;
  for (int c = 0; c < kNumFeatures; ++c) s += m.w[c] * x[c];
  return s;
}

// ---- SVR ------------------------------------------------------------------

namespace {

double rbf(const FeatureVector& a, const FeatureVector& b, double gamma) {
  double d2 = 0.0;
  for (int c = 0; c < kNumFeatures; ++c)
    d2 += (a[c] - b[c]) * (a[c] - b[c]);
  return std::exp(-gamma * d2);
}

}  // namespace

SvrModel train_svr(const std::vector<FeatureVector>& X,
                   const std::vector<double>& y, double C, double epsilon,
                   double gamma) {
  const int n = static_cast<int>(X.size());
  if (n < 2 || y.size() != X.size())
    throw ConfigError("train_svr: need >= 2 rows and matching labels");
  if (n > 100) throw ConfigError("train_svr: desk scale is <= 100 rows");
  if (!(C > 0) || !(epsilon >= 0) || !(gamma > 0))
    throw ConfigError("train_svr: invalid hyperparameters");

  Eigen::MatrixXd K(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) K(a, b) = K(b, a) = rbf(X[a], X[b], gamma);

  // dual over [alpha; alpha*]: z = +1 for the first block, -1 for the second
  const int N2 = 2 * n;
  std::vector<double> alpha(N2, 0.0), G(N2);
  auto z = [&](int t) { return t < n ? 1.0 : -1.0; };
  for (int t = 0; t < N2; ++t)
    G[t] = t < n ? epsilon - y[t] : epsilon + y[t - n];

  constexpr double kTol = 1e-4;
  constexpr int kMaxIter = 200000;
  double gap = 0.0, bias = 0.0;
  int it = 0;
  for (; it < kMaxIter; ++it) {
    // maximal violating pair
    int bi = -1, bj = -1;
    double m = -std::numeric_limits<double>::infinity();
    double M = std::numeric_limits<double>::infinity();
    for (int t = 0; t < N2; ++t) {
      const double v = -z(t) * G[t];
      const bool up = z(t) > 0 ? alpha[t] < C : alpha[t] > 0;
      const bool lo = z(t) > 0 ? alpha[t] > 0 : alpha[t] < C;
      if (up && v > m) {
        m = v;
        bi = t;
      }
      if (lo && v < M) {
        M = v;
        bj = t;
      }
    }
    gap = m - M;
    bias = 0.5 * (m + M);
    if (gap <= kTol) break;

    const int i = bi, j = bj;
    auto kk = [&](int a, int b) { return K(a % n, b % n); };
    const double q =
        std::max(kk(i, i) + kk(j, j) - 2.0 * kk(i, j), 1e-12);
    double d = -(z(i) * G[i] - z(j) * G[j]) / q;
    // box limits for alpha_i + z_i d and alpha_j - z_j d
    auto lim = [&](double a0, double zz, double sign) {
      // a0 + sign*zz*d in [0, C]
      const double s = sign * zz;
      return s > 0 ? std::pair{-a0 / s, (C - a0) / s}
                   : std::pair{(C - a0) / s, -a0 / s};
    };
    const auto [l1, h1] = lim(alpha[i], z(i), +1.0);
    const auto [l2, h2] = lim(alpha[j], z(j), -1.0);
    d = std::clamp(d, std::max(l1, l2), std::min(h1, h2));
    const double dai = z(i) * d, daj = -z(j) * d;
    alpha[i] += dai;
    alpha[j] += daj;
    for (int t = 0; t < N2; ++t)
      G[t] += z(t) * z(i) * kk(t, i) * dai + z(t) * z(j) * kk(t, j) * daj;
  }
  if (gap > kTol) {
    std::ostringstream os;
    os << "train_svr: SMO did not converge; KKT violation " << gap;
    throw NumericalError(os.str());
  }

  SvrModel out;
  out.gamma = gamma;
  out.epsilon = epsilon;
  out.C = C;
  out.bias = bias;
  out.kkt_violation = gap;
  for (int k = 0; k < n; ++k) {
    const double beta = alpha[k] - alpha[k + n];
    if (beta != 0.0) {
      out.sv.push_back(X[k]);
      out.beta.push_back(beta);
    }
  }
  return out;
}

double predict_svr(const SvrModel& m, const FeatureVector& x) {
  double s = m.bias;
  for (std::size_t k = 0; k < m.sv.size(); ++k)
    s += m.beta[k] * rbf(m.sv[k], x, m.gamma);
  return s;
}

// ---- gradient-boosted meta-learner ---------------------------------------

namespace {

struct Split {
  int feat = 0;
  double thresh = std::numeric_limits<double>::infinity();
};

// best SSE split of `rows` on the 2-column matrix; falls back to
// "everything left" when no separating threshold exists
Split best_split(const std::vector<std::array<double, 2>>& x,
                 const std::vector<double>& r,
                 const std::vector<int>& rows) {
  Split best;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int feat = 0; feat < 2; ++feat) {
    std::vector<double> vals;
    for (int k : rows) vals.push_back(x[k][feat]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t v = 0; v + 1 < vals.size(); ++v) {
      const double thr = 0.5 * (vals[v] + vals[v + 1]);
      double sl = 0, nl = 0, sr = 0, nr = 0;
      for (int k : rows)
        (x[k][feat] <= thr ? (sl += r[k], ++nl) : (sr += r[k], ++nr));
      double sse = 0.0;
      const double ml = sl / nl, mr = sr / nr;
      for (int k : rows) {
        const double mu = x[k][feat] <= thr ? ml : mr;
        sse += (r[k] - mu) * (r[k] - mu);
      }
      if (sse < best_sse) {
        best_sse = sse;
        best = {feat, thr};
      }
    }
  }
  return best;
}

double tree_eval(const MetaTree& t, const std::array<double, 2>& x) {
  const int c = x[t.feat[0]] <= t.thresh[0] ? 0 : 1;
  const int l = x[t.feat[c + 1]] <= t.thresh[c + 1] ? 0 : 1;
  return t.leaf[2 * c + l];
}

MetaTree fit_tree(const std::vector<std::array<double, 2>>& x,
                  const std::vector<double>& r) {
  MetaTree t;
  std::vector<int> all(x.size());
  std::iota(all.begin(), all.end(), 0);
  const Split s0 = best_split(x, r, all);
  t.feat[0] = s0.feat;
  t.thresh[0] = s0.thresh;
  for (int c = 0; c < 2; ++c) {
    std::vector<int> rows;
    for (int k : all)
      if ((x[k][s0.feat] <= s0.thresh) == (c == 0)) rows.push_back(k);
    if (rows.empty()) continue;  // leaves stay 0: no samples reach them
    const Split s = best_split(x, r, rows);
    t.feat[c + 1] = s.feat;
    t.thresh[c + 1] = s.thresh;
    double sum[2] = {0, 0};
    int cnt[2] = {0, 0};
    for (int k : rows) {
      const int l = x[k][s.feat] <= s.thresh ? 0 : 1;
      sum[l] += r[k];
      ++cnt[l];
    }
    for (int l = 0; l < 2; ++l)
      t.leaf[2 * c + l] =
          cnt[l] > 0 ? sum[l] / cnt[l] : sum[1 - l] / std::max(cnt[1 - l], 1);
  }
  return t;
}

}  // namespace

// ---- ensemble -------------------------------------------------------------

int fold_of(int sample_id, const std::vector<int>& all_ids, int folds,
            std::uint64_t seed) {
  std::vector<int> ids(all_ids);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  Rng rng(seed);
  for (std::size_t k = ids.size() - 1; k > 0; --k) {
    const auto j = static_cast<std::size_t>(rng.uniform(0.0, k + 1.0));
    std::swap(ids[k], ids[std::min(j, k)]);
  }
  for (std::size_t k = 0; k < ids.size(); ++k)
    if (ids[k] == sample_id) return static_cast<int>(k) % folds;
  throw ConfigError("fold_of: unknown sample id");
}

EnsembleModel train_ensemble(const std::vector<WrapSample>& samples,
                             const EnsembleHyper& hyper, std::uint64_t seed) {
  const int n = static_cast<int>(samples.size());
  if (hyper.folds < 2 || n < hyper.folds)
    throw ConfigError("train_ensemble: need sample count >= folds >= 2");
  if (hyper.trees < 1 || !(hyper.learning_rate > 0))
    throw ConfigError("train_ensemble: invalid boosting hyperparameters");

  EnsembleModel model;
  model.hyper = hyper;
  model.fold_seed = seed;

  // order-independent processing: sort by sample id
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return samples[a].id < samples[b].id;
  });

  std::vector<FeatureVector> X(n);
  std::vector<double> y(n);
  std::vector<int> ids(n);
  for (int k = 0; k < n; ++k) {
    X[k] = extract_features(samples[order[k]]);
    y[k] = samples[order[k]].D_c;
    ids[k] = samples[order[k]].id;
  }

  // standardization over the whole training set
  for (int c = 0; c < kNumFeatures; ++c) {
    double m = 0.0;
    for (int k = 0; k < n; ++k) m += X[k][c];
    m /= n;
    double v = 0.0;
    for (int k = 0; k < n; ++k) v += (X[k][c] - m) * (X[k][c] - m);
    const double s = std::sqrt(v / n);
    model.feat_mean[c] = m;
    model.feat_scale[c] = s > 0.0 ? s : 1.0;
    for (int k = 0; k < n; ++k) X[k][c] = (X[k][c] - m) / model.feat_scale[c];
  }

  // out-of-fold base predictions
  std::vector<std::array<double, 2>> oof(n);
  for (int f = 0; f < hyper.folds; ++f) {
    std::vector<FeatureVector> Xt;
    std::vector<double> yt;
    std::vector<int> hold;
    for (int k = 0; k < n; ++k) {
      if (fold_of(ids[k], ids, hyper.folds, seed) == f)
        hold.push_back(k);
      else {
        Xt.push_back(X[k]);
        yt.push_back(y[k]);
      }
    }
    if (hold.empty()) continue;
    const RidgeModel rg = train_ridge(Xt, yt, hyper.ridge_lambda);
    const SvrModel sv =
        train_svr(Xt, yt, hyper.svr_C, hyper.svr_epsilon, hyper.svr_gamma);
    for (int k : hold) oof[k] = {predict_ridge(rg, X[k]), predict_svr(sv, X[k])};
  }

  // boosted meta-learner on the out-of-fold matrix
  model.meta_init = std::accumulate(y.begin(), y.end(), 0.0) / n;
  std::vector<double> r(n);
  for (int k = 0; k < n; ++k) r[k] = y[k] - model.meta_init;
  for (int t = 0; t < hyper.trees; ++t) {
    const MetaTree tree = fit_tree(oof, r);
    for (int k = 0; k < n; ++k)
      r[k] -= hyper.learning_rate * tree_eval(tree, oof[k]);
    model.meta.push_back(tree);
  }

  // refit the base models on all data for inference
  model.ridge = train_ridge(X, y, hyper.ridge_lambda);
  model.svr = train_svr(X, y, hyper.svr_C, hyper.svr_epsilon, hyper.svr_gamma);
  return model;
}

double predict(const EnsembleModel& model, const WrapSample& sample) {
  FeatureVector x = extract_features(sample);
  for (int c = 0; c < kNumFeatures; ++c)
    x[c] = (x[c] - model.feat_mean[c]) / model.feat_scale[c];
  const std::array<double, 2> base = {predict_ridge(model.ridge, x),
                                      predict_svr(model.svr, x)};
  double out = model.meta_init;
  for (const auto& t : model.meta)
    out += model.hyper.learning_rate * tree_eval(t, base);
  return out;
}

// ---- persistence ----------------------------------------------------------

std::string serialize_model(const EnsembleModel& m) {
  nlohmann::json j;
  j["version"] = EnsembleModel::kVersion;
  j["feat_mean"] = m.feat_mean;
  j["feat_scale"] = m.feat_scale;
  j["ridge"] = {{"w", m.ridge.w}, {"intercept", m.ridge.intercept}};
  j["svr"] = {{"sv", m.svr.sv},
              {"beta", m.svr.beta},
              {"bias", m.svr.bias},
              {"gamma", m.svr.gamma},
              {"epsilon", m.svr.epsilon},
              {"C", m.svr.C},
              {"kkt_violation", m.svr.kkt_violation}};
  j["meta_init"] = m.meta_init;
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : m.meta)
    trees.push_back({{"feat", t.feat}, {"thresh", t.thresh}, {"leaf", t.leaf}});
  j["meta"] = trees;
  j["hyper"] = {{"ridge_lambda", m.hyper.ridge_lambda},
                {"svr_C", m.hyper.svr_C},
                {"svr_epsilon", m.hyper.svr_epsilon},
                {"svr_gamma", m.hyper.svr_gamma},
                {"trees", m.hyper.trees},
                {"depth", m.hyper.depth},
                {"learning_rate", m.hyper.learning_rate},
                {"folds", m.hyper.folds}};
  j["fold_seed"] = m.fold_seed;
  return j.dump(2) + "\n";
}

EnsembleModel deserialize_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw IoError(std::string("model parse failure: ") + e.what());
  }
  if (j.value("version", "") != EnsembleModel::kVersion)
    throw IoError("model version mismatch");
  EnsembleModel m;
  j.at("feat_mean").get_to(m.feat_mean);
  j.at("feat_scale").get_to(m.feat_scale);
  j.at("ridge").at("w").get_to(m.ridge.w);
  m.ridge.intercept = j.at("ridge").at("intercept");
  const auto& s = j.at("svr");
  for (const auto& v : s.at("sv")) m.svr.sv.push_back(v.get<FeatureVector>());
  s.at("beta").get_to(m.svr.beta);
  m.svr.bias = s.at("bias");
  m.svr.gamma = s.at("gamma");
  m.svr.epsilon = s.at("epsilon");
  m.svr.C = s.at("C");
  m.svr.kkt_violation = s.at("kkt_violation");
  m.meta_init = j.at("meta_init");
  for (const auto& tj : j.at("meta")) {
    MetaTree t;
    for (int k = 0; k < 3; ++k) {
      t.feat[k] = tj.at("feat")[k];
      t.thresh[k] = tj.at("thresh")[k];
    }
    for (int k = 0; k < 4; ++k) t.leaf[k] = tj.at("leaf")[k];
    m.meta.push_back(t);
  }
  const auto& h = j.at("hyper");
  m.hyper.ridge_lambda = h.at("ridge_lambda");
  m.hyper.svr_C = h.at("svr_C");
  m.hyper.svr_epsilon = h.at("svr_epsilon");
  m.hyper.svr_gamma = h.at("svr_gamma");
  m.hyper.trees = h.at("trees");
  m.hyper.depth = h.at("depth");
  m.hyper.learning_rate = h.at("learning_rate");
  m.hyper.folds = h.at("folds");
  m.fold_seed = j.at("fold_seed");
  return m;
}

// ---- dataset ---------------------------------------------------------------

std::vector<WrapSample> generate_dataset(const std::vector<double>& diameters,
                                         int reps, std::uint64_t seed) {
  if (diameters.empty() || reps < 1)
    throw ConfigError("generate_dataset: need diameters and reps >= 1");
  std::vector<WrapSample> out;
  int id = 0;
  for (double D : diameters) {
    for (int rep = 0; rep < reps; ++rep, ++id) {
      const std::uint64_t s = seed * 1000003ull + id;
      Rng jitter(s);
      auto cfg = load_config("scenario = wrap-cylinder\n");
      cfg.contact.diameter = D;
      // placement scatter scales with the object: +-10% of its diameter
      cfg.contact.cx += 0.1 * D * jitter.uniform(-1.0, 1.0);
      cfg.contact.cy += 0.1 * D * jitter.uniform(-1.0, 1.0);
      cfg.fb[0].setpoint *= 1.0 + 0.1 * jitter.uniform(-1.0, 1.0);
      cfg.seed = s;
      WrapSample sample;
      sample.id = id;
      sample.D_c = D;
      sample.dt = cfg.dt;
      sample.seed = s;
      try {
        const TimeSeriesLog log = run_scenario(cfg);
        sample.i = log.col("i_obs_dstar_0");
        sample.dl = log.col("dl_0");
      } catch (const std::exception&) {
        continue;  // reported per sample via the missing id; run continues
      }
      out.push_back(std::move(sample));
    }
  }
  return out;
}

void save_dataset(const std::vector<WrapSample>& samples,
                  const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream manifest;
  manifest << "id,D_c,seed,provenance,file\n";
  for (const auto& s : samples) {
    std::ostringstream name;
    name << "sample_" << s.id << ".csv";
    TimeSeriesLog log;
    log.columns = {"t", "i_real", "dl_obs"};
    log.data.resize(3);
    for (std::size_t k = 0; k < s.i.size(); ++k) {
      log.data[0].push_back(k * s.dt);
      log.data[1].push_back(s.i[k]);
      log.data[2].push_back(s.dl[k]);
    }
    log.save_csv(dir + "/" + name.str());
    manifest << s.id << ',' << format_double(s.D_c) << ',' << s.seed << ','
             << s.provenance << ',' << name.str() << '\n';
  }
  write_file(dir + "/manifest.csv", manifest.str());
}

std::vector<WrapSample> load_dataset(const std::string& dir) {
  const std::string manifest = read_file(dir + "/manifest.csv");
  std::istringstream is(manifest);
  std::string line;
  if (!std::getline(is, line) || line != "id,D_c,seed,provenance,file")
    throw IoError("load_dataset: bad manifest header");
  std::vector<WrapSample> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string id_s, dc_s, seed_s, prov, file;
    if (!std::getline(ls, id_s, ',') || !std::getline(ls, dc_s, ',') ||
        !std::getline(ls, seed_s, ',') || !std::getline(ls, prov, ',') ||
        !std::getline(ls, file))
      throw IoError("load_dataset: bad manifest row: " + line);
    WrapSample s;
    s.id = std::stoi(id_s);
    s.D_c = std::stod(dc_s);
    s.seed = std::stoull(seed_s);
    s.provenance = prov;
    const TimeSeriesLog log = TimeSeriesLog::load_csv(dir + "/" + file);
    const auto& t = log.col("t");
    if (t.size() < 2) throw IoError("load_dataset: trace too short: " + file);
    s.dt = t[1] - t[0];
    s.i = log.col("i_real");
    s.dl = log.col("dl_obs");
    out.push_back(std::move(s));
  }
  return out;
}

// ---- metrics ---------------------------------------------------------------

Metrics metrics(const std::vector<double>& y_true,
                const std::vector<double>& y_pred) {
  const std::size_t n = y_true.size();
  if (n < 2 || y_pred.size() != n)
    throw ConfigError("metrics: need equal lengths >= 2");
  const double ym = mean_of(y_true, 0, n);
  double mae = 0.0, ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mae += std::abs(y_true[k] - y_pred[k]);
    ss_res += (y_true[k] - y_pred[k]) * (y_true[k] - y_pred[k]);
    ss_tot += (y_true[k] - ym) * (y_true[k] - ym);
  }
  if (ss_tot == 0.0)
    throw NumericalError("metrics: R^2 undefined for constant y_true");
  return {mae / n, 1.0 - ss_res / ss_tot};
}

}  // namespace tdcr
