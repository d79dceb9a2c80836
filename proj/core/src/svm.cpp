#include "pdhw/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "pdhw/error.hpp"
#include "pdhw/folds.hpp"
#include "pdhw/util.hpp"

namespace pdhw {

double rbf_kernel(std::span<const double> x, std::span<const double> xi, double gamma) {
  if (x.size() != xi.size()) {
    raise(Err::DimensionMismatch, "kernel arguments of sizes " + std::to_string(x.size()) +
                                      " and " + std::to_string(xi.size()));
  }
  double d2 = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - xi[i];
    d2 += d * d;
  }
  return std::exp(-d2 / (2.0 * gamma * gamma));
}

double SvmModel::decision(std::span<const double> x) const {
  double f = bias;
  for (size_t i = 0; i < support_vectors.size(); ++i) {
    f += dual_coefficients[i] * rbf_kernel(support_vectors[i], x, config.gamma);
  }
  return f;
}

namespace {

constexpr double kStepEps = 1e-9;

class SmoSolver {
public:
  SmoSolver(const std::vector<std::vector<double>>& X, std::span<const int> y,
            const SvmConfig& cfg, uint64_t seed)
      : x_(X), y_(y), cfg_(cfg), n_(X.size()), rng_(seed) {
    kernel_.resize(n_ * n_);
    for (size_t i = 0; i < n_; ++i) {
      for (size_t j = i; j < n_; ++j) {
        const double k = rbf_kernel(x_[i], x_[j], cfg_.gamma);
        kernel_[i * n_ + j] = k;
        kernel_[j * n_ + i] = k;
      }
    }
    alpha_.assign(n_, 0.0);
    // f_i = sum_j alpha_j y_j K(j, i); bias tracked separately.
    f_.assign(n_, 0.0);
  }

  bool solve() {
    int sweeps = 0;
    bool examine_all = true;
    int num_changed = 0;
    while (num_changed > 0 || examine_all) {
      if (++sweeps > cfg_.max_passes) return false;
      num_changed = 0;
      if (examine_all) {
        for (size_t i = 0; i < n_; ++i) num_changed += examine(i);
      } else {
        for (size_t i = 0; i < n_; ++i) {
          if (alpha_[i] > 0.0 && alpha_[i] < cfg_.c) num_changed += examine(i);
        }
      }
      if (examine_all) {
        examine_all = false;
      } else if (num_changed == 0) {
        examine_all = true;
      }
    }
    return true;
  }

  const std::vector<double>& alpha() const { return alpha_; }
  double bias() const { return b_; }

private:
  double error(size_t i) const { return f_[i] + b_ - static_cast<double>(y_[i]); }

  int examine(size_t i2) {
    const double y2 = y_[i2];
    const double e2 = error(i2);
    const double r2 = e2 * y2;
    const bool violating =
        (r2 < -cfg_.tolerance && alpha_[i2] < cfg_.c) || (r2 > cfg_.tolerance && alpha_[i2] > 0.0);
    if (!violating) return 0;

    // Second-choice heuristic: the non-bound point with the largest |E1 - E2|.
    size_t best = n_;
    double best_gap = -1.0;
    for (size_t i = 0; i < n_; ++i) {
      if (alpha_[i] <= 0.0 || alpha_[i] >= cfg_.c) continue;
      const double gap = std::abs(error(i) - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best < n_ && take_step(best, i2)) return 1;

    // Then every non-bound point, then everything, in a seeded random rotation.
    const size_t start = rng_.below(std::max<size_t>(n_, 1));
    for (size_t k = 0; k < n_; ++k) {
      const size_t i1 = (start + k) % n_;
      if (alpha_[i1] > 0.0 && alpha_[i1] < cfg_.c && take_step(i1, i2)) return 1;
    }
    const size_t start2 = rng_.below(std::max<size_t>(n_, 1));
    for (size_t k = 0; k < n_; ++k) {
      const size_t i1 = (start2 + k) % n_;
      if (take_step(i1, i2)) return 1;
    }
    return 0;
  }

  bool take_step(size_t i1, size_t i2) {
    if (i1 == i2) return false;
    const double a1_old = alpha_[i1];
    const double a2_old = alpha_[i2];
    const double y1 = y_[i1];
    const double y2 = y_[i2];
    const double e1 = error(i1);
    const double e2 = error(i2);
    const double s = y1 * y2;

    double lo, hi;
    if (s < 0.0) {
      lo = std::max(0.0, a2_old - a1_old);
      hi = std::min(cfg_.c, cfg_.c + a2_old - a1_old);
    } else {
      lo = std::max(0.0, a1_old + a2_old - cfg_.c);
      hi = std::min(cfg_.c, a1_old + a2_old);
    }
    if (lo >= hi) return false;

    const double k11 = kernel_[i1 * n_ + i1];
    const double k12 = kernel_[i1 * n_ + i2];
    const double k22 = kernel_[i2 * n_ + i2];
    const double eta = k11 + k22 - 2.0 * k12;

    double a2;
    if (eta > 0.0) {
      a2 = a2_old + y2 * (e1 - e2) / eta;
      a2 = std::clamp(a2, lo, hi);
    } else {
      // Degenerate curvature: evaluate the dual objective at both clip bounds.
      const double f1 = y1 * (e1 - b_) - a1_old * k11 - s * a2_old * k12;
      const double f2 = y2 * (e2 - b_) - s * a1_old * k12 - a2_old * k22;
      const double l1 = a1_old + s * (a2_old - lo);
      const double h1 = a1_old + s * (a2_old - hi);
      const double lo_obj = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 +
                            s * lo * l1 * k12;
      const double hi_obj = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 +
                            s * hi * h1 * k12;
      if (lo_obj < hi_obj - kStepEps) a2 = lo;
      else if (lo_obj > hi_obj + kStepEps) a2 = hi;
      else return false;
    }
    // Snap to the box so at-bound multipliers are exactly 0 or C; the paired
    // adjustment keeps sum(alpha_i y_i) = 0 exact.
    const double snap = 1e-8 * cfg_.c;
    if (a2 - lo < snap) a2 = lo;
    else if (hi - a2 < snap) a2 = hi;
    if (std::abs(a2 - a2_old) < kStepEps * (a2 + a2_old + kStepEps)) return false;

    double a1 = a1_old + s * (a2_old - a2);
    if (a1 < snap) {
      a2 += s * a1;
      a1 = 0.0;
    } else if (a1 > cfg_.c - snap) {
      a2 += s * (a1 - cfg_.c);
      a1 = cfg_.c;
    }
    a2 = std::clamp(a2, 0.0, cfg_.c);
    const double da1 = a1 - a1_old;
    const double da2 = a2 - a2_old;

    const double b1 = b_ - e1 - y1 * da1 * k11 - y2 * da2 * k12;
    const double b2 = b_ - e2 - y1 * da1 * k12 - y2 * da2 * k22;
    if (a1 > 0.0 && a1 < cfg_.c) b_ = b1;
    else if (a2 > 0.0 && a2 < cfg_.c) b_ = b2;
    else b_ = 0.5 * (b1 + b2);

    alpha_[i1] = a1;
    alpha_[i2] = a2;
    for (size_t k = 0; k < n_; ++k) {
      f_[k] += y1 * da1 * kernel_[i1 * n_ + k] + y2 * da2 * kernel_[i2 * n_ + k];
    }
    return true;
  }

  const std::vector<std::vector<double>>& x_;
  std::span<const int> y_;
  SvmConfig cfg_;
  size_t n_;
  Rng rng_;
  std::vector<double> kernel_;
  std::vector<double> alpha_;
  std::vector<double> f_;
  double b_ = 0.0;
};

}  // namespace

SvmModel svm_train(const std::vector<std::vector<double>>& X, std::span<const int> y,
                   const SvmConfig& config, uint64_t seed) {
  if (X.empty() || X.size() != y.size()) {
    raise(Err::DimensionMismatch, "training set size mismatch");
  }
  bool pos = false, neg = false;
  for (int label : y) {
    if (label == 1) pos = true;
    else if (label == -1) neg = true;
    else raise(Err::DimensionMismatch, "labels must be -1 or +1");
  }
  if (!pos || !neg) raise(Err::SingleClass, "training set has a single class");
  for (const auto& row : X) {
    if (row.size() != X[0].size()) raise(Err::DimensionMismatch, "ragged feature rows");
  }

  SmoSolver solver(X, y, config, seed);
  const bool converged = solver.solve();

  SvmModel model;
  model.config = config;
  model.bias = solver.bias();
  model.stalled = !converged;
  const auto& alpha = solver.alpha();
  for (size_t i = 0; i < X.size(); ++i) {
    if (alpha[i] > 0.0) {
      model.support_vectors.push_back(X[i]);
      model.dual_coefficients.push_back(alpha[i] * static_cast<double>(y[i]));
      model.support_indices.push_back(i);
    }
  }
  return model;
}

double svm_kkt_violation(const SvmModel& model, const std::vector<std::vector<double>>& X,
                         std::span<const int> y) {
  std::vector<double> alpha(X.size(), 0.0);
  for (size_t k = 0; k < model.support_indices.size(); ++k) {
    alpha[model.support_indices[k]] =
        std::abs(model.dual_coefficients[k]);  // alpha_i = |alpha_i y_i|
  }
  double worst = 0.0;
  for (size_t i = 0; i < X.size(); ++i) {
    const double margin = static_cast<double>(y[i]) * model.decision(X[i]);
    double violation = 0.0;
    if (alpha[i] <= 0.0) violation = std::max(0.0, 1.0 - margin);
    else if (alpha[i] >= model.config.c) violation = std::max(0.0, margin - 1.0);
    else violation = std::abs(margin - 1.0);
    worst = std::max(worst, violation);
  }
  return worst;
}

SvmGrid SvmGrid::full() {
  SvmGrid g;
  for (int e = -8; e <= 8; ++e) g.c_exponents.push_back(e);
  for (int e = -9; e <= 9; ++e) g.gamma_exponents.push_back(e);
  return g;
}

SvmGrid SvmGrid::reduced() {
  SvmGrid g;
  g.c_exponents = {-8, -4, 0, 4, 8};
  g.gamma_exponents = {-9, -4, 0, 4, 9};
  return g;
}

GridSearchResult grid_search_svm(const std::vector<std::vector<double>>& X,
                                 std::span<const int> y, const SvmGrid& grid, int inner_folds,
                                 uint64_t seed, unsigned threads) {
  size_t pos = 0, neg = 0;
  for (int label : y) (label == 1 ? pos : neg) += 1;
  if (pos < static_cast<size_t>(inner_folds) || neg < static_cast<size_t>(inner_folds)) {
    raise(Err::TooFewSamples, "inner stratified split needs >= " + std::to_string(inner_folds) +
                                  " samples per class");
  }

  std::vector<int> labels01(y.size());
  for (size_t i = 0; i < y.size(); ++i) labels01[i] = y[i] == 1 ? 1 : 0;
  const auto folds = stratified_fold_indices(labels01, inner_folds, derive_seed(seed, 0x666f6c64));

  struct Candidate {
    int c_exp, g_exp;
  };
  std::vector<Candidate> candidates;
  for (int ce : grid.c_exponents)
    for (int ge : grid.gamma_exponents) candidates.push_back({ce, ge});

  std::vector<long> scores(candidates.size(), -1);
  parallel_for(candidates.size(), threads, [&](size_t idx) {
    const auto [ce, ge] = candidates[idx];
    SvmConfig cfg;
    cfg.c = std::ldexp(1.0, ce);
    cfg.gamma = std::ldexp(1.0, ge);
    long correct = 0;
    for (size_t f = 0; f < folds.size(); ++f) {
      std::vector<std::vector<double>> train_x;
      std::vector<int> train_y;
      std::vector<char> in_test(y.size(), 0);
      for (size_t i : folds[f]) in_test[i] = 1;
      for (size_t i = 0; i < y.size(); ++i) {
        if (!in_test[i]) {
          train_x.push_back(X[i]);
          train_y.push_back(y[i]);
        }
      }
      const auto model =
          svm_train(train_x, train_y, cfg, derive_seed(seed, idx * folds.size() + f));
      for (size_t i : folds[f]) {
        if (model.predict(X[i]) == y[i]) ++correct;
      }
    }
    scores[idx] = correct;
  });

  // Candidates are ordered (C asc, gamma asc); strict improvement keeps the
  // smallest C then smallest gamma on ties.
  size_t best = 0;
  for (size_t i = 1; i < candidates.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  GridSearchResult out;
  out.c_exponent = candidates[best].c_exp;
  out.gamma_exponent = candidates[best].g_exp;
  out.best.c = std::ldexp(1.0, out.c_exponent);
  out.best.gamma = std::ldexp(1.0, out.gamma_exponent);
  out.correct = scores[best];
  return out;
}

nlohmann::json SvmModel::to_json() const {
  nlohmann::json j;
  j["format"] = "pdhw-svm-1";
  j["c"] = config.c;
  j["gamma"] = config.gamma;
  j["tolerance"] = config.tolerance;
  j["max_passes"] = config.max_passes;
  j["bias"] = bias;
  j["stalled"] = stalled;
  j["support_vectors"] = support_vectors;
  j["dual_coefficients"] = dual_coefficients;
  j["support_indices"] = support_indices;
  return j;
}

SvmModel SvmModel::from_json(const nlohmann::json& j) {
  SvmModel m;
  m.config.c = j.at("c").get<double>();
  m.config.gamma = j.at("gamma").get<double>();
  m.config.tolerance = j.at("tolerance").get<double>();
  m.config.max_passes = j.at("max_passes").get<int>();
  m.bias = j.at("bias").get<double>();
  m.stalled = j.at("stalled").get<bool>();
  m.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
  m.dual_coefficients = j.at("dual_coefficients").get<std::vector<double>>();
  m.support_indices = j.at("support_indices").get<std::vector<size_t>>();
  return m;
}

}  // namespace pdhw
