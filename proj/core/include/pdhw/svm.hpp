#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace pdhw {

// Soft-margin RBF support vector machine trained with sequential minimal
// optimization. Labels are -1/+1.

struct SvmConfig {
  double c = 1.0;
  double gamma = 1.0;        // kernel width; K = exp(-||x-xi||^2 / (2 gamma^2))
  double tolerance = 1e-3;   // KKT tolerance
  int max_passes = 1000;     // cap on full examine-all sweeps
};

// K(x, xi) = exp(-||x - xi||^2 / (2 gamma^2))
double rbf_kernel(std::span<const double> x, std::span<const double> xi, double gamma);

struct SvmModel {
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> dual_coefficients;  // alpha_i * y_i
  std::vector<size_t> support_indices;    // positions in the training set
  double bias = 0.0;
  SvmConfig config;
  bool stalled = false;  // max_passes hit before a clean KKT sweep

  double decision(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return decision(x) >= 0.0 ? 1 : -1; }

  nlohmann::json to_json() const;
  static SvmModel from_json(const nlohmann::json& j);
};

SvmModel svm_train(const std::vector<std::vector<double>>& X, std::span<const int> y,
                   const SvmConfig& config, uint64_t seed);

// Largest KKT violation over the training set:
//   alpha = 0  requires y f(x) >= 1, violation = max(0, 1 - y f)
//   alpha = C  requires y f(x) <= 1, violation = max(0, y f - 1)
//   otherwise  requires y f(x) == 1, violation = |y f - 1|
double svm_kkt_violation(const SvmModel& model, const std::vector<std::vector<double>>& X,
                         std::span<const int> y);

struct SvmGrid {
  std::vector<int> c_exponents;      // C = 2^e
  std::vector<int> gamma_exponents;  // gamma = 2^e

  static SvmGrid full();     // C: 2^-8..2^8, gamma: 2^-9..2^9 (17 x 19 = 323)
  static SvmGrid reduced();  // 5 x 5 subsample for CI-scale runs
};

struct GridSearchResult {
  SvmConfig best;
  int c_exponent = 0;
  int gamma_exponent = 0;
  long correct = 0;  // inner-CV correct predictions for the winner
};

// Exhaustive (C, gamma) search scored by stratified inner-CV accuracy.
// Ties prefer the smallest C, then the smallest gamma.
GridSearchResult grid_search_svm(const std::vector<std::vector<double>>& X,
                                 std::span<const int> y, const SvmGrid& grid, int inner_folds,
                                 uint64_t seed, unsigned threads = 1);

}  // namespace pdhw
