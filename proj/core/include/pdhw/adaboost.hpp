#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace pdhw {

// Weighted CART stump/tree used as the AdaBoost weak learner. Splits minimize
// weighted Gini impurity over ceil(sqrt(d)) candidate features sampled per
// node from the boosting RNG.
struct TreeNode {
  int feature = -1;        // -1 marks a leaf
  double threshold = 0.0;  // go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  int leaf_label = 1;      // -1/+1
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  int predict(std::span<const double> x) const;
};

struct AdaBoostConfig {
  int max_rounds = 500;
  int max_depth = 3;
};

struct AdaBoostModel {
  std::vector<DecisionTree> learners;
  std::vector<double> learner_weights;  // ln((1-err)/err), finite and positive
  int rounds_used = 0;
  AdaBoostConfig config;

  double decision(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return decision(x) >= 0.0 ? 1 : -1; }

  nlohmann::json to_json() const;
  static AdaBoostModel from_json(const nlohmann::json& j);
};

// Discrete (SAMME) AdaBoost for two classes. Boosting stops at max_rounds, on
// a weak learner with weighted error >= 0.5 (learner discarded), or on a
// perfect learner (retained with a clamped weight).
AdaBoostModel adaboost_train(const std::vector<std::vector<double>>& X, std::span<const int> y,
                             const AdaBoostConfig& config, uint64_t seed);

}  // namespace pdhw
