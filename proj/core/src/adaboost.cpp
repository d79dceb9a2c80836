#include "pdhw/adaboost.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "pdhw/error.hpp"
#include "pdhw/util.hpp"

namespace pdhw {

int DecisionTree::predict(std::span<const double> x) const {
  int node = 0;
  while (nodes[static_cast<size_t>(node)].feature >= 0) {
    const auto& n = nodes[static_cast<size_t>(node)];
    node = x[static_cast<size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<size_t>(node)].leaf_label;
}

double AdaBoostModel::decision(std::span<const double> x) const {
  double sum = 0.0;
  for (size_t m = 0; m < learners.size(); ++m) {
    sum += learner_weights[m] * static_cast<double>(learners[m].predict(x));
  }
  return sum;
}

namespace {

struct TreeBuilder {
  const std::vector<std::vector<double>>& x;
  std::span<const int> y;
  const std::vector<double>& w;
  int max_depth;
  Rng& rng;
  DecisionTree tree;

  int leaf(const std::vector<size_t>& idx) {
    double pos = 0.0, neg = 0.0;
    for (size_t i : idx) (y[i] == 1 ? pos : neg) += w[i];
    TreeNode node;
    node.leaf_label = pos >= neg ? 1 : -1;
    tree.nodes.push_back(node);
    return static_cast<int>(tree.nodes.size() - 1);
  }

  // Sampled candidate features, sorted ascending for deterministic tie-breaks.
  std::vector<size_t> candidate_features() {
    const size_t d = x[0].size();
    const size_t k = static_cast<size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
    std::vector<size_t> all(d);
    std::iota(all.begin(), all.end(), size_t{0});
    for (size_t i = 0; i < k; ++i) {
      std::swap(all[i], all[i + rng.below(d - i)]);
    }
    all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
  }

  int build(const std::vector<size_t>& idx, int depth) {
    double pos = 0.0, neg = 0.0;
    for (size_t i : idx) (y[i] == 1 ? pos : neg) += w[i];
    const double total = pos + neg;
    if (depth >= max_depth || idx.size() < 2 || pos <= 0.0 || neg <= 0.0) return leaf(idx);

    const double parent_gini = 2.0 * pos * neg / total;  // scaled by node weight

    double best_gini = parent_gini;
    size_t best_feature = 0;
    double best_threshold = 0.0;
    bool found = false;

    for (size_t feature : candidate_features()) {
      std::vector<size_t> order(idx);
      std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return x[a][feature] < x[b][feature];
      });
      double left_pos = 0.0, left_neg = 0.0;
      for (size_t k = 0; k + 1 < order.size(); ++k) {
        const size_t i = order[k];
        (y[i] == 1 ? left_pos : left_neg) += w[i];
        const double v = x[i][feature];
        const double v_next = x[order[k + 1]][feature];
        if (v == v_next) continue;
        const double lw = left_pos + left_neg;
        const double rw = total - lw;
        if (lw <= 0.0 || rw <= 0.0) continue;
        const double gini = 2.0 * left_pos * left_neg / lw +
                            2.0 * (pos - left_pos) * (neg - left_neg) / rw;
        if (gini < best_gini - 1e-15) {
          best_gini = gini;
          best_feature = feature;
          best_threshold = 0.5 * (v + v_next);
          found = true;
        }
      }
    }
    if (!found) return leaf(idx);

    std::vector<size_t> left_idx, right_idx;
    for (size_t i : idx) {
      (x[i][best_feature] <= best_threshold ? left_idx : right_idx).push_back(i);
    }
    const int node_pos = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[static_cast<size_t>(node_pos)].feature = static_cast<int>(best_feature);
    tree.nodes[static_cast<size_t>(node_pos)].threshold = best_threshold;
    const int left = build(left_idx, depth + 1);
    const int right = build(right_idx, depth + 1);
    tree.nodes[static_cast<size_t>(node_pos)].left = left;
    tree.nodes[static_cast<size_t>(node_pos)].right = right;
    return node_pos;
  }
};

}  // namespace

AdaBoostModel adaboost_train(const std::vector<std::vector<double>>& X, std::span<const int> y,
                             const AdaBoostConfig& config, uint64_t seed) {
  if (X.empty() || X.size() != y.size()) {
    raise(Err::DimensionMismatch, "training set size mismatch");
  }
  bool pos = false, neg = false;
  for (int label : y) (label == 1 ? pos : neg) = true;
  if (!pos || !neg) raise(Err::SingleClass, "training set has a single class");

  const size_t n = X.size();
  Rng rng(seed);
  std::vector<double> w(n, 1.0 / static_cast<double>(n));

  AdaBoostModel model;
  model.config = config;

  for (int round = 0; round < config.max_rounds; ++round) {
    TreeBuilder builder{X, y, w, config.max_depth, rng, {}};
    std::vector<size_t> all(n);
    std::iota(all.begin(), all.end(), size_t{0});
    builder.build(all, 0);
    DecisionTree tree = std::move(builder.tree);

    double err = 0.0;
    std::vector<char> wrong(n, 0);
    for (size_t i = 0; i < n; ++i) {
      if (tree.predict(X[i]) != y[i]) {
        wrong[i] = 1;
        err += w[i];
      }
    }
    ++model.rounds_used;

    if (err >= 0.5) break;  // no better than chance: discard and stop

    const double clamped = std::max(err, 1e-10);
    const double alpha = std::log((1.0 - clamped) / clamped);
    model.learners.push_back(std::move(tree));
    model.learner_weights.push_back(alpha);

    if (err <= 0.0) break;  // perfect learner

    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
      if (wrong[i]) w[i] *= std::exp(alpha);
      sum += w[i];
    }
    for (auto& wi : w) wi /= sum;
  }

  if (model.learners.empty()) {
    // Even the first learner was at or above chance; keep a majority-vote
    // stump so the model still predicts deterministically.
    TreeNode stump;
    double wpos = 0.0, wneg = 0.0;
    for (size_t i = 0; i < n; ++i) (y[i] == 1 ? wpos : wneg) += w[i];
    stump.leaf_label = wpos >= wneg ? 1 : -1;
    DecisionTree tree;
    tree.nodes.push_back(stump);
    model.learners.push_back(std::move(tree));
    model.learner_weights.push_back(1.0);
  }
  return model;
}

nlohmann::json AdaBoostModel::to_json() const {
  nlohmann::json j;
  j["format"] = "pdhw-adaboost-1";
  j["max_rounds"] = config.max_rounds;
  j["max_depth"] = config.max_depth;
  j["rounds_used"] = rounds_used;
  j["learner_weights"] = learner_weights;
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : learners) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes) {
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"leaf_label", n.leaf_label}});
    }
    trees.push_back(nodes);
  }
  j["learners"] = trees;
  return j;
}

AdaBoostModel AdaBoostModel::from_json(const nlohmann::json& j) {
  AdaBoostModel m;
  m.config.max_rounds = j.at("max_rounds").get<int>();
  m.config.max_depth = j.at("max_depth").get<int>();
  m.rounds_used = j.at("rounds_used").get<int>();
  m.learner_weights = j.at("learner_weights").get<std::vector<double>>();
  for (const auto& tree_json : j.at("learners")) {
    DecisionTree tree;
    for (const auto& node_json : tree_json) {
      TreeNode n;
      n.feature = node_json.at("feature").get<int>();
      n.threshold = node_json.at("threshold").get<double>();
      n.left = node_json.at("left").get<int>();
      n.right = node_json.at("right").get<int>();
      n.leaf_label = node_json.at("leaf_label").get<int>();
      tree.nodes.push_back(n);
    }
    m.learners.push_back(std::move(tree));
  }
  return m;
}

}  // namespace pdhw
