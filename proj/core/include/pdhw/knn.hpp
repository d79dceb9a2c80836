#pragma once

#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace pdhw {

// Euclidean k-nearest-neighbour voter. Distance ties break on the lower
// reference index; with odd k a binary vote cannot tie.
struct KnnModel {
  std::vector<std::vector<double>> reference_points;
  std::vector<int> reference_labels;  // -1/+1
  int k = 3;

  nlohmann::json to_json() const;
  static KnnModel from_json(const nlohmann::json& j);
};

KnnModel knn_fit(const std::vector<std::vector<double>>& X, std::span<const int> y, int k = 3);

int knn_predict(const KnnModel& model, std::span<const double> x);

}  // namespace pdhw
