#include "pdhw/knn.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "pdhw/error.hpp"

namespace pdhw {

KnnModel knn_fit(const std::vector<std::vector<double>>& X, std::span<const int> y, int k) {
  if (X.empty() || X.size() != y.size()) raise(Err::EmptyModel, "empty reference set");
  if (k < 1 || k % 2 == 0 || static_cast<size_t>(k) > X.size()) {
    raise(Err::DimensionMismatch, "k must be odd, >= 1, and <= the reference count");
  }
  KnnModel m;
  m.reference_points = X;
  m.reference_labels.assign(y.begin(), y.end());
  m.k = k;
  return m;
}

int knn_predict(const KnnModel& model, std::span<const double> x) {
  const size_t n = model.reference_points.size();
  if (n == 0) raise(Err::EmptyModel, "model has no reference points");

  std::vector<std::pair<double, size_t>> by_distance(n);
  for (size_t i = 0; i < n; ++i) {
    const auto& p = model.reference_points[i];
    if (p.size() != x.size()) raise(Err::DimensionMismatch, "query dimension mismatch");
    double d2 = 0.0;
    for (size_t j = 0; j < p.size(); ++j) {
      const double d = p[j] - x[j];
      d2 += d * d;
    }
    by_distance[i] = {d2, i};
  }
  const size_t k = static_cast<size_t>(model.k);
  std::partial_sort(by_distance.begin(), by_distance.begin() + static_cast<long>(k),
                    by_distance.end());

  int vote = 0;
  for (size_t i = 0; i < k; ++i) vote += model.reference_labels[by_distance[i].second];
  return vote >= 0 ? 1 : -1;
}

nlohmann::json KnnModel::to_json() const {
  nlohmann::json j;
  j["format"] = "pdhw-knn-1";
  j["k"] = k;
  j["reference_points"] = reference_points;
  j["reference_labels"] = reference_labels;
  return j;
}

KnnModel KnnModel::from_json(const nlohmann::json& j) {
  KnnModel m;
  m.k = j.at("k").get<int>();
  m.reference_points = j.at("reference_points").get<std::vector<std::vector<double>>>();
  m.reference_labels = j.at("reference_labels").get<std::vector<int>>();
  return m;
}

}  // namespace pdhw
