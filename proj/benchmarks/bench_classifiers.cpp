#include <benchmark/benchmark.h>

#include "pdhw/adaboost.hpp"
#include "pdhw/knn.hpp"
#include "pdhw/svm.hpp"
#include "pdhw/util.hpp"

namespace {

struct Dataset {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
};

Dataset two_gaussians(size_t n_per_class, size_t dim, uint64_t seed) {
  Dataset d;
  pdhw::Rng rng(seed);
  for (size_t i = 0; i < 2 * n_per_class; ++i) {
    const int label = i < n_per_class ? 1 : -1;
    std::vector<double> row(dim);
    for (auto& v : row) v = rng.normal() * 0.8 + (label == 1 ? 1.0 : -1.0);
    d.x.push_back(std::move(row));
    d.y.push_back(label);
  }
  return d;
}

void BM_SvmTrain(benchmark::State& state) {
  const auto data = two_gaussians(static_cast<size_t>(state.range(0)), 20, 5);
  pdhw::SvmConfig cfg;
  cfg.c = 1.0;
  cfg.gamma = 2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pdhw::svm_train(data.x, data.y, cfg, 7));
  }
}
BENCHMARK(BM_SvmTrain)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_AdaBoostTrain(benchmark::State& state) {
  const auto data = two_gaussians(40, 20, 6);
  pdhw::AdaBoostConfig cfg;
  cfg.max_rounds = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pdhw::adaboost_train(data.x, data.y, cfg, 7));
  }
}
BENCHMARK(BM_AdaBoostTrain)->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_KnnPredict(benchmark::State& state) {
  const auto data = two_gaussians(40, 20, 8);
  const auto model = pdhw::knn_fit(data.x, data.y, 3);
  const std::vector<double> query(20, 0.25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pdhw::knn_predict(model, query));
  }
}
BENCHMARK(BM_KnnPredict);

}  // namespace
