#include <benchmark/benchmark.h>

#include "pdhw/stats.hpp"
#include "pdhw/util.hpp"

namespace {

void BM_MannWhitneyExact(benchmark::State& state) {
  pdhw::Rng rng(1);
  std::vector<double> a(7), b(7);
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal() + 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pdhw::mann_whitney_u(a, b));
  }
}
BENCHMARK(BM_MannWhitneyExact);

void BM_MannWhitneyApprox(benchmark::State& state) {
  pdhw::Rng rng(2);
  std::vector<double> a(37), b(38);
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal() + 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pdhw::mann_whitney_u(a, b));
  }
}
BENCHMARK(BM_MannWhitneyApprox);

void BM_SpearmanVsLabel(benchmark::State& state) {
  pdhw::Rng rng(3);
  std::vector<double> column(75);
  std::vector<int> labels(75);
  for (size_t i = 0; i < column.size(); ++i) {
    column[i] = rng.normal();
    labels[i] = i % 2;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(pdhw::spearman_vs_label(column, labels));
  }
}
BENCHMARK(BM_SpearmanVsLabel);

}  // namespace
