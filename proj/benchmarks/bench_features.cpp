#include <benchmark/benchmark.h>

#include "pdhw/features.hpp"
#include "pdhw/synth.hpp"

namespace {

const pdhw::Recording& sample_recording() {
  static const pdhw::Recording rec = [] {
    pdhw::SynthSpec spec;
    spec.seed = 3;
    spec.n_per_group = 2;
    spec.tasks = {8};
    return pdhw::generate(spec).cohort.recordings.begin()->second;
  }();
  return rec;
}

void BM_ExtractRecordingFeatures(benchmark::State& state) {
  const auto& rec = sample_recording();
  pdhw::FeatureConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pdhw::extract_recording_features(rec, config));
  }
}
BENCHMARK(BM_ExtractRecordingFeatures)->Unit(benchmark::kMillisecond);

void BM_LowessSmooth(benchmark::State& state) {
  std::vector<double> series;
  for (int i = 0; i < 1000; ++i) series.push_back(std::sin(i * 0.05) + 0.1 * (i % 7));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pdhw::lowess_smooth(series, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_LowessSmooth)->Arg(5)->Arg(21);

void BM_SegmentStrokes(benchmark::State& state) {
  const auto& rec = sample_recording();
  for (auto _ : state) {
    benchmark::DoNotOptimize(pdhw::segment_strokes(rec));
  }
}
BENCHMARK(BM_SegmentStrokes);

}  // namespace
