#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "pdhw/kinematics.hpp"
#include "pdhw/synth.hpp"
#include "pdhw/util.hpp"

using namespace pdhw;

namespace {

Stroke stroke_from_points(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& t) {
  Stroke s;
  s.x = x;
  s.y = y;
  s.t = t;
  s.pressure.assign(x.size(), 100.0);
  s.start_time = t.front();
  s.end_time = t.back();
  for (size_t i = 1; i < x.size(); ++i) {
    s.path_length += std::hypot(x[i] - x[i - 1], y[i] - y[i - 1]);
  }
  return s;
}

// Independent extremum oracle: collapse consecutive duplicates, then count
// interior sign changes of the first difference.
int extrema_oracle(const std::vector<double>& series) {
  std::vector<double> dedup;
  for (double v : series) {
    if (dedup.empty() || dedup.back() != v) dedup.push_back(v);
  }
  int count = 0;
  for (size_t i = 1; i + 1 < dedup.size(); ++i) {
    if ((dedup[i] - dedup[i - 1]) * (dedup[i + 1] - dedup[i]) < 0) ++count;
  }
  return count;
}

Recording one_stroke_recording(double duration, double speed, double rate_hz) {
  Recording r;
  r.subject_id = "k";
  r.task_id = 2;
  r.scale_mm_per_unit = 1.0;
  const int n = static_cast<int>(duration * rate_hz) + 1;
  for (int i = 0; i < n; ++i) {
    Sample s;
    s.t = i / rate_hz;
    s.x = speed * s.t;
    s.y = 0.0;
    s.button = 1;
    s.pressure = 200.0;
    r.samples.push_back(s);
  }
  return r;
}

}  // namespace

TEST_CASE("stroke_speed on straight and L-shaped strokes") {
  const auto straight =
      stroke_from_points({0.0, 5.0, 10.0}, {0.0, 0.0, 0.0}, {0.0, 0.5, 1.0});
  CHECK(stroke_speed(straight) == doctest::Approx(10.0).epsilon(1e-12));

  // 3 mm right then 4 mm up in half a second: 7 mm of path.
  const auto ell = stroke_from_points({0.0, 3.0, 3.0}, {0.0, 0.0, 4.0}, {0.0, 0.25, 0.5});
  CHECK(stroke_speed(ell) == doctest::Approx(14.0).epsilon(1e-12));
}

TEST_CASE("stroke_speed matches the segment-sum oracle on random polylines") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = 2 + rng.below(30);
    std::vector<double> x, y, t;
    for (size_t i = 0; i < n; ++i) {
      x.push_back(rng.normal() * 10);
      y.push_back(rng.normal() * 10);
      t.push_back(0.01 * static_cast<double>(i) + 0.001);
    }
    const auto s = stroke_from_points(x, y, t);
    double path = 0.0;
    for (size_t i = 1; i < n; ++i) {
      path += std::sqrt((x[i] - x[i - 1]) * (x[i] - x[i - 1]) +
                        (y[i] - y[i - 1]) * (y[i] - y[i - 1]));
    }
    const double expected = path / (t.back() - t.front());
    CHECK(stroke_speed(s) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("stroke_speed rejects zero duration") {
  auto s = stroke_from_points({0.0, 1.0}, {0.0, 0.0}, {0.5, 0.5});
  CHECK_THROWS_AS(stroke_speed(s), Error);
}

TEST_CASE("global_speed spans pen lifts") {
  const auto a = stroke_from_points({0.0, 10.0}, {0.0, 0.0}, {0.0, 1.0});
  CHECK(global_speed({a}) == doctest::Approx(stroke_speed(a)).epsilon(1e-12));

  // Two 10 mm strokes of 1 s each with a 1 s lift between them.
  const auto b = stroke_from_points({10.0, 20.0}, {0.0, 0.0}, {2.0, 3.0});
  CHECK(global_speed({a, b}) == doctest::Approx(20.0 / 3.0).epsilon(1e-12));

  CHECK_THROWS_AS(global_speed({}), Error);
}

TEST_CASE("count_direction_changes basics") {
  CHECK(count_direction_changes({1, 2, 3, 4, 5}) == 0);
  CHECK(count_direction_changes({5, 5, 5}) == 0);
  CHECK(count_direction_changes({0, 1, 0}) == 1);
  CHECK(count_direction_changes({0, 1, 1, 0}) == 1);  // plateau counts once
  CHECK(count_direction_changes({0, 1, 1, 2}) == 0);  // monotone shelf
  CHECK_THROWS_AS(count_direction_changes({1, 2}), Error);
}

TEST_CASE("count_direction_changes: dense sine over three periods has 6 extrema") {
  std::vector<double> v;
  for (int i = 0; i <= 300; ++i) {
    v.push_back(std::sin(2.0 * 3.14159265358979323846 * 3.0 * i / 300.0));
  }
  CHECK(count_direction_changes(v) == 6);
}

TEST_CASE("count_direction_changes agrees with the dedup-scan oracle") {
  Rng rng(29);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> v;
    const size_t n = 3 + rng.below(40);
    for (size_t i = 0; i < n; ++i) {
      // Quantized values force plateaus and exact ties.
      v.push_back(std::floor(rng.normal() * 3.0));
    }
    CHECK(count_direction_changes(v) == extrema_oracle(v));
  }
}

TEST_CASE("kinematics_for_recording on a constant-velocity stroke") {
  const auto fx = analytic_fixtures();
  const auto kin = kinematics_for_recording(fx.line);
  REQUIRE(kin.stroke_speeds.size() == 1);
  CHECK(kin.stroke_speeds[0] == doctest::Approx(fx.line_speed).epsilon(1e-9));
  CHECK(kin.speed == doctest::Approx(fx.line_speed).epsilon(1e-9));
  CHECK(kin.ncv[0] == 0.0);
  CHECK(kin.nca[0] == 0.0);
  CHECK(kin.relative_ncv == 0.0);
  CHECK(kin.normalized_on_surface_time == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalized on-surface time uses the whole recording span") {
  // 1 s stroke, then 1 s of in-air samples: half the recording on-surface.
  Recording r = one_stroke_recording(1.0, 10.0, 100.0);
  const double t0 = r.samples.back().t;
  for (int i = 1; i <= 100; ++i) {
    Sample s;
    s.t = t0 + i * 0.01;
    s.x = r.samples.back().x;
    s.y = 0.0;
    s.button = 0;
    s.pressure = 0.0;
    r.samples.push_back(s);
  }
  const auto kin = kinematics_for_recording(r);
  CHECK(kin.on_surface_time == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(kin.normalized_on_surface_time == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("scripted velocity oscillations drive the NCV count") {
  // Speed profile with k full modulation periods: 2k interior extrema.
  const int k = 5;
  Recording r;
  r.subject_id = "osc";
  r.task_id = 2;
  r.scale_mm_per_unit = 1.0;
  double x = 0.0;
  const double dt = 1.0 / 128.0;
  const int n = 128 * 2 + 1;  // 2 s
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    const double speed = 20.0 + 8.0 * std::sin(2.0 * 3.14159265358979323846 * (k / 2.0) * t);
    if (i > 0) x += speed * dt;
    Sample s;
    s.t = t;
    s.x = x;
    s.y = 0.0;
    s.button = 1;
    s.pressure = 300.0;
    r.samples.push_back(s);
  }
  const auto kin = kinematics_for_recording(r);
  CHECK(std::abs(kin.ncv[0] - 2.0 * k) <= 1.0);
}

TEST_CASE("features are invariant to time and space translation") {
  const auto fx = analytic_fixtures();
  const auto base = kinematics_for_recording(fx.sine);

  Recording shifted = fx.sine;
  for (auto& s : shifted.samples) {
    s.t += 11.5;
    s.x += 400.0;
    s.y -= 250.0;
  }
  const auto moved = kinematics_for_recording(shifted);

  CHECK(moved.speed == doctest::Approx(base.speed).epsilon(1e-9));
  CHECK(moved.ncv[0] == base.ncv[0]);
  CHECK(moved.nca[0] == base.nca[0]);
  CHECK(moved.on_surface_time == doctest::Approx(base.on_surface_time).epsilon(1e-9));
  CHECK(moved.normalized_on_surface_time ==
        doctest::Approx(base.normalized_on_surface_time).epsilon(1e-9));
  for (size_t i = 0; i < base.series.velocity.size(); ++i) {
    CHECK(moved.series.velocity[i] == doctest::Approx(base.series.velocity[i]).epsilon(1e-9));
  }
}

TEST_CASE("uniform time dilation rescales derivative orders") {
  const auto fx = analytic_fixtures();
  const double c = 2.0;
  Recording slowed = fx.circle;
  for (auto& s : slowed.samples) s.t *= c;

  const auto base = kinematics_for_recording(fx.circle);
  const auto slow = kinematics_for_recording(slowed);

  CHECK(slow.speed == doctest::Approx(base.speed / c).epsilon(1e-6));
  CHECK(slow.stroke_speeds[0] == doctest::Approx(base.stroke_speeds[0] / c).epsilon(1e-6));
  CHECK(slow.normalized_on_surface_time ==
        doctest::Approx(base.normalized_on_surface_time).epsilon(1e-9));
  const size_t mid = base.series.velocity.size() / 2;
  CHECK(slow.series.velocity[mid] ==
        doctest::Approx(base.series.velocity[mid] / c).epsilon(1e-6));
  CHECK(slow.series.acceleration[mid] ==
        doctest::Approx(base.series.acceleration[mid] / (c * c)).epsilon(1e-6));
  CHECK(slow.series.jerk[mid] ==
        doctest::Approx(base.series.jerk[mid] / (c * c * c)).epsilon(1e-6));
}

TEST_CASE("NCV and NCA are non-negative integers per stroke") {
  SynthSpec spec;
  spec.seed = 77;
  spec.n_per_group = 2;
  spec.tasks = {2};
  const auto synth = generate(spec);
  for (const auto& [key, rec] : synth.cohort.recordings) {
    const auto kin = kinematics_for_recording(rec);
    for (double v : kin.ncv) {
      CHECK(v >= 0.0);
      CHECK(v == std::floor(v));
    }
    for (double v : kin.nca) {
      CHECK(v >= 0.0);
      CHECK(v == std::floor(v));
    }
  }
}

TEST_CASE("kinematics_for_recording requires a usable stroke") {
  Recording r = one_stroke_recording(0.02, 10.0, 100.0);  // 3 samples only
  CHECK_THROWS_AS(kinematics_for_recording(r), Error);
}
