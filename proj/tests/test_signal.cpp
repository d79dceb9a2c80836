#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "pdhw/signal.hpp"
#include "pdhw/synth.hpp"
#include "pdhw/util.hpp"

using namespace pdhw;

namespace {

Recording recording_from_buttons(const std::vector<int>& buttons) {
  Recording r;
  r.subject_id = "b";
  r.task_id = 2;
  r.scale_mm_per_unit = 1.0;
  for (size_t i = 0; i < buttons.size(); ++i) {
    Sample s;
    s.x = static_cast<double>(i);
    s.y = 0.0;
    s.t = 0.01 * static_cast<double>(i);
    s.button = buttons[i];
    s.pressure = buttons[i] ? 100.0 : 0.0;
    r.samples.push_back(s);
  }
  return r;
}

// Brute-force maximal-run scan, the oracle for stroke boundaries.
std::vector<std::pair<size_t, size_t>> runs_of_ones(const std::vector<int>& buttons) {
  std::vector<std::pair<size_t, size_t>> out;
  size_t i = 0;
  while (i < buttons.size()) {
    if (buttons[i] == 1) {
      size_t j = i;
      while (j < buttons.size() && buttons[j] == 1) ++j;
      out.emplace_back(i, j);
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

// Independent lowess oracle: same window and tricube weights, but solved by
// building the dense normal equations and applying Cramer's rule.
double lowess_point_oracle(const std::vector<double>& y, int span, size_t i) {
  const int half = span / 2;
  const size_t n = y.size();
  const size_t lo = i >= static_cast<size_t>(half) ? i - half : 0;
  const size_t hi = std::min(n - 1, i + half);
  double dmax = 0.0;
  for (size_t k = lo; k <= hi; ++k)
    dmax = std::max(dmax, std::abs(double(k) - double(i)));
  if (dmax == 0.0) return y[i];
  double a00 = 0, a01 = 0, a11 = 0, b0 = 0, b1 = 0;
  for (size_t k = lo; k <= hi; ++k) {
    const double d = std::abs(double(k) - double(i)) / dmax;
    const double w = std::pow(1.0 - d * d * d, 3.0);
    const double t = double(k) - double(i);
    a00 += w;
    a01 += w * t;
    a11 += w * t * t;
    b0 += w * y[k];
    b1 += w * t * y[k];
  }
  const double det = a00 * a11 - a01 * a01;
  if (a00 <= 0 || std::abs(det) < 1e-300) return y[i];
  return (b0 * a11 - a01 * b1) / det;  // intercept
}

}  // namespace

TEST_CASE("segment_strokes honors the minimum-run threshold") {
  const std::vector<int> buttons = {1, 1, 1, 0, 0, 1, 1};
  const auto rec = recording_from_buttons(buttons);

  StrokeDiagnostics diag;
  auto strokes = segment_strokes(rec, StrokeOptions{5}, &diag);
  CHECK(strokes.empty());
  CHECK(diag.discarded_short_runs == 2);

  strokes = segment_strokes(rec, StrokeOptions{2});
  REQUIRE(strokes.size() == 2);
  CHECK(strokes[0].size() == 3);
  CHECK(strokes[1].size() == 2);
  CHECK(strokes[0].first_index == 0);
  CHECK(strokes[1].first_index == 5);
}

TEST_CASE("an all-on-surface recording is one stroke") {
  const auto rec = recording_from_buttons(std::vector<int>(20, 1));
  const auto strokes = segment_strokes(rec);
  REQUIRE(strokes.size() == 1);
  CHECK(strokes[0].size() == 20);
  CHECK(strokes[0].path_length == doctest::Approx(19.0));
}

TEST_CASE("stroke boundaries match the brute-force run scan on fuzzed buttons") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> buttons;
    const size_t n = 2 + rng.below(40);
    for (size_t i = 0; i < n; ++i) buttons.push_back(rng.unit() < 0.5 ? 1 : 0);
    if (std::count(buttons.begin(), buttons.end(), 1) < 2) buttons.assign(4, 1);

    const auto rec = recording_from_buttons(buttons);
    const auto strokes = segment_strokes(rec, StrokeOptions{1});
    const auto expected = runs_of_ones(buttons);
    REQUIRE(strokes.size() == expected.size());
    for (size_t s = 0; s < strokes.size(); ++s) {
      CHECK(strokes[s].first_index == expected[s].first);
      CHECK(strokes[s].size() == expected[s].second - expected[s].first);
    }
  }
}

TEST_CASE("stroke partition covers the sample set exactly") {
  Rng rng(123);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> buttons;
    const size_t n = 10 + rng.below(60);
    for (size_t i = 0; i < n; ++i) buttons.push_back(rng.unit() < 0.6 ? 1 : 0);
    buttons[0] = buttons[1] = 1;
    const auto rec = recording_from_buttons(buttons);

    StrokeDiagnostics diag;
    const auto strokes = segment_strokes(rec, StrokeOptions{3}, &diag);
    std::vector<char> covered(n, 0);
    size_t covered_count = 0;
    for (const auto& s : strokes) {
      for (size_t k = s.first_index; k < s.first_index + s.size(); ++k) {
        CHECK_FALSE(covered[k]);  // pairwise disjoint
        covered[k] = 1;
        ++covered_count;
      }
    }
    // Strokes + in-air samples + discarded short runs tile the index set.
    size_t in_air = 0, short_run_samples = 0;
    for (const auto [begin, end] : runs_of_ones(buttons)) {
      if (end - begin < 3) short_run_samples += end - begin;
    }
    for (int b : buttons) in_air += (b == 0);
    CHECK(covered_count + in_air + short_run_samples == n);
  }
}

TEST_CASE("lowess reproduces lines and constants") {
  std::vector<double> line, constant;
  for (int i = 0; i < 30; ++i) {
    line.push_back(3.5 * i - 7.0);
    constant.push_back(4.25);
  }
  for (int span : {3, 5, 9, 29}) {
    const auto smoothed = lowess_smooth(line, span);
    for (size_t i = 0; i < line.size(); ++i) {
      CHECK(smoothed[i] == doctest::Approx(line[i]).epsilon(1e-9));
    }
  }
  const auto smooth_const = lowess_smooth(constant, 5);
  for (double v : smooth_const) CHECK(v == doctest::Approx(4.25).epsilon(1e-12));
}

TEST_CASE("lowess matches the dense weighted-least-squares oracle") {
  Rng rng(31);
  std::vector<double> y;
  for (int i = 0; i < 50; ++i) y.push_back(std::sin(i * 0.3) + rng.normal() * 0.3);
  const auto smoothed = lowess_smooth(y, 7);
  for (size_t i = 0; i < y.size(); ++i) {
    CHECK(smoothed[i] == doctest::Approx(lowess_point_oracle(y, 7, i)).epsilon(1e-9));
  }
}

TEST_CASE("lowess validates its span") {
  std::vector<double> y(10, 1.0);
  CHECK_THROWS_AS(lowess_smooth(y, 4), Error);   // even
  CHECK_THROWS_AS(lowess_smooth(y, 11), Error);  // longer than the series
  CHECK_THROWS_AS(lowess_smooth({1.0, 2.0}, 3), Error);
}

TEST_CASE("lowess reduces variance on noise around a constant") {
  int reduced = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    std::vector<double> y;
    for (int i = 0; i < 64; ++i) y.push_back(10.0 + rng.normal());
    const auto smoothed = lowess_smooth(y, 5);
    if (sample_std(smoothed) < sample_std(y)) ++reduced;
  }
  CHECK(reduced >= 95);
}

TEST_CASE("differentiate is exact on linear data including endpoints") {
  const std::vector<double> pos = {0.0, 1.0, 2.0, 3.0};
  const std::vector<double> t = {0.0, 0.01, 0.02, 0.03};
  const auto v = differentiate(pos, t);
  for (double vi : v) CHECK(vi == doctest::Approx(100.0).epsilon(1e-9));
}

TEST_CASE("differentiate tracks an analytic sine derivative within 0.5%") {
  const double f = 1.0;
  const double w = 2.0 * 3.14159265358979323846 * f;
  std::vector<double> pos, t;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(i * 0.01);
    pos.push_back(std::sin(w * t.back()));
  }
  const auto v = differentiate(pos, t);
  double worst = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    worst = std::max(worst, std::abs(v[i] - w * std::cos(w * t[i])));
  }
  CHECK(worst <= 0.005 * w);
}

TEST_CASE("differentiate of a constant is zero and is linear") {
  const std::vector<double> t = {0.0, 0.01, 0.03, 0.035, 0.06};
  const std::vector<double> c(5, 2.5);
  for (double vi : differentiate(c, t)) CHECK(vi == 0.0);

  Rng rng(11);
  std::vector<double> fa, fb;
  for (int i = 0; i < 5; ++i) {
    fa.push_back(rng.normal());
    fb.push_back(rng.normal());
  }
  std::vector<double> combo(5);
  for (int i = 0; i < 5; ++i) combo[i] = 2.0 * fa[i] - 3.0 * fb[i];
  const auto da = differentiate(fa, t);
  const auto db = differentiate(fb, t);
  const auto dc = differentiate(combo, t);
  for (int i = 0; i < 5; ++i) {
    CHECK(dc[i] == doctest::Approx(2.0 * da[i] - 3.0 * db[i]).epsilon(1e-12));
  }
}

TEST_CASE("differentiate handles repeated timestamps via distinct neighbours") {
  const std::vector<double> t = {0.0, 0.01, 0.01, 0.02};
  const std::vector<double> pos = {0.0, 1.0, 1.0, 2.0};  // 100 mm/s with a stutter
  const auto v = differentiate(pos, t);
  for (double vi : v) CHECK(vi == doctest::Approx(100.0).epsilon(1e-9));

  const std::vector<double> t_eq(4, 0.5);
  CHECK_THROWS_AS(differentiate(pos, t_eq), Error);
}

TEST_CASE("derive_kinematics on the constant-velocity fixture is exact") {
  const auto fx = analytic_fixtures();
  const auto strokes = segment_strokes(fx.line);
  REQUIRE(strokes.size() == 1);
  const auto d = derive_kinematics(strokes[0]);

  for (size_t i = 0; i < d.velocity.size(); ++i) {
    CHECK(d.velocity[i] == doctest::Approx(fx.line_speed).epsilon(1e-9));
    CHECK(d.horizontal_velocity[i] == doctest::Approx(fx.line_speed).epsilon(1e-9));
    CHECK(d.vertical_velocity[i] == 0.0);
    CHECK(std::abs(d.acceleration[i]) <= 1e-6 * fx.line_speed);
    CHECK(std::abs(d.jerk[i]) <= 1e-6 * fx.line_speed);
  }
}

TEST_CASE("derive_kinematics on uniform circular motion") {
  const auto fx = analytic_fixtures();
  const auto strokes = segment_strokes(fx.circle);
  REQUIRE(strokes.size() == 1);
  const auto d = derive_kinematics(strokes[0]);

  const double speed = fx.circle_radius * fx.circle_omega;
  const double accel = fx.circle_radius * fx.circle_omega * fx.circle_omega;
  for (size_t i = 0; i < d.velocity.size(); ++i) {
    CHECK(std::abs(d.velocity[i] - speed) <= 0.005 * speed);
    CHECK(std::abs(d.acceleration[i] - accel) <= 0.02 * accel);
  }
}

TEST_CASE("derive_kinematics rejects too-short strokes") {
  Stroke s;
  s.x = {0, 1, 2};
  s.y = {0, 0, 0};
  s.t = {0, 0.01, 0.02};
  s.pressure = {1, 1, 1};
  CHECK_THROWS_AS(derive_kinematics(s), Error);
}

TEST_CASE("time reversal negates directional velocities and keeps speed") {
  const auto fx = analytic_fixtures();
  auto strokes = segment_strokes(fx.line);
  REQUIRE(strokes.size() == 1);
  const auto& fwd = strokes[0];

  Stroke rev = fwd;
  const double t_end = fwd.t.back();
  for (size_t i = 0; i < fwd.size(); ++i) {
    const size_t j = fwd.size() - 1 - i;
    rev.x[i] = fwd.x[j];
    rev.y[i] = fwd.y[j];
    rev.t[i] = t_end - fwd.t[j];
    rev.pressure[i] = fwd.pressure[j];
  }
  rev.start_time = rev.t.front();
  rev.end_time = rev.t.back();

  const auto df = derive_kinematics(fwd);
  const auto dr = derive_kinematics(rev);
  for (size_t i = 0; i < fwd.size(); ++i) {
    const size_t j = fwd.size() - 1 - i;
    CHECK(dr.horizontal_velocity[i] == doctest::Approx(-df.horizontal_velocity[j]).epsilon(1e-9));
    CHECK(dr.velocity[i] == doctest::Approx(df.velocity[j]).epsilon(1e-9));
  }
}
