#pragma once

#include <vector>

#include "pdhw/cohort.hpp"

namespace pdhw {

// Maximal on-surface run of samples between two pen lifts. Coordinates are
// converted to millimetres when the stroke is cut out of the recording;
// pressure stays in device units.
struct Stroke {
  std::vector<double> x;  // mm
  std::vector<double> y;  // mm
  std::vector<double> t;  // s
  std::vector<double> pressure;
  size_t first_index = 0;  // position of the run inside the recording
  double start_time = 0.0;
  double end_time = 0.0;
  double path_length = 0.0;  // mm, polyline length

  size_t size() const { return t.size(); }
};

struct StrokeOptions {
  // Runs shorter than this are discarded (jerk needs three differentiations).
  int min_stroke_samples = 5;
};

struct StrokeDiagnostics {
  int discarded_short_runs = 0;
};

// Ordered, disjoint, maximal button=1 runs. Runs shorter than
// min_stroke_samples are dropped and counted in diagnostics.
std::vector<Stroke> segment_strokes(const Recording& recording, const StrokeOptions& options = {},
                                    StrokeDiagnostics* diagnostics = nullptr);

// Local regression smoothing: tricube-weighted degree-1 least squares over a
// centred index window of `span` points, shrunk at the boundaries. Matches
// the classic lowess definition for uniformly indexed series.
std::vector<double> lowess_smooth(const std::vector<double>& series, int span);

// dy/dt on a possibly non-uniform grid: three-point central differences at
// interior points, three-point one-sided at the ends (two-point when only two
// distinct timestamps are available). Repeated timestamps are handled by
// differencing against the nearest distinct-timestamp neighbours.
std::vector<double> differentiate(const std::vector<double>& series,
                                  const std::vector<double>& timestamps);

// Per-sample kinematic series for one stroke, aligned with the stroke samples.
// velocity/acceleration/jerk are vector magnitudes of the successive time
// derivatives of (x, y); the horizontal/vertical variants are the signed
// per-axis derivatives.
struct DerivedSeries {
  std::vector<double> velocity;
  std::vector<double> horizontal_velocity;
  std::vector<double> vertical_velocity;
  std::vector<double> acceleration;
  std::vector<double> horizontal_acceleration;
  std::vector<double> vertical_acceleration;
  std::vector<double> jerk;
  std::vector<double> horizontal_jerk;
  std::vector<double> vertical_jerk;
};

struct KinematicOptions {
  // When set, x/y are lowess-smoothed before the first differentiation.
  bool differentiate_smoothed = false;
  int lowess_span = 5;
};

DerivedSeries derive_kinematics(const Stroke& stroke, const KinematicOptions& options = {});

}  // namespace pdhw
