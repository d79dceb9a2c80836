#pragma once

#include <vector>

#include "pdhw/signal.hpp"

namespace pdhw {

// Raw kinematic quantities for one recording, before statistical functionals
// are applied. Per-sample series are concatenated across strokes; per-stroke
// quantities keep one entry per stroke.
struct KinematicRaw {
  std::vector<double> stroke_speeds;  // mm/s, one per stroke
  double speed = 0.0;                 // total on-surface path / writing span
  DerivedSeries series;               // concatenated across strokes
  std::vector<double> ncv;            // local-extrema count of |v| per stroke
  std::vector<double> nca;            // local-extrema count of |a| per stroke
  double relative_ncv = 0.0;          // mean NCV / writing duration, 1/s
  double relative_nca = 0.0;
  double on_surface_time = 0.0;       // s
  double normalized_on_surface_time = 0.0;  // in [0, 1]
};

// Stroke path length divided by stroke duration.
double stroke_speed(const Stroke& stroke);

// Total on-surface trajectory length divided by the on-surface writing span
// (first to last on-surface timestamp).
double global_speed(const std::vector<Stroke>& strokes);

// Number of interior local extrema. Plateaus are resolved by comparing
// against the nearest differing neighbours on each side, so a flat top counts
// once and a monotone shelf counts zero times.
int count_direction_changes(const std::vector<double>& series);

// Full Table-of-kinematics computation. `recording_span` is the duration of
// the whole recording including in-air time; it is the normalizer for
// relative NCV/NCA and for normalized on-surface time.
KinematicRaw kinematics_for_recording(const Recording& recording,
                                      const std::vector<Stroke>& strokes,
                                      const std::vector<DerivedSeries>& derived);

// Convenience overload that segments and differentiates internally.
KinematicRaw kinematics_for_recording(const Recording& recording,
                                      const StrokeOptions& stroke_options = {},
                                      const KinematicOptions& kin_options = {});

}  // namespace pdhw
