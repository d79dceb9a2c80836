#include "pdhw/kinematics.hpp"

#include <cmath>

#include "pdhw/util.hpp"

namespace pdhw {

double stroke_speed(const Stroke& stroke) {
  const double duration = stroke.end_time - stroke.start_time;
  if (duration <= 0.0) raise(Err::ZeroDuration, "stroke has zero duration");
  return stroke.path_length / duration;
}

double global_speed(const std::vector<Stroke>& strokes) {
  if (strokes.empty()) raise(Err::NoStrokes, "global speed needs at least one stroke");
  double path = 0.0;
  for (const auto& s : strokes) path += s.path_length;
  const double span = strokes.back().end_time - strokes.front().start_time;
  if (span <= 0.0) raise(Err::ZeroDuration, "writing span is zero");
  return path / span;
}

int count_direction_changes(const std::vector<double>& series) {
  const size_t n = series.size();
  if (n < 3) raise(Err::SeriesTooShort, "extremum count needs >= 3 samples");

  int count = 0;
  for (size_t i = 1; i + 1 < n; ++i) {
    // Nearest differing neighbours; ties collapse onto the plateau edges so a
    // flat extremum is counted exactly once (at its left edge).
    if (series[i] == series[i - 1]) continue;
    size_t j = i + 1;
    while (j < n && series[j] == series[i]) ++j;
    if (j == n) break;
    const double left = series[i] - series[i - 1];
    const double right = series[j] - series[i];
    if (left * right < 0.0) ++count;
  }
  return count;
}

KinematicRaw kinematics_for_recording(const Recording& recording,
                                      const std::vector<Stroke>& strokes,
                                      const std::vector<DerivedSeries>& derived) {
  if (strokes.empty()) raise(Err::NoStrokes, recording.subject_id + " has no usable strokes");

  KinematicRaw out;
  out.stroke_speeds.reserve(strokes.size());
  out.ncv.reserve(strokes.size());
  out.nca.reserve(strokes.size());

  auto append = [](std::vector<double>& dst, const std::vector<double>& src) {
    dst.insert(dst.end(), src.begin(), src.end());
  };

  for (size_t s = 0; s < strokes.size(); ++s) {
    const auto& stroke = strokes[s];
    const auto& d = derived[s];
    out.stroke_speeds.push_back(stroke_speed(stroke));
    out.ncv.push_back(count_direction_changes(d.velocity));
    out.nca.push_back(count_direction_changes(d.acceleration));
    out.on_surface_time += stroke.end_time - stroke.start_time;

    append(out.series.velocity, d.velocity);
    append(out.series.horizontal_velocity, d.horizontal_velocity);
    append(out.series.vertical_velocity, d.vertical_velocity);
    append(out.series.acceleration, d.acceleration);
    append(out.series.horizontal_acceleration, d.horizontal_acceleration);
    append(out.series.vertical_acceleration, d.vertical_acceleration);
    append(out.series.jerk, d.jerk);
    append(out.series.horizontal_jerk, d.horizontal_jerk);
    append(out.series.vertical_jerk, d.vertical_jerk);
  }

  out.speed = global_speed(strokes);

  // Writing duration = whole recording span including in-air movement.
  const double span = recording.duration();
  if (span <= 0.0) raise(Err::ZeroDuration, "recording span is zero");
  out.relative_ncv = mean_of(out.ncv) / span;
  out.relative_nca = mean_of(out.nca) / span;
  out.normalized_on_surface_time = out.on_surface_time / span;
  return out;
}

KinematicRaw kinematics_for_recording(const Recording& recording,
                                      const StrokeOptions& stroke_options,
                                      const KinematicOptions& kin_options) {
  const auto strokes = segment_strokes(recording, stroke_options);
  std::vector<DerivedSeries> derived;
  derived.reserve(strokes.size());
  for (const auto& s : strokes) derived.push_back(derive_kinematics(s, kin_options));
  return kinematics_for_recording(recording, strokes, derived);
}

}  // namespace pdhw
