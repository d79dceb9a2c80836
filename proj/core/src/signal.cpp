#include "pdhw/signal.hpp"

#include <algorithm>
#include <cmath>

#include "pdhw/util.hpp"

namespace pdhw {

std::vector<Stroke> segment_strokes(const Recording& recording, const StrokeOptions& options,
                                    StrokeDiagnostics* diagnostics) {
  std::vector<Stroke> strokes;
  const auto& samples = recording.samples;
  const double scale = recording.scale_mm_per_unit;

  size_t i = 0;
  while (i < samples.size()) {
    if (samples[i].button != 1) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < samples.size() && samples[j].button == 1) ++j;
    const size_t run = j - i;
    if (run < static_cast<size_t>(options.min_stroke_samples)) {
      if (diagnostics) ++diagnostics->discarded_short_runs;
    } else {
      Stroke s;
      s.first_index = i;
      s.x.reserve(run);
      s.y.reserve(run);
      s.t.reserve(run);
      s.pressure.reserve(run);
      for (size_t k = i; k < j; ++k) {
        s.x.push_back(samples[k].x * scale);
        s.y.push_back(samples[k].y * scale);
        s.t.push_back(samples[k].t);
        s.pressure.push_back(samples[k].pressure);
      }
      s.start_time = s.t.front();
      s.end_time = s.t.back();
      for (size_t k = 1; k < run; ++k) {
        s.path_length += std::hypot(s.x[k] - s.x[k - 1], s.y[k] - s.y[k - 1]);
      }
      strokes.push_back(std::move(s));
    }
    i = j;
  }
  return strokes;
}

std::vector<double> lowess_smooth(const std::vector<double>& series, int span) {
  const size_t n = series.size();
  if (n < 3) raise(Err::SeriesTooShort, "lowess needs at least 3 samples");
  if (span < 3 || span % 2 == 0) raise(Err::SpanTooLarge, "span must be odd and >= 3");
  if (static_cast<size_t>(span) > n) {
    raise(Err::SpanTooLarge, "span " + std::to_string(span) + " exceeds series length " +
                                 std::to_string(n));
  }

  const int half = span / 2;
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    const size_t lo = i >= static_cast<size_t>(half) ? i - half : 0;
    const size_t hi = std::min(n - 1, i + half);
    double dmax = 0.0;
    for (size_t k = lo; k <= hi; ++k) {
      dmax = std::max(dmax, std::abs(static_cast<double>(k) - static_cast<double>(i)));
    }
    if (dmax == 0.0) {
      out[i] = series[i];
      continue;
    }
    // Weighted degree-1 fit in the index variable, evaluated at the centre.
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (size_t k = lo; k <= hi; ++k) {
      const double d = std::abs(static_cast<double>(k) - static_cast<double>(i)) / dmax;
      const double u = 1.0 - d * d * d;
      const double w = u * u * u;
      const double xk = static_cast<double>(k) - static_cast<double>(i);
      sw += w;
      swx += w * xk;
      swy += w * series[k];
      swxx += w * xk * xk;
      swxy += w * xk * series[k];
    }
    const double det = sw * swxx - swx * swx;
    if (sw <= 0.0 || std::abs(det) < 1e-300) {
      out[i] = series[i];
    } else {
      // Intercept of the fit = value at the centre point (xk = 0 there).
      out[i] = (swy * swxx - swx * swxy) / det;
    }
  }
  return out;
}

namespace {

// Nearest index before i with a strictly smaller timestamp, or npos.
size_t prev_distinct(const std::vector<double>& t, size_t i) {
  for (size_t k = i; k > 0; --k) {
    if (t[k - 1] < t[i]) return k - 1;
  }
  return static_cast<size_t>(-1);
}

size_t next_distinct(const std::vector<double>& t, size_t i) {
  for (size_t k = i + 1; k < t.size(); ++k) {
    if (t[k] > t[i]) return k;
  }
  return static_cast<size_t>(-1);
}

// Derivative at t[i] from samples (a, i, b) with t[a] < t[i] < t[b]. Written
// in difference form so constant series differentiate to exactly zero.
double central(const std::vector<double>& y, const std::vector<double>& t, size_t a, size_t i,
               size_t b) {
  const double hl = t[i] - t[a];
  const double hr = t[b] - t[i];
  return (hl / (hr * (hl + hr))) * (y[b] - y[i]) + (hr / (hl * (hl + hr))) * (y[i] - y[a]);
}

// Second-order one-sided derivative at point p using two neighbours on the
// same side (q nearer, r farther), all with distinct timestamps.
double one_sided(const std::vector<double>& y, const std::vector<double>& t, size_t p, size_t q,
                 size_t r) {
  const double h1 = t[q] - t[p];
  const double h2 = t[r] - t[q];
  const double b = (h1 + h2) / (h1 * h2);
  const double c = -h1 / (h2 * (h1 + h2));
  return b * (y[q] - y[p]) + c * (y[r] - y[p]);
}

}  // namespace

std::vector<double> differentiate(const std::vector<double>& series,
                                  const std::vector<double>& timestamps) {
  const size_t n = series.size();
  if (n < 2 || timestamps.size() != n) {
    raise(Err::SeriesTooShort, "differentiate needs >= 2 samples with matching timestamps");
  }
  if (timestamps.back() <= timestamps.front()) {
    bool any = false;
    for (size_t i = 1; i < n && !any; ++i) any = timestamps[i] > timestamps[i - 1];
    if (!any) raise(Err::AllTimestampsEqual, "no distinct timestamps to differentiate over");
  }

  const size_t npos = static_cast<size_t>(-1);
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    const size_t a = prev_distinct(timestamps, i);
    const size_t b = next_distinct(timestamps, i);
    if (a != npos && b != npos) {
      out[i] = central(series, timestamps, a, i, b);
    } else if (b != npos) {
      const size_t c = next_distinct(timestamps, b);
      out[i] = c != npos ? one_sided(series, timestamps, i, b, c)
                         : (series[b] - series[i]) / (timestamps[b] - timestamps[i]);
    } else if (a != npos) {
      const size_t c = prev_distinct(timestamps, a);
      out[i] = c != npos ? one_sided(series, timestamps, i, a, c)
                         : (series[i] - series[a]) / (timestamps[i] - timestamps[a]);
    } else {
      // Repeated timestamp with no distinct neighbour on either side cannot
      // happen when some timestamps differ; guarded above.
      out[i] = 0.0;
    }
  }
  return out;
}

DerivedSeries derive_kinematics(const Stroke& stroke, const KinematicOptions& options) {
  const size_t n = stroke.size();
  if (n < 4) {
    raise(Err::StrokeTooShort,
          "kinematics need >= 4 samples, stroke has " + std::to_string(n));
  }

  const std::vector<double>* xs = &stroke.x;
  const std::vector<double>* ys = &stroke.y;
  std::vector<double> sx, sy;
  if (options.differentiate_smoothed) {
    int span = std::min<int>(options.lowess_span, static_cast<int>(n));
    if (span % 2 == 0) --span;
    sx = lowess_smooth(stroke.x, span);
    sy = lowess_smooth(stroke.y, span);
    xs = &sx;
    ys = &sy;
  }

  DerivedSeries d;
  d.horizontal_velocity = differentiate(*xs, stroke.t);
  d.vertical_velocity = differentiate(*ys, stroke.t);
  d.horizontal_acceleration = differentiate(d.horizontal_velocity, stroke.t);
  d.vertical_acceleration = differentiate(d.vertical_velocity, stroke.t);
  d.horizontal_jerk = differentiate(d.horizontal_acceleration, stroke.t);
  d.vertical_jerk = differentiate(d.vertical_acceleration, stroke.t);

  d.velocity.resize(n);
  d.acceleration.resize(n);
  d.jerk.resize(n);
  for (size_t i = 0; i < n; ++i) {
    d.velocity[i] = std::hypot(d.horizontal_velocity[i], d.vertical_velocity[i]);
    d.acceleration[i] = std::hypot(d.horizontal_acceleration[i], d.vertical_acceleration[i]);
    d.jerk[i] = std::hypot(d.horizontal_jerk[i], d.vertical_jerk[i]);
  }
  return d;
}

}  // namespace pdhw
