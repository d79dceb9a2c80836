#include "pdhw/pressure.hpp"

#include <algorithm>
#include <cmath>

#include "pdhw/util.hpp"

namespace pdhw {

const char* to_string(Scope scope) {
  switch (scope) {
    case Scope::Whole: return "whole";
    case Scope::Rise: return "rise";
    case Scope::Main: return "main";
    case Scope::Fall: return "fall";
  }
  return "?";
}

const char* to_string(RhoKind kind) {
  switch (kind) {
    case RhoKind::Vel: return "rho_vel";
    case RhoKind::HorizontalVel: return "rho_hvel";
    case RhoKind::VerticalVel: return "rho_vvel";
    case RhoKind::Acc: return "rho_acc";
    case RhoKind::HorizontalAcc: return "rho_hacc";
    case RhoKind::VerticalAcc: return "rho_vacc";
  }
  return "?";
}

namespace {

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::optional<double> pearson(const double* a, const double* b, size_t n) {
  if (n < 3) return std::nullopt;
  double ma = 0, mb = 0;
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double saa = 0, sbb = 0, sab = 0;
  for (size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

PressureSegmentation segment_pressure(const std::vector<double>& stroke_pressure,
                                      const PressureOptions& options) {
  const size_t n = stroke_pressure.size();
  if (n < 3) raise(Err::SeriesTooShort, "pressure segmentation needs >= 3 samples");

  int span = std::min<int>(options.lowess_span, static_cast<int>(n));
  if (span % 2 == 0) --span;
  const std::vector<double> smoothed =
      span >= 3 ? lowess_smooth(stroke_pressure, span) : stroke_pressure;

  const double m = median_of(smoothed);
  size_t first = 0;
  while (first < n && smoothed[first] < m) ++first;
  size_t last = n - 1;
  while (last > first && smoothed[last] < m) --last;
  // At least one sample is >= the median, so `first` is always valid.

  PressureSegmentation seg;
  seg.rise_begin = 0;
  seg.rise_end = first;
  seg.main_begin = first;
  seg.main_end = last + 1;
  seg.fall_begin = last + 1;
  seg.fall_end = n;
  return seg;
}

int count_pressure_changes(const std::vector<double>& stroke_pressure,
                           const PressureOptions& options) {
  const size_t n = stroke_pressure.size();
  if (n < 3) raise(Err::SeriesTooShort, "NCP needs >= 3 samples");
  int span = std::min<int>(options.lowess_span, static_cast<int>(n));
  if (span % 2 == 0) --span;
  if (span < 3) return count_direction_changes(stroke_pressure);
  return count_direction_changes(lowess_smooth(stroke_pressure, span));
}

std::array<std::array<std::optional<double>, 6>, 4> pressure_correlations(
    const std::vector<double>& stroke_pressure, const DerivedSeries& derived,
    const PressureSegmentation& segmentation) {
  const std::array<const std::vector<double>*, 6> channels = {
      &derived.velocity,     &derived.horizontal_velocity,     &derived.vertical_velocity,
      &derived.acceleration, &derived.horizontal_acceleration, &derived.vertical_acceleration};

  std::array<std::array<std::optional<double>, 6>, 4> out;
  for (size_t scope_idx = 0; scope_idx < 4; ++scope_idx) {
    size_t begin = 0, end = stroke_pressure.size();
    switch (kAllScopes[scope_idx]) {
      case Scope::Whole: break;
      case Scope::Rise: begin = segmentation.rise_begin; end = segmentation.rise_end; break;
      case Scope::Main: begin = segmentation.main_begin; end = segmentation.main_end; break;
      case Scope::Fall: begin = segmentation.fall_begin; end = segmentation.fall_end; break;
    }
    const size_t len = end - begin;
    for (size_t k = 0; k < 6; ++k) {
      out[scope_idx][k] =
          len >= 3 ? pearson(stroke_pressure.data() + begin, channels[k]->data() + begin, len)
                   : std::nullopt;
    }
  }
  return out;
}

EdgeFeatures edge_features(const std::vector<double>& stroke_pressure,
                           const std::vector<double>& timestamps,
                           const PressureSegmentation& segmentation) {
  EdgeFeatures out;
  auto time_span = [&](size_t begin, size_t end) {
    return end > begin ? timestamps[end - 1] - timestamps[begin] : 0.0;
  };
  auto press_range = [&](size_t begin, size_t end) {
    if (end <= begin) return 0.0;
    double lo = stroke_pressure[begin], hi = stroke_pressure[begin];
    for (size_t i = begin; i < end; ++i) {
      lo = std::min(lo, stroke_pressure[i]);
      hi = std::max(hi, stroke_pressure[i]);
    }
    return hi - lo;
  };

  out.r_time_rise = time_span(segmentation.rise_begin, segmentation.rise_end);
  out.r_time_fall = time_span(segmentation.fall_begin, segmentation.fall_end);
  out.r_press_rise = press_range(segmentation.rise_begin, segmentation.rise_end);
  out.r_press_fall = press_range(segmentation.fall_begin, segmentation.fall_end);

  const double peak = *std::max_element(stroke_pressure.begin(), stroke_pressure.end());
  out.overshoot = peak - median_of(stroke_pressure);
  return out;
}

PressureRaw pressure_for_recording(const Recording& recording,
                                   const std::vector<Stroke>& strokes,
                                   const std::vector<DerivedSeries>& derived,
                                   const PressureOptions& options) {
  if (strokes.empty()) raise(Err::NoStrokes, recording.subject_id + " has no usable strokes");

  PressureRaw out;
  for (size_t s = 0; s < strokes.size(); ++s) {
    const auto& stroke = strokes[s];
    out.pressure.insert(out.pressure.end(), stroke.pressure.begin(), stroke.pressure.end());
    const auto rate = differentiate(stroke.pressure, stroke.t);
    out.pressure_rate.insert(out.pressure_rate.end(), rate.begin(), rate.end());

    out.ncp.push_back(count_pressure_changes(stroke.pressure, options));

    const auto seg = segment_pressure(stroke.pressure, options);
    const auto rho = pressure_correlations(stroke.pressure, derived[s], seg);
    for (size_t scope = 0; scope < 4; ++scope) {
      for (size_t kind = 0; kind < 6; ++kind) {
        out.rho[scope][kind].push_back(rho[scope][kind]);
      }
    }

    const auto edges = edge_features(stroke.pressure, stroke.t, seg);
    out.r_time_rise.push_back(edges.r_time_rise);
    out.r_time_fall.push_back(edges.r_time_fall);
    out.r_press_rise.push_back(edges.r_press_rise);
    out.r_press_fall.push_back(edges.r_press_fall);
    out.overshoot.push_back(edges.overshoot);
    out.segmentations.push_back(seg);
  }

  const double span = recording.duration();
  if (span <= 0.0) raise(Err::ZeroDuration, "recording span is zero");
  out.relative_ncp = mean_of(out.ncp) / span;
  return out;
}

}  // namespace pdhw
