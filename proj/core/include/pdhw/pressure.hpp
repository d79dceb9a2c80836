#pragma once

#include <array>
#include <optional>
#include <vector>

#include "pdhw/kinematics.hpp"
#include "pdhw/signal.hpp"

namespace pdhw {

// Index partition of one stroke's pressure profile. The boundary between the
// edges and the main movement is the median of the smoothed pressure: rise is
// everything before the first sample at or above the median, fall everything
// after the last such sample.
struct PressureSegmentation {
  size_t rise_begin = 0, rise_end = 0;  // [rise_begin, rise_end)
  size_t main_begin = 0, main_end = 0;  // [main_begin, main_end)
  size_t fall_begin = 0, fall_end = 0;  // [fall_begin, fall_end)

  size_t rise_size() const { return rise_end - rise_begin; }
  size_t main_size() const { return main_end - main_begin; }
  size_t fall_size() const { return fall_end - fall_begin; }
};

enum class Scope { Whole, Rise, Main, Fall };
inline constexpr std::array<Scope, 4> kAllScopes = {Scope::Whole, Scope::Rise, Scope::Main,
                                                    Scope::Fall};
const char* to_string(Scope scope);

// The six pressure-kinematics correlation channels, in canonical order.
enum class RhoKind { Vel, HorizontalVel, VerticalVel, Acc, HorizontalAcc, VerticalAcc };
inline constexpr std::array<RhoKind, 6> kAllRhoKinds = {
    RhoKind::Vel, RhoKind::HorizontalVel, RhoKind::VerticalVel,
    RhoKind::Acc, RhoKind::HorizontalAcc, RhoKind::VerticalAcc};
const char* to_string(RhoKind kind);

struct PressureOptions {
  int lowess_span = 5;  // smoothing for NCP counting and segmentation boundaries
};

// Edge-range scalars for one stroke. Units: seconds for the time ranges, raw
// device pressure units for the pressure ranges and the overshoot.
struct EdgeFeatures {
  double r_time_rise = 0.0;
  double r_time_fall = 0.0;
  double r_press_rise = 0.0;
  double r_press_fall = 0.0;
  double overshoot = 0.0;
};

// All raw pressure quantities for one recording.
struct PressureRaw {
  std::vector<double> pressure;       // per-sample, concatenated across strokes
  std::vector<double> pressure_rate;  // units/s, same alignment
  std::vector<double> ncp;            // smoothed-pressure extrema count per stroke
  double relative_ncp = 0.0;          // mean NCP / writing duration
  // rho[scope][kind][stroke]; absent when a scope is degenerate.
  std::array<std::array<std::vector<std::optional<double>>, 6>, 4> rho;
  std::vector<double> r_time_rise, r_time_fall;
  std::vector<double> r_press_rise, r_press_fall;
  std::vector<double> overshoot;
  std::vector<PressureSegmentation> segmentations;  // one per stroke
};

// Median split of the smoothed pressure profile. Requires >= 3 samples.
PressureSegmentation segment_pressure(const std::vector<double>& stroke_pressure,
                                      const PressureOptions& options = {});

// Local-extrema count (same plateau rule as NCV) of the smoothed pressure.
int count_pressure_changes(const std::vector<double>& stroke_pressure,
                           const PressureOptions& options = {});

// Pearson correlation of raw pressure against each of the six kinematic
// channels, per scope. A scope with fewer than 3 samples or zero variance in
// either channel yields an absent value.
std::array<std::array<std::optional<double>, 6>, 4> pressure_correlations(
    const std::vector<double>& stroke_pressure, const DerivedSeries& derived,
    const PressureSegmentation& segmentation);

// Edge durations, raw-pressure ranges per edge, and overshoot
// (max - median of raw pressure over the whole stroke). Empty edges give 0.
EdgeFeatures edge_features(const std::vector<double>& stroke_pressure,
                           const std::vector<double>& timestamps,
                           const PressureSegmentation& segmentation);

PressureRaw pressure_for_recording(const Recording& recording,
                                   const std::vector<Stroke>& strokes,
                                   const std::vector<DerivedSeries>& derived,
                                   const PressureOptions& options = {});

}  // namespace pdhw
