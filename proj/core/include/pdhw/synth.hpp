#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pdhw/cohort.hpp"

namespace pdhw {

// Deterministic synthetic cohorts for desk-scale end-to-end verification.
// Recordings are parameterized unit-speed curves (a spiral for task 1, wavy
// glyph proxies otherwise) with a trapezoidal pressure profile: rising edge,
// slowly increasing and increasingly rough main section, falling edge.
//
// Group effects are injected through per-subject latent variables, one per
// feature family, each N(0,1) across healthy subjects; the PD group's latent
// mean is shifted by the requested number of sigmas.

struct TrapezoidSpec {
  double rise_frac = 0.15;
  double fall_frac = 0.15;
  double peak = 600.0;       // device pressure units
  double main_slope = 0.10;  // relative increase over the main section
};

struct SynthSpec {
  int n_per_group = 40;
  uint64_t seed = 1;
  std::vector<int> tasks = {1, 2, 3, 4, 5, 6, 7, 8};
  // family -> effect size in sigma units applied to the PD group's latent.
  // Families: "stroke speed", "ncv", "ncp", "pressure range", "rho vel".
  std::map<std::string, double> effect_map;
  double noise_level = 1.0;
  int strokes_per_task = 6;
  TrapezoidSpec pressure_profile;
  std::optional<double> tremor_hz;  // speed-modulation rate, default 2 Hz
};

struct SynthResult {
  Cohort cohort;
  nlohmann::json ledger;  // injected effects and their feature-base signatures
};

const std::vector<std::string>& synth_families();

// Feature bases whose values a family's latent drives; used by the ledger and
// by ranking-recovery checks.
const std::vector<std::string>& family_bases(const std::string& family);

SynthResult generate(const SynthSpec& spec);

// Writes <root>/manifest.csv plus <root>/<subject>/task<k>.svc, bit-exactly
// reproducible for a fixed spec.
void write_cohort(const std::filesystem::path& root, const Cohort& cohort);
void write_ledger(const std::filesystem::path& path, const nlohmann::json& ledger);

// Closed-form recordings with analytically known feature values, shared by
// tests across modules. Sampling steps are negative powers of two so that
// timestamps and linear trajectories are exact in floating point.
struct AnalyticFixtures {
  Recording line;  // constant-velocity straight line
  double line_speed = 10.0;  // mm/s

  Recording circle;  // uniform circular motion
  double circle_radius = 5.0;   // mm
  double circle_omega = 0.0;    // rad/s, set on construction

  Recording trapezoid;  // constant-speed stroke with trapezoidal pressure
  int trapezoid_up = 10, trapezoid_flat = 2, trapezoid_down = 10;
  double trapezoid_peak = 1000.0;
  double trapezoid_dt = 0.01;

  Recording sine;  // sinusoidally modulated speed along a line
  double sine_v0 = 20.0, sine_amplitude = 10.0, sine_freq_hz = 1.0;
  int sine_periods = 3;
};

AnalyticFixtures analytic_fixtures();

}  // namespace pdhw
