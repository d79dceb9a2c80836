#include "pdhw/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "pdhw/util.hpp"

namespace pdhw {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kScale = 0.01;  // mm per device unit
constexpr double kDt = 0.01;     // 100 Hz generation grid

double quantize(double v) { return std::round(v * 1e6) / 1e6; }

double mm_to_units(double mm) { return mm / kScale; }

struct FamilyInfo {
  std::string name;
  std::vector<std::string> bases;
};

const std::vector<FamilyInfo>& family_table() {
  // The speed latent scales every derivative magnitude, so its signature
  // covers the whole velocity/acceleration/jerk class. Base sets are kept
  // pairwise disjoint so ranking hits attribute to exactly one family.
  static const std::vector<FamilyInfo> table = {
      {"stroke speed",
       {"stroke speed", "speed", "velocity", "horizontal velocity", "vertical velocity",
        "acceleration", "horizontal acceleration", "vertical acceleration", "jerk",
        "horizontal jerk", "vertical jerk"}},
      {"ncv", {"NCV", "relative NCV"}},
      {"ncp", {"NCP", "relative NCP"}},
      {"pressure range", {"R_press^rise", "R_press^fall", "overshoot", "pressure"}},
      {"rho vel", {"rho_vel"}},
  };
  return table;
}

struct SubjectLatents {
  double speed = 0.0;
  double ncv = 0.0;
  double ncp = 0.0;
  double pressure_range = 0.0;
  double rho = 0.0;
};

// Heading angle as a function of arc length; integrating a unit-speed curve
// keeps |velocity| equal to the commanded speed profile.
double heading(int task, double s) {
  if (task == 1) {
    // Spiral-like: curvature decays with arc length.
    return std::sqrt(2.0 * std::max(s, 0.0) / 1.2) + kPi / 2.0;
  }
  return 0.25 + 0.9 * std::sin(s / 1.5);
}

struct StrokePlan {
  double duration;    // s
  double base_speed;  // mm/s
  int dips;           // transient slowdowns (velocity extrema injection)
  double wiggle_cycles;  // pressure oscillation cycles over the main section
  double peak;           // pressure peak, device units
  double coupling;       // pressure <- speed coupling strength
};

void append_stroke(std::vector<Sample>& samples, double& x_mm, double& y_mm, double& t,
                   int task, const StrokePlan& plan, const TrapezoidSpec& trap,
                   double noise_level, Rng& rng) {
  const int n = std::max(8, static_cast<int>(std::lround(plan.duration / kDt)));
  const double rise_end = trap.rise_frac;
  const double fall_start = 1.0 - trap.fall_frac;

  // Dip centres sit inside the middle of the stroke, jittered slightly.
  std::vector<double> dip_centres;
  for (int d = 0; d < plan.dips; ++d) {
    const double u = (d + 1.0) / (plan.dips + 1.0);
    dip_centres.push_back(u + 0.03 * (rng.unit() - 0.5));
  }

  double arc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / (n - 1);
    const double t_rel = u * plan.duration;

    double speed = plan.base_speed * (1.0 + 0.25 * std::sin(2.0 * kPi * 2.0 * t_rel));
    for (double c : dip_centres) {
      const double d = (u - c) * plan.duration / 0.035;
      speed *= 1.0 - 0.45 * std::exp(-d * d);
    }

    // Trapezoidal pressure with a slowly increasing, wiggly main section.
    double envelope;
    if (u < rise_end) envelope = u / rise_end;
    else if (u > fall_start) envelope = (1.0 - u) / trap.fall_frac;
    else envelope = 1.0 + trap.main_slope * (u - rise_end) / (fall_start - rise_end);
    double pressure = plan.peak * envelope;
    if (u >= rise_end && u <= fall_start) {
      const double m = (u - rise_end) / (fall_start - rise_end);
      pressure += plan.peak * 0.07 * std::sin(2.0 * kPi * plan.wiggle_cycles * m);
    }
    pressure += plan.coupling * (speed / plan.base_speed - 1.0) * plan.peak * 0.4;
    pressure += rng.normal() * 3.0 * noise_level;
    pressure = std::max(pressure, 1.0);

    if (i > 0) {
      const double ds = speed * kDt;
      const double phi = heading(task, arc);
      x_mm += std::cos(phi) * ds;
      y_mm += std::sin(phi) * ds;
      arc += ds;
      t += kDt;
    } else if (!samples.empty()) {
      t += kDt;  // stroke follows an in-air gap
    }
    Sample s;
    s.x = quantize(mm_to_units(x_mm + rng.normal() * 0.0005 * noise_level));
    s.y = quantize(mm_to_units(y_mm + rng.normal() * 0.0005 * noise_level));
    s.t = quantize(t);
    s.button = 1;
    s.pressure = quantize(pressure);
    samples.push_back(s);
  }
}

void append_gap(std::vector<Sample>& samples, double& x_mm, double& y_mm, double& t,
                double dx_mm, double dy_mm) {
  const int n = 30;  // 0.3 s in-air transition
  const double x0 = x_mm, y0 = y_mm;
  for (int i = 1; i <= n; ++i) {
    const double u = static_cast<double>(i) / n;
    x_mm = x0 + dx_mm * u;
    y_mm = y0 + dy_mm * u;
    t += kDt;
    Sample s;
    s.x = quantize(mm_to_units(x_mm));
    s.y = quantize(mm_to_units(y_mm));
    s.t = quantize(t);
    s.button = 0;
    s.pressure = 0.0;
    samples.push_back(s);
  }
}

Recording make_task_recording(const std::string& subject_id, int task, const SynthSpec& spec,
                              const SubjectLatents& z, uint64_t task_seed) {
  Rng rng(task_seed);
  Recording rec;
  rec.subject_id = subject_id;
  rec.task_id = task;
  rec.scale_mm_per_unit = kScale;

  const int strokes = task == 1 ? 1 : spec.strokes_per_task;
  // Longer tasks run longer and get rougher pressure (higher wiggle count).
  const double task_len = 1.0 + 0.08 * task;

  StrokePlan plan;
  plan.duration = (task == 1 ? 4.0 : 1.2) * task_len;
  plan.base_speed = 18.0 * (1.0 + 0.10 * z.speed);
  plan.dips = std::max(0, static_cast<int>(std::lround(2.5 + 0.8 * z.ncv)));
  plan.wiggle_cycles = std::max(0.5, 4.0 + 1.0 * z.ncp) * task_len;
  plan.peak = spec.pressure_profile.peak * (1.0 + 0.12 * z.pressure_range);
  plan.coupling = std::clamp(0.45 + 0.15 * z.rho, 0.0, 1.0);

  double x_mm = 10.0, y_mm = 40.0, t = 0.0;
  for (int s = 0; s < strokes; ++s) {
    append_stroke(rec.samples, x_mm, y_mm, t, task, plan, spec.pressure_profile,
                  spec.noise_level, rng);
    if (s + 1 < strokes) append_gap(rec.samples, x_mm, y_mm, t, 4.0, 0.5 * (rng.unit() - 0.5));
  }
  return rec;
}

}  // namespace

const std::vector<std::string>& synth_families() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& f : family_table()) out.push_back(f.name);
    return out;
  }();
  return names;
}

const std::vector<std::string>& family_bases(const std::string& family) {
  for (const auto& f : family_table()) {
    if (f.name == family) return f.bases;
  }
  raise(Err::InvalidSpec, "unknown feature family '" + family + "'");
}

SynthResult generate(const SynthSpec& spec) {
  if (spec.n_per_group < 2) raise(Err::InvalidSpec, "n_per_group must be >= 2");
  if (spec.tasks.empty()) raise(Err::InvalidSpec, "tasks must be non-empty");
  std::set<int> seen_tasks;
  for (int t : spec.tasks) {
    if (t < 1 || t > 8) raise(Err::InvalidSpec, "task ids must lie in 1..8");
    if (!seen_tasks.insert(t).second) raise(Err::InvalidSpec, "duplicate task id");
  }
  if (spec.strokes_per_task < 1) raise(Err::InvalidSpec, "strokes_per_task must be >= 1");
  for (const auto& [family, effect] : spec.effect_map) {
    family_bases(family);  // validates the name
    if (!std::isfinite(effect)) raise(Err::InvalidSpec, "effect size must be finite");
  }

  auto effect_of = [&](const std::string& family) {
    auto it = spec.effect_map.find(family);
    return it == spec.effect_map.end() ? 0.0 : it->second;
  };

  SynthResult out;
  const int total = 2 * spec.n_per_group;
  for (int idx = 0; idx < total; ++idx) {
    const bool is_pd = idx < spec.n_per_group;
    char id_buf[16];
    std::snprintf(id_buf, sizeof(id_buf), "S%03d", idx + 1);
    const std::string id = id_buf;

    const uint64_t subject_seed = derive_seed(spec.seed, static_cast<uint64_t>(idx));
    Rng subject_rng(subject_seed);

    SubjectLatents z;
    z.speed = subject_rng.normal() + (is_pd ? effect_of("stroke speed") : 0.0);
    z.ncv = subject_rng.normal() + (is_pd ? effect_of("ncv") : 0.0);
    z.ncp = subject_rng.normal() + (is_pd ? effect_of("ncp") : 0.0);
    z.pressure_range = subject_rng.normal() + (is_pd ? effect_of("pressure range") : 0.0);
    z.rho = subject_rng.normal() + (is_pd ? effect_of("rho vel") : 0.0);

    SubjectRecord sr;
    sr.id = id;
    sr.sex = subject_rng.unit() < 0.5 ? Sex::M : Sex::F;
    sr.diagnosis = is_pd ? Diagnosis::PD : Diagnosis::Healthy;
    sr.age = std::round(55.0 + 15.0 * subject_rng.unit());
    if (is_pd) {
      sr.led = std::round(400.0 + 1800.0 * subject_rng.unit());
      sr.updrs_v = std::round((1.0 + 3.0 * subject_rng.unit()) * 2.0) / 2.0;
      sr.years_since_diag = std::round(1.0 + 14.0 * subject_rng.unit());
    }
    out.cohort.subjects.push_back(sr);

    for (int task : spec.tasks) {
      const uint64_t task_seed = derive_seed(subject_seed, static_cast<uint64_t>(task));
      out.cohort.recordings.emplace(std::make_pair(id, task),
                                    make_task_recording(id, task, spec, z, task_seed));
    }
  }

  nlohmann::json families = nlohmann::json::array();
  for (const auto& f : family_table()) {
    families.push_back({{"name", f.name},
                        {"effect_sigma", effect_of(f.name)},
                        {"bases", f.bases}});
  }
  out.ledger = {{"format", "pdhw-synth-ledger-1"},
                {"seed", spec.seed},
                {"n_per_group", spec.n_per_group},
                {"tasks", spec.tasks},
                {"strokes_per_task", spec.strokes_per_task},
                {"noise_level", spec.noise_level},
                {"families", std::move(families)}};
  return out;
}

void write_cohort(const std::filesystem::path& root, const Cohort& cohort) {
  std::filesystem::create_directories(root);
  write_manifest(root / "manifest.csv", cohort.subjects);
  for (const auto& [key, recording] : cohort.recordings) {
    const auto dir = root / key.first;
    std::filesystem::create_directories(dir);
    write_recording(dir / ("task" + std::to_string(key.second) + ".svc"), recording);
  }
}

void write_ledger(const std::filesystem::path& path, const nlohmann::json& ledger) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Err::IoFailure, "cannot write ledger " + path.string());
  out << ledger.dump(2) << "\n";
}

AnalyticFixtures analytic_fixtures() {
  AnalyticFixtures fx;

  // Constant velocity along x. dt = 1/4 s and 2.5 mm steps are exact in
  // floating point, so every derived series is exactly constant.
  {
    Recording& r = fx.line;
    r.subject_id = "line";
    r.task_id = 2;
    r.scale_mm_per_unit = kScale;
    r.nominal_rate_hz = 4.0;
    const int n = 41;
    for (int i = 0; i < n; ++i) {
      Sample s;
      s.t = 0.25 * i;
      s.x = mm_to_units(fx.line_speed * 0.25 * i);  // 250 units per step
      s.y = mm_to_units(30.0);
      s.button = 1;
      s.pressure = 500.0;
      r.samples.push_back(s);
    }
  }

  // Uniform circular motion, three revolutions at 128 Hz.
  {
    fx.circle_omega = 2.0 * kPi;
    Recording& r = fx.circle;
    r.subject_id = "circle";
    r.task_id = 1;
    r.scale_mm_per_unit = kScale;
    r.nominal_rate_hz = 128.0;
    const double dt = 1.0 / 128.0;
    const int n = 3 * 128 + 1;
    for (int i = 0; i < n; ++i) {
      const double t = dt * i;
      Sample s;
      s.t = t;
      s.x = mm_to_units(fx.circle_radius * std::cos(fx.circle_omega * t) + 20.0);
      s.y = mm_to_units(fx.circle_radius * std::sin(fx.circle_omega * t) + 20.0);
      s.button = 1;
      s.pressure = 500.0;
      r.samples.push_back(s);
    }
  }

  // Constant-speed stroke with a trapezoidal pressure profile whose flat top
  // is short, so the pressure median falls mid-ramp.
  {
    Recording& r = fx.trapezoid;
    r.subject_id = "trapezoid";
    r.task_id = 2;
    r.scale_mm_per_unit = kScale;
    const int up = fx.trapezoid_up, flat = fx.trapezoid_flat, down = fx.trapezoid_down;
    const int n = up + flat + down;
    for (int i = 0; i < n; ++i) {
      double p;
      if (i < up) p = fx.trapezoid_peak * i / (up - 1);
      else if (i < up + flat) p = fx.trapezoid_peak;
      else p = fx.trapezoid_peak * (n - 1 - i) / (down - 1);
      Sample s;
      s.t = fx.trapezoid_dt * i;
      s.x = mm_to_units(5.0 + 2.0 * i * fx.trapezoid_dt);
      s.y = mm_to_units(10.0);
      s.button = 1;
      s.pressure = p;
      r.samples.push_back(s);
    }
  }

  // Speed v0 + A sin(2 pi f t) along x for exactly three periods at 128 Hz:
  // the speed magnitude has two interior extrema per period.
  {
    Recording& r = fx.sine;
    r.subject_id = "sine";
    r.task_id = 2;
    r.scale_mm_per_unit = kScale;
    r.nominal_rate_hz = 128.0;
    const double dt = 1.0 / 128.0;
    const double w = 2.0 * kPi * fx.sine_freq_hz;
    const int n = fx.sine_periods * 128 + 1;
    for (int i = 0; i < n; ++i) {
      const double t = dt * i;
      Sample s;
      s.t = t;
      s.x = mm_to_units(fx.sine_v0 * t - fx.sine_amplitude / w * std::cos(w * t) + 15.0);
      s.y = mm_to_units(25.0);
      s.button = 1;
      s.pressure = 500.0;
      r.samples.push_back(s);
    }
  }
  return fx;
}

}  // namespace pdhw
