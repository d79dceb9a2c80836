#include "pdhw/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "pdhw/util.hpp"

namespace pdhw {

const char* to_string(Functional f) {
  switch (f) {
    case Functional::Mean: return "mean";
    case Functional::Median: return "median";
    case Functional::Std: return "std";
    case Functional::P1: return "p1";
    case Functional::P99: return "p99";
    case Functional::P99MinusP1: return "p99_minus_p1";
    case Functional::None: return "none";
  }
  return "?";
}

namespace {

constexpr std::array<Functional, 7> kAllFunctionals = {
    Functional::Mean, Functional::Median, Functional::Std,       Functional::P1,
    Functional::P99,  Functional::P99MinusP1, Functional::None};

std::optional<Scope> scope_from_string(std::string_view text) {
  for (Scope s : kAllScopes) {
    if (text == to_string(s)) return s;
  }
  return std::nullopt;
}

std::optional<Functional> functional_from_string(std::string_view text) {
  for (Functional f : kAllFunctionals) {
    if (text == to_string(f)) return f;
  }
  return std::nullopt;
}

// Per-sample series bases, kinematic then pressure.
constexpr std::array<const char*, 9> kKinematicSeries = {
    "velocity",     "horizontal velocity",     "vertical velocity",
    "acceleration", "horizontal acceleration", "vertical acceleration",
    "jerk",         "horizontal jerk",         "vertical jerk"};
constexpr std::array<const char*, 2> kPressureSeries = {"pressure", "pressure rate"};

// Per-stroke scalar lists (whole scope only).
constexpr std::array<const char*, 3> kKinematicPerStroke = {"stroke speed", "NCV", "NCA"};
constexpr std::array<const char*, 6> kPressurePerStroke = {
    "NCP", "R_time^rise", "R_time^fall", "R_press^rise", "R_press^fall", "overshoot"};

constexpr std::array<const char*, 5> kKinematicScalars = {
    "speed", "relative NCV", "relative NCA", "on-surface time", "normalized on-surface time"};
constexpr std::array<const char*, 1> kPressureScalars = {"relative NCP"};

const std::set<std::string>& kinematic_base_set() {
  static const std::set<std::string> bases = [] {
    std::set<std::string> s;
    for (auto* b : kKinematicSeries) s.insert(b);
    for (auto* b : kKinematicPerStroke) s.insert(b);
    for (auto* b : kKinematicScalars) s.insert(b);
    return s;
  }();
  return bases;
}

}  // namespace

std::string FeatureName::str() const {
  return base + "|" + to_string(segment) + "|" + to_string(functional) + "|task" +
         std::to_string(task_id);
}

FeatureName FeatureName::parse(std::string_view text) {
  auto parts = split(text, '|');
  if (parts.size() != 4) raise(Err::MalformedRow, "bad feature name '" + std::string(text) + "'");
  FeatureName name;
  name.base = std::string(parts[0]);
  auto scope = scope_from_string(parts[1]);
  auto functional = functional_from_string(parts[2]);
  if (!scope || !functional || !parts[3].starts_with("task")) {
    raise(Err::MalformedRow, "bad feature name '" + std::string(text) + "'");
  }
  name.segment = *scope;
  name.functional = *functional;
  auto task = parse_double(parts[3].substr(4));
  if (!task || *task != std::floor(*task)) {
    raise(Err::MalformedRow, "bad task in feature name '" + std::string(text) + "'");
  }
  name.task_id = static_cast<int>(*task);
  return name;
}

FeatureClass classify_feature(const FeatureName& name) {
  if (name.segment != Scope::Whole) return FeatureClass::Pressure;
  return kinematic_base_set().count(name.base) ? FeatureClass::Kinematic : FeatureClass::Pressure;
}

std::vector<FeatureName> feature_catalogue(int task_id) {
  std::vector<FeatureName> out;
  constexpr std::array<Functional, 6> funcs = {Functional::Mean, Functional::Median,
                                               Functional::Std,  Functional::P1,
                                               Functional::P99,  Functional::P99MinusP1};

  auto add = [&](const std::string& base, Scope scope, Functional f) {
    out.push_back(FeatureName{base, scope, f, task_id});
  };

  for (Scope scope : kAllScopes) {
    for (auto* base : kKinematicSeries)
      for (Functional f : funcs) add(base, scope, f);
    for (auto* base : kPressureSeries)
      for (Functional f : funcs) add(base, scope, f);
    for (RhoKind kind : kAllRhoKinds)
      for (Functional f : funcs) add(to_string(kind), scope, f);
  }
  for (auto* base : kKinematicPerStroke)
    for (Functional f : funcs) add(base, Scope::Whole, f);
  for (auto* base : kPressurePerStroke)
    for (Functional f : funcs) add(base, Scope::Whole, f);
  for (auto* base : kKinematicScalars) add(base, Scope::Whole, Functional::None);
  for (auto* base : kPressureScalars) add(base, Scope::Whole, Functional::None);

  std::sort(out.begin(), out.end());
  return out;
}

size_t catalogue_size() {
  static const size_t n = feature_catalogue(1).size();
  return n;
}

double percentile(std::span<const double> sorted_values, double q) {
  const size_t n = sorted_values.size();
  if (n == 0) raise(Err::EmptyInput, "percentile of empty list");
  if (n == 1) return sorted_values[0];
  const double h = (static_cast<double>(n) - 1.0) * q / 100.0;
  const size_t lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, n - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]);
}

std::array<double, 6> apply_functionals(std::span<const double> values) {
  if (values.empty()) raise(Err::EmptyInput, "functionals of empty list");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();

  const double mean = mean_of(values);
  const double median =
      n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  const double stdev = sample_std(values);
  const double p1 = percentile(sorted, 1.0);
  const double p99 = percentile(sorted, 99.0);
  return {mean, median, stdev, p1, p99, p99 - p1};
}

namespace {

constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

struct ValueLists {
  // (base, scope) -> raw values feeding the six functionals
  std::map<std::pair<std::string, Scope>, std::vector<double>> lists;
  std::map<std::string, double> scalars;
};

void append_slice(std::vector<double>& dst, const std::vector<double>& src, size_t begin,
                  size_t end) {
  dst.insert(dst.end(), src.begin() + begin, src.begin() + end);
}

std::pair<size_t, size_t> scope_range(const PressureSegmentation& seg, Scope scope, size_t n) {
  switch (scope) {
    case Scope::Whole: return {0, n};
    case Scope::Rise: return {seg.rise_begin, seg.rise_end};
    case Scope::Main: return {seg.main_begin, seg.main_end};
    case Scope::Fall: return {seg.fall_begin, seg.fall_end};
  }
  return {0, 0};
}

ValueLists collect_values(const Recording& recording, const std::vector<Stroke>& strokes,
                          const std::vector<DerivedSeries>& derived, const KinematicRaw& kin,
                          const PressureRaw& press, const FeatureConfig& config) {
  ValueLists v;

  for (size_t s = 0; s < strokes.size(); ++s) {
    const auto& stroke = strokes[s];
    const auto& d = derived[s];
    const auto& seg = press.segmentations[s];
    const std::array<std::pair<const char*, const std::vector<double>*>, 9> kin_channels = {{
        {"velocity", &d.velocity},
        {"horizontal velocity", &d.horizontal_velocity},
        {"vertical velocity", &d.vertical_velocity},
        {"acceleration", &d.acceleration},
        {"horizontal acceleration", &d.horizontal_acceleration},
        {"vertical acceleration", &d.vertical_acceleration},
        {"jerk", &d.jerk},
        {"horizontal jerk", &d.horizontal_jerk},
        {"vertical jerk", &d.vertical_jerk},
    }};
    const auto rate = differentiate(stroke.pressure, stroke.t);

    for (Scope scope : kAllScopes) {
      const auto [begin, end] = scope_range(seg, scope, stroke.size());
      for (const auto& [base, series] : kin_channels) {
        append_slice(v.lists[{base, scope}], *series, begin, end);
      }
      append_slice(v.lists[{"pressure", scope}], stroke.pressure, begin, end);
      append_slice(v.lists[{"pressure rate", scope}], rate, begin, end);
    }
  }

  v.lists[{"stroke speed", Scope::Whole}] = kin.stroke_speeds;
  v.lists[{"NCV", Scope::Whole}] = kin.ncv;
  v.lists[{"NCA", Scope::Whole}] = kin.nca;
  v.lists[{"NCP", Scope::Whole}] = press.ncp;
  v.lists[{"R_time^rise", Scope::Whole}] = press.r_time_rise;
  v.lists[{"R_time^fall", Scope::Whole}] = press.r_time_fall;
  v.lists[{"R_press^rise", Scope::Whole}] = press.r_press_rise;
  v.lists[{"R_press^fall", Scope::Whole}] = press.r_press_fall;
  v.lists[{"overshoot", Scope::Whole}] = press.overshoot;

  for (size_t scope_idx = 0; scope_idx < 4; ++scope_idx) {
    for (size_t kind_idx = 0; kind_idx < 6; ++kind_idx) {
      auto& dst = v.lists[{to_string(kAllRhoKinds[kind_idx]), kAllScopes[scope_idx]}];
      for (const auto& value : press.rho[scope_idx][kind_idx]) {
        if (value) dst.push_back(*value);
      }
    }
  }

  const double span = recording.duration();
  v.scalars["speed"] = kin.speed;
  if (config.ncv_relative_uses_total) {
    double ncv_total = 0, nca_total = 0;
    for (double x : kin.ncv) ncv_total += x;
    for (double x : kin.nca) nca_total += x;
    v.scalars["relative NCV"] = ncv_total / span;
    v.scalars["relative NCA"] = nca_total / span;
  } else {
    v.scalars["relative NCV"] = kin.relative_ncv;
    v.scalars["relative NCA"] = kin.relative_nca;
  }
  v.scalars["on-surface time"] = kin.on_surface_time;
  v.scalars["normalized on-surface time"] = kin.normalized_on_surface_time;
  if (config.relative_ncp_by_path) {
    double path = 0;
    for (const auto& s : strokes) path += s.path_length;
    v.scalars["relative NCP"] = path > 0 ? mean_of(press.ncp) / path : kAbsent;
  } else {
    v.scalars["relative NCP"] = press.relative_ncp;
  }
  return v;
}

}  // namespace

std::vector<double> extract_recording_features(const Recording& recording,
                                               const FeatureConfig& config,
                                               StrokeDiagnostics* diagnostics) {
  const auto strokes = segment_strokes(recording, config.stroke, diagnostics);
  if (strokes.empty()) {
    raise(Err::NoStrokes, recording.subject_id + "/task" + std::to_string(recording.task_id) +
                              " has no usable strokes");
  }
  std::vector<DerivedSeries> derived;
  derived.reserve(strokes.size());
  for (const auto& s : strokes) derived.push_back(derive_kinematics(s, config.kinematics));

  const auto kin = kinematics_for_recording(recording, strokes, derived);
  auto press = pressure_for_recording(recording, strokes, derived, config.pressure);

  if (config.rho_concatenated) {
    // Correlations over the concatenated task signal instead of per stroke:
    // one value per (scope, kind), recomputed over glued slices.
    for (size_t scope_idx = 0; scope_idx < 4; ++scope_idx) {
      std::array<std::vector<double>, 6> chan;
      std::vector<double> pres;
      for (size_t s = 0; s < strokes.size(); ++s) {
        const auto& seg = press.segmentations[s];
        const auto [begin, end] = scope_range(seg, kAllScopes[scope_idx], strokes[s].size());
        pres.insert(pres.end(), strokes[s].pressure.begin() + begin,
                    strokes[s].pressure.begin() + end);
        const auto& d = derived[s];
        const std::array<const std::vector<double>*, 6> src = {
            &d.velocity,     &d.horizontal_velocity,     &d.vertical_velocity,
            &d.acceleration, &d.horizontal_acceleration, &d.vertical_acceleration};
        for (size_t k = 0; k < 6; ++k)
          chan[k].insert(chan[k].end(), src[k]->begin() + begin, src[k]->begin() + end);
      }
      PressureSegmentation whole;
      whole.main_begin = 0;
      whole.main_end = pres.size();
      whole.fall_begin = whole.fall_end = pres.size();
      DerivedSeries glued;
      glued.velocity = chan[0];
      glued.horizontal_velocity = chan[1];
      glued.vertical_velocity = chan[2];
      glued.acceleration = chan[3];
      glued.horizontal_acceleration = chan[4];
      glued.vertical_acceleration = chan[5];
      const auto rho = pres.size() >= 3
                           ? pressure_correlations(pres, glued, whole)
                           : std::array<std::array<std::optional<double>, 6>, 4>{};
      for (size_t k = 0; k < 6; ++k) {
        press.rho[scope_idx][k].assign(1, rho[0][k]);  // whole-slice correlation
      }
    }
  }

  const auto values = collect_values(recording, strokes, derived, kin, press, config);

  const auto catalogue = feature_catalogue(recording.task_id);
  std::vector<double> out(catalogue.size(), kAbsent);
  std::map<std::pair<std::string, Scope>, std::array<double, 6>> cache;
  for (size_t c = 0; c < catalogue.size(); ++c) {
    const auto& name = catalogue[c];
    if (name.functional == Functional::None) {
      out[c] = values.scalars.at(name.base);
      continue;
    }
    const auto key = std::make_pair(name.base, name.segment);
    auto it = values.lists.find(key);
    if (it == values.lists.end() || it->second.empty()) continue;  // absent
    auto cached = cache.find(key);
    if (cached == cache.end()) {
      cached = cache.emplace(key, apply_functionals(it->second)).first;
    }
    out[c] = cached->second[static_cast<size_t>(name.functional)];
  }
  return out;
}

FeatureMatrix build_task_matrix(const Cohort& cohort, int task_id, const FeatureConfig& config,
                                StrokeDiagnostics* diagnostics, unsigned threads) {
  std::vector<const Recording*> recordings;
  FeatureMatrix m;
  for (const auto& subject : cohort.subjects) {
    if (const auto* rec = cohort.find_recording(subject.id, task_id)) {
      m.subject_ids.push_back(subject.id);
      m.labels.push_back(subject.diagnosis);
      recordings.push_back(rec);
    }
  }
  if (m.subject_ids.size() < 2) {
    raise(Err::TaskUnavailable,
          "task " + std::to_string(task_id) + " has fewer than 2 subjects");
  }

  m.columns = feature_catalogue(task_id);
  m.values.assign(m.rows() * m.cols(), kAbsent);

  std::vector<StrokeDiagnostics> diag(recordings.size());
  parallel_for(recordings.size(), threads, [&](size_t r) {
    const auto row = extract_recording_features(*recordings[r], config, &diag[r]);
    std::copy(row.begin(), row.end(), m.values.begin() + r * m.cols());
  });
  if (diagnostics) {
    for (const auto& d : diag) diagnostics->discarded_short_runs += d.discarded_short_runs;
  }
  return m;
}

FeatureMatrix merge_tasks(const std::vector<FeatureMatrix>& matrices) {
  if (matrices.empty()) raise(Err::NoCommonSubjects, "no matrices to merge");

  FeatureMatrix merged;
  std::map<std::string, size_t> row_of;
  for (const auto& m : matrices) {
    for (size_t r = 0; r < m.rows(); ++r) {
      if (row_of.emplace(m.subject_ids[r], merged.subject_ids.size()).second) {
        merged.subject_ids.push_back(m.subject_ids[r]);
        merged.labels.push_back(m.labels[r]);
      }
    }
  }
  if (merged.subject_ids.empty()) raise(Err::NoCommonSubjects, "merged subject set is empty");

  size_t total_cols = 0;
  for (const auto& m : matrices) total_cols += m.cols();
  merged.columns.reserve(total_cols);
  merged.values.assign(merged.subject_ids.size() * total_cols, kAbsent);

  size_t col_offset = 0;
  for (const auto& m : matrices) {
    merged.columns.insert(merged.columns.end(), m.columns.begin(), m.columns.end());
    for (size_t r = 0; r < m.rows(); ++r) {
      const size_t dst = row_of.at(m.subject_ids[r]);
      for (size_t c = 0; c < m.cols(); ++c) {
        merged.values[dst * total_cols + col_offset + c] = m.at(r, c);
      }
    }
    col_offset += m.cols();
  }
  return merged;
}

FeatureMatrix filter_columns(const FeatureMatrix& m, FeatureSet set) {
  if (set == FeatureSet::Both) return m;
  const FeatureClass wanted =
      set == FeatureSet::Kinematic ? FeatureClass::Kinematic : FeatureClass::Pressure;
  std::vector<size_t> keep;
  for (size_t c = 0; c < m.cols(); ++c) {
    if (classify_feature(m.columns[c]) == wanted) keep.push_back(c);
  }
  FeatureMatrix out;
  out.subject_ids = m.subject_ids;
  out.labels = m.labels;
  for (size_t c : keep) out.columns.push_back(m.columns[c]);
  out.values.resize(m.rows() * keep.size());
  for (size_t r = 0; r < m.rows(); ++r) {
    for (size_t k = 0; k < keep.size(); ++k) out.at(r, k) = m.at(r, keep[k]);
  }
  return out;
}

uint64_t Normalizer::digest() const {
  uint64_t h = fnv1a(std::span<const double>(mean));
  h = fnv1a(std::span<const double>(stdev), h);
  h = fnv1a(std::span<const double>(impute_median), h);
  h = fnv1a(kept.data(), kept.size() * sizeof(size_t), h);
  return h;
}

Normalizer fit_normalizer(const FeatureMatrix& m, std::span<const size_t> fit_rows) {
  if (fit_rows.size() < 2) raise(Err::DegenerateFitSet, "normalizer needs >= 2 fit rows");

  Normalizer out;
  for (size_t c = 0; c < m.cols(); ++c) {
    std::vector<double> present;
    present.reserve(fit_rows.size());
    for (size_t r : fit_rows) {
      const double v = m.at(r, c);
      if (!std::isnan(v)) present.push_back(v);
    }
    if (present.empty()) {
      out.dropped.push_back({m.columns[c], "all absent"});
      continue;
    }
    std::vector<double> sorted = present;
    std::sort(sorted.begin(), sorted.end());
    const size_t n = sorted.size();
    const double imputed =
        n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    std::vector<double> filled;
    filled.reserve(fit_rows.size());
    for (size_t r : fit_rows) {
      const double v = m.at(r, c);
      filled.push_back(std::isnan(v) ? imputed : v);
    }
    const double mu = mean_of(filled);
    const double sigma = sample_std(filled);
    if (sigma < 1e-12) {
      out.dropped.push_back({m.columns[c], "zero variance"});
      continue;
    }
    out.kept.push_back(c);
    out.mean.push_back(mu);
    out.stdev.push_back(sigma);
    out.impute_median.push_back(imputed);
  }
  if (out.kept.empty()) raise(Err::DegenerateFitSet, "every column dropped by normalizer");
  return out;
}

FeatureMatrix apply_normalizer(const Normalizer& n, const FeatureMatrix& m) {
  FeatureMatrix out;
  out.subject_ids = m.subject_ids;
  out.labels = m.labels;
  out.columns.reserve(n.kept.size());
  for (size_t c : n.kept) out.columns.push_back(m.columns[c]);
  out.values.resize(m.rows() * n.kept.size());
  for (size_t r = 0; r < m.rows(); ++r) {
    for (size_t k = 0; k < n.kept.size(); ++k) {
      double v = m.at(r, n.kept[k]);
      if (std::isnan(v)) v = n.impute_median[k];
      out.at(r, k) = (v - n.mean[k]) / n.stdev[k];
    }
  }
  return out;
}

void write_matrix_csv(const std::filesystem::path& path, const FeatureMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Err::IoFailure, "cannot write matrix " + path.string());
  out << "subject_id,diagnosis";
  for (const auto& c : m.columns) out << ',' << c.str();
  out << "\n";
  for (size_t r = 0; r < m.rows(); ++r) {
    out << m.subject_ids[r] << ',' << to_string(m.labels[r]);
    for (size_t c = 0; c < m.cols(); ++c) {
      const double v = m.at(r, c);
      out << ',';
      if (!std::isnan(v)) out << format_double(v);
    }
    out << "\n";
  }
}

FeatureMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Err::IoFailure, "cannot open matrix " + path.string());

  std::string line;
  if (!std::getline(in, line)) raise(Err::MalformedRow, "empty matrix file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split(line, ',');
  if (header.size() < 2 || header[0] != "subject_id" || header[1] != "diagnosis") {
    raise(Err::MalformedRow, "bad matrix header in " + path.string());
  }

  FeatureMatrix m;
  for (size_t c = 2; c < header.size(); ++c) m.columns.push_back(FeatureName::parse(header[c]));

  int row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != header.size()) {
      raise(Err::MalformedRow, path.string() + " row " + std::to_string(row_no));
    }
    m.subject_ids.emplace_back(fields[0]);
    if (fields[1] == "PD") m.labels.push_back(Diagnosis::PD);
    else if (fields[1] == "healthy") m.labels.push_back(Diagnosis::Healthy);
    else raise(Err::MalformedRow, path.string() + " row " + std::to_string(row_no) + " diagnosis");
    for (size_t c = 2; c < fields.size(); ++c) {
      if (fields[c].empty()) {
        m.values.push_back(kAbsent);
      } else {
        auto v = parse_double(fields[c]);
        if (!v) raise(Err::MalformedRow, path.string() + " row " + std::to_string(row_no));
        m.values.push_back(*v);
      }
    }
  }
  return m;
}

}  // namespace pdhw
