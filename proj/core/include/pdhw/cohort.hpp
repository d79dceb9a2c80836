#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pdhw/error.hpp"

namespace pdhw {

// One digitizer sample. x/y are stored in raw device units (the recording
// carries the unit->mm scale); t is seconds; button is 0 (in-air) or 1
// (on-surface); pressure is in device pressure units, >= 0.
struct Sample {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
  int button = 0;
  double pressure = 0.0;
};

// One task recording for one subject.
struct Recording {
  std::string subject_id;
  int task_id = 0;
  std::vector<Sample> samples;
  double nominal_rate_hz = 100.0;
  double scale_mm_per_unit = 0.01;
  // Samples reporting pressure > 0 while in-air. Flagged, never rejected:
  // real digitizers report residual pressure around pen lifts.
  int residual_pressure_count = 0;

  double duration() const {
    return samples.empty() ? 0.0 : samples.back().t - samples.front().t;
  }
  size_t on_surface_count() const {
    size_t n = 0;
    for (const auto& s : samples) n += (s.button == 1);
    return n;
  }
};

enum class Sex { M, F };
enum class Diagnosis { PD, Healthy };

inline const char* to_string(Diagnosis d) { return d == Diagnosis::PD ? "PD" : "healthy"; }
inline const char* to_string(Sex s) { return s == Sex::M ? "M" : "F"; }

// One manifest row. Clinical fields are absent for healthy controls.
struct SubjectRecord {
  std::string id;
  Sex sex = Sex::M;
  Diagnosis diagnosis = Diagnosis::Healthy;
  double age = 0.0;
  std::optional<double> led;               // levodopa equivalent dose, mg/day
  std::optional<double> updrs_v;           // modified Hoehn-Yahr staging
  std::optional<double> years_since_diag;
};

struct Cohort {
  std::vector<SubjectRecord> subjects;
  std::map<std::pair<std::string, int>, Recording> recordings;

  const SubjectRecord* find_subject(const std::string& id) const {
    for (const auto& s : subjects)
      if (s.id == id) return &s;
    return nullptr;
  }
  const Recording* find_recording(const std::string& id, int task) const {
    auto it = recordings.find({id, task});
    return it == recordings.end() ? nullptr : &it->second;
  }
};

struct ParseOptions {
  double scale_mm_per_unit = 0.01;  // Intuos-class device: 100 units per mm
  double nominal_rate_hz = 100.0;
};

// Recording files: UTF-8 text, LF endings. First line is the sample count N,
// then N lines "x y t b p" separated by single spaces. Timestamps may be
// seconds or integer milliseconds; integer-valued columns whose median step
// exceeds half a second are taken as milliseconds and normalized to seconds.
Recording parse_recording(const std::filesystem::path& path, const std::string& subject_id,
                          int task_id, const ParseOptions& options = {});
void write_recording(const std::filesystem::path& path, const Recording& recording);

// Manifest: CSV with header "id,sex,diagnosis,age,led,updrs_v,years_since_diag",
// "-" marks an absent clinical field, diagnosis is "PD" or "healthy".
std::vector<SubjectRecord> parse_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<SubjectRecord>& subjects);

struct LoadDiagnostics {
  int files_parsed = 0;
  int residual_pressure_samples = 0;
  std::vector<std::string> missing_tasks;  // "subject/taskK" entries absent on disk
};

// Directory layout: <root>/<subject_id>/task<k>.svc plus <root>/manifest.csv.
// Only tasks listed for manifest subjects are read; a missing file is not an
// error (subjects may lack tasks), a malformed one is.
Cohort load_cohort(const std::filesystem::path& root, const ParseOptions& options = {},
                   LoadDiagnostics* diagnostics = nullptr);

struct FieldStats {
  int n = 0;
  double mean = 0.0;
  std::optional<double> stdev;  // absent when n < 2
};

struct GroupSummary {
  int count = 0;
  int males = 0;
  int females = 0;
  FieldStats age;
  FieldStats updrs_v;
  FieldStats years_since_diag;
  FieldStats led;
};

struct CohortSummary {
  GroupSummary pd;
  GroupSummary healthy;
};

// Group statistics over the manifest; std is the sample standard deviation
// (n-1 denominator). Throws EmptyGroup if either group has no subjects.
CohortSummary cohort_summary(const Cohort& cohort);

}  // namespace pdhw
