#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pdhw/pressure.hpp"

namespace pdhw {

// The six statistical functionals, plus None for inherently scalar features
// (global speed, relative NCV/NCA/NCP, on-surface times).
enum class Functional { Mean, Median, Std, P1, P99, P99MinusP1, None };
const char* to_string(Functional f);

// Canonical feature identity. The string form is "base|segment|functional|taskK"
// and is what matrix CSV headers carry. Ordering is lexicographic on the
// member tuple, which fixes the column order of every matrix.
struct FeatureName {
  std::string base;
  Scope segment = Scope::Whole;
  Functional functional = Functional::None;
  int task_id = 0;

  std::string str() const;
  static FeatureName parse(std::string_view text);

  friend auto operator<=>(const FeatureName&, const FeatureName&) = default;
};

enum class FeatureClass { Kinematic, Pressure };
enum class FeatureSet { Kinematic, Pressure, Both };

// Segment-scoped variants are classified as pressure features: the rise/main/
// fall boundaries come from the pressure profile, so only whole-scope
// quantities qualify as purely kinematic.
FeatureClass classify_feature(const FeatureName& name);

inline constexpr const char* kCatalogueVersion = "pdhw-catalogue-1";

// The full per-task column catalogue, sorted; a pure function of the task id.
std::vector<FeatureName> feature_catalogue(int task_id);
size_t catalogue_size();

struct FeatureConfig {
  StrokeOptions stroke;
  KinematicOptions kinematics;
  PressureOptions pressure;
  // Open alternatives kept behind flags; defaults follow the primary text.
  bool ncv_relative_uses_total = false;   // relative NCV/NCA from total instead of mean
  bool relative_ncp_by_path = false;      // normalize mean NCP by path length, not duration
  bool rho_concatenated = false;          // correlations over concatenated task signal
};

// mean, median, sample std, p1, p99, p99-p1. Percentiles use inclusive linear
// interpolation between closest ranks. Throws EmptyInput on an empty list.
std::array<double, 6> apply_functionals(std::span<const double> values);

double percentile(std::span<const double> sorted_values, double q);

// Values aligned with feature_catalogue(task_id); absent values are NaN.
std::vector<double> extract_recording_features(const Recording& recording,
                                               const FeatureConfig& config,
                                               StrokeDiagnostics* diagnostics = nullptr);

struct FeatureMatrix {
  std::vector<std::string> subject_ids;
  std::vector<Diagnosis> labels;
  std::vector<FeatureName> columns;
  std::vector<double> values;  // row-major, NaN = absent

  size_t rows() const { return subject_ids.size(); }
  size_t cols() const { return columns.size(); }
  double at(size_t r, size_t c) const { return values[r * columns.size() + c]; }
  double& at(size_t r, size_t c) { return values[r * columns.size() + c]; }
};

// One row per subject possessing the task, in manifest order.
FeatureMatrix build_task_matrix(const Cohort& cohort, int task_id, const FeatureConfig& config,
                                StrokeDiagnostics* diagnostics = nullptr, unsigned threads = 1);

// Column-wise concatenation keyed by subject id; a subject missing a task
// gets absent values in that task's columns. Input column blocks are kept in
// input order.
FeatureMatrix merge_tasks(const std::vector<FeatureMatrix>& matrices);

// Restrict to kinematic / pressure / both columns.
FeatureMatrix filter_columns(const FeatureMatrix& m, FeatureSet set);

struct DroppedColumn {
  FeatureName name;
  std::string reason;  // "zero variance" or "all absent"
};

// Per-column z-scoring parameters fitted on a row subset. Absent cells are
// imputed with the fit-set median before scaling; columns that are constant
// (or entirely absent) over the fit rows are dropped and logged.
struct Normalizer {
  std::vector<size_t> kept;  // column indices into the fitted matrix
  std::vector<double> mean;
  std::vector<double> stdev;
  std::vector<double> impute_median;
  std::vector<DroppedColumn> dropped;

  uint64_t digest() const;  // for leakage audits
};

Normalizer fit_normalizer(const FeatureMatrix& m, std::span<const size_t> fit_rows);
FeatureMatrix apply_normalizer(const Normalizer& n, const FeatureMatrix& m);

void write_matrix_csv(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix read_matrix_csv(const std::filesystem::path& path);

}  // namespace pdhw
