#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "pdhw/features.hpp"

namespace pdhw {

struct MannWhitneyResult {
  double u = 0.0;   // min(U_a, U_b), average-rank tie handling
  double p = 1.0;   // two-sided
  bool exact = false;
};

// Two-sided Mann-Whitney U test. Exact enumeration of the permutation null
// when n_a * n_b <= 64 (ties handled by enumerating the actual pooled
// midranks); otherwise the normal approximation with tie-corrected variance
// and continuity correction.
MannWhitneyResult mann_whitney_u(std::span<const double> group_a,
                                 std::span<const double> group_b);

// Forced normal-approximation variant, for accuracy audits against the exact
// enumeration on small samples.
MannWhitneyResult mann_whitney_u_approx(std::span<const double> group_a,
                                        std::span<const double> group_b);

// Average ranks (midranks) of a sample, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

// Spearman correlation of a feature column against a binary label vector:
// Pearson correlation of the two midrank vectors. A constant feature column
// yields 0 by convention; constant labels are an error.
double spearman_vs_label(std::span<const double> feature_column, std::span<const int> labels);

struct TestResult {
  FeatureName feature;
  double u_statistic = 0.0;
  double p_value = 1.0;
  double spearman_rho = 0.0;
  double pd_median = 0.0, h_median = 0.0;
  double pd_std = 0.0, h_std = 0.0;
};

// Mann-Whitney filter at `alpha` followed by |rho| ranking, computed on the
// (normalized) matrix. Ties on |rho| break by canonical feature-name order.
// Throws NoSignificantFeatures when nothing passes the filter.
std::vector<TestResult> select_and_rank(const FeatureMatrix& m, double alpha = 0.05);

void write_ranking_csv(const std::filesystem::path& path, const std::vector<TestResult>& results);

}  // namespace pdhw
