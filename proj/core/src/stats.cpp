#include "pdhw/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "pdhw/util.hpp"

namespace pdhw {

std::vector<double> average_ranks(std::span<const double> values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mid = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Null distribution of the doubled rank sum of group a over all C(n, n_a)
// assignments, by subset-sum dynamic programming over the pooled midranks
// (doubled so they are integers).
std::vector<std::vector<uint64_t>> rank_sum_distribution(const std::vector<int>& ranks2,
                                                         size_t n_a) {
  const int total = std::accumulate(ranks2.begin(), ranks2.end(), 0);
  std::vector<std::vector<uint64_t>> dp(n_a + 1,
                                        std::vector<uint64_t>(static_cast<size_t>(total) + 1, 0));
  dp[0][0] = 1;
  for (int rank : ranks2) {
    for (size_t k = std::min(n_a, static_cast<size_t>(ranks2.size())); k >= 1; --k) {
      for (int s = total; s >= rank; --s) {
        dp[k][static_cast<size_t>(s)] += dp[k - 1][static_cast<size_t>(s - rank)];
      }
    }
  }
  return dp;
}

}  // namespace

namespace {

MannWhitneyResult mann_whitney_impl(std::span<const double> group_a,
                                    std::span<const double> group_b, bool allow_exact) {
  const size_t n_a = group_a.size();
  const size_t n_b = group_b.size();
  if (n_a == 0) raise(Err::EmptyGroup, "group a is empty");
  if (n_b == 0) raise(Err::EmptyGroup, "group b is empty");
  const size_t n = n_a + n_b;

  std::vector<double> pooled(group_a.begin(), group_a.end());
  pooled.insert(pooled.end(), group_b.begin(), group_b.end());
  const auto ranks = average_ranks(pooled);

  double rank_sum_a = 0.0;
  for (size_t i = 0; i < n_a; ++i) rank_sum_a += ranks[i];
  const double u_a = rank_sum_a - static_cast<double>(n_a) * (n_a + 1) / 2.0;
  const double u_b = static_cast<double>(n_a) * static_cast<double>(n_b) - u_a;

  MannWhitneyResult out;
  out.u = std::min(u_a, u_b);
  const double nab = static_cast<double>(n_a) * static_cast<double>(n_b);

  if (allow_exact && nab <= 64.0) {
    out.exact = true;
    // Doubled midranks are integers even with ties.
    std::vector<int> ranks2(n);
    for (size_t i = 0; i < n; ++i) ranks2[i] = static_cast<int>(std::llround(2.0 * ranks[i]));
    const auto dp = rank_sum_distribution(ranks2, n_a);
    const auto& dist = dp[n_a];

    // U_a = (sum2/2) - n_a(n_a+1)/2, so thresholds convert via sum2 = 2U + n_a(n_a+1).
    const double offset = static_cast<double>(n_a) * (n_a + 1);
    const double lo_u = out.u;
    const double hi_u = nab - out.u;
    uint64_t count = 0, total = 0;
    for (size_t s = 0; s < dist.size(); ++s) {
      if (dist[s] == 0) continue;
      total += dist[s];
      const double u_of_s = (static_cast<double>(s) - offset) / 2.0;
      if (hi_u > lo_u) {
        if (u_of_s <= lo_u + 1e-9 || u_of_s >= hi_u - 1e-9) count += dist[s];
      }
    }
    out.p = hi_u > lo_u ? static_cast<double>(count) / static_cast<double>(total) : 1.0;
  } else {
    out.exact = false;
    // Normal approximation on the rank sum, with the exact tie-corrected
    // variance plus Edgeworth skewness/kurtosis terms. The central moments of
    // the rank sum under permutation are the classical finite-population
    // sample-sum moments of the midrank population; ties are covered because
    // they only change that population.
    const double nn = static_cast<double>(n);
    // Both tails have equal mass under the permutation null whichever group's
    // rank sum is expanded; using the smaller group keeps the computation
    // bit-identical under a group swap.
    const double m = static_cast<double>(std::min(n_a, n_b));
    const double mu = (nn + 1.0) / 2.0;  // midranks always average to this
    double s2 = 0, s3 = 0, s4 = 0;
    bool has_ties = false;
    for (size_t i = 0; i < n; ++i) {
      const double y = ranks[i] - mu;
      s2 += y * y;
      s3 += y * y * y;
      s4 += y * y * y * y;
      has_ties = has_ties || ranks[i] != std::floor(ranks[i]);
    }
    auto falling = [&](int k) {
      double num = 1.0, den = 1.0;
      for (int t = 0; t < k; ++t) {
        num *= m - t;
        den *= nn - t;
      }
      return num > 0.0 ? num / den : 0.0;
    };
    const double p1 = falling(1), p2 = falling(2), p3 = falling(3), p4 = falling(4);
    const double mu2 = (p1 - p2) * s2;
    const double mu3 = (p1 - 3.0 * p2 + 2.0 * p3) * s3;
    const double mu4 =
        (p1 - 7.0 * p2 + 12.0 * p3 - 6.0 * p4) * s4 + 3.0 * (p2 - 2.0 * p3 + p4) * s2 * s2;

    if (mu2 <= 1e-12) {
      out.p = 1.0;
    } else {
      const double sd = std::sqrt(mu2);
      const double g1 = mu3 / (sd * sd * sd);
      const double g2 = mu4 / (mu2 * mu2) - 3.0;
      auto edgeworth_cdf = [&](double z) {
        const double he2 = z * z - 1.0;
        const double he3 = z * (z * z - 3.0);
        const double he5 = z * (z * z * (z * z - 10.0) + 15.0);
        const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
        return normal_cdf(z) - pdf * (g1 / 6.0 * he2 + g2 / 24.0 * he3 + g1 * g1 / 72.0 * he5);
      };
      // With ties the rank-sum lattice spacing halves; the continuity
      // correction is half the spacing either way.
      const double cc = has_ties ? 0.25 : 0.5;
      const double mean_w = m * mu;
      const double offset = m * (m + 1.0) / 2.0;  // W = U + offset
      const double hi_u = nab - out.u;
      if (hi_u <= out.u) {
        out.p = 1.0;
      } else {
        const double p_lo = edgeworth_cdf((out.u + offset + cc - mean_w) / sd);
        const double p_hi = 1.0 - edgeworth_cdf((hi_u + offset - cc - mean_w) / sd);
        out.p = p_lo + p_hi;
      }
    }
  }
  out.p = std::clamp(out.p, 0.0, 1.0);
  return out;
}

}  // namespace

MannWhitneyResult mann_whitney_u(std::span<const double> group_a,
                                 std::span<const double> group_b) {
  return mann_whitney_impl(group_a, group_b, true);
}

MannWhitneyResult mann_whitney_u_approx(std::span<const double> group_a,
                                        std::span<const double> group_b) {
  return mann_whitney_impl(group_a, group_b, false);
}

double spearman_vs_label(std::span<const double> feature_column, std::span<const int> labels) {
  const size_t n = feature_column.size();
  if (n < 3 || labels.size() != n) {
    raise(Err::SeriesTooShort, "spearman needs >= 3 aligned rows");
  }
  bool all_equal = true;
  for (size_t i = 1; i < n && all_equal; ++i) all_equal = labels[i] == labels[0];
  if (all_equal) raise(Err::ConstantLabels, "labels are all equal");

  std::vector<double> label_values(n);
  for (size_t i = 0; i < n; ++i) label_values[i] = static_cast<double>(labels[i]);
  const auto rf = average_ranks(feature_column);
  const auto rl = average_ranks(label_values);

  const double mf = mean_of(rf);
  const double ml = mean_of(rl);
  double sff = 0, sll = 0, sfl = 0;
  for (size_t i = 0; i < n; ++i) {
    const double df = rf[i] - mf;
    const double dl = rl[i] - ml;
    sff += df * df;
    sll += dl * dl;
    sfl += df * dl;
  }
  if (sff <= 0.0) return 0.0;  // constant feature: no monotone association
  return sfl / std::sqrt(sff * sll);
}

std::vector<TestResult> select_and_rank(const FeatureMatrix& m, double alpha) {
  bool has_pd = false, has_h = false;
  for (auto d : m.labels) (d == Diagnosis::PD ? has_pd : has_h) = true;
  if (!has_pd || !has_h) raise(Err::EmptyGroup, "matrix must contain both classes");

  std::vector<TestResult> results;
  for (size_t c = 0; c < m.cols(); ++c) {
    std::vector<double> pd, healthy, present;
    std::vector<int> labels;
    for (size_t r = 0; r < m.rows(); ++r) {
      const double v = m.at(r, c);
      if (std::isnan(v)) continue;
      present.push_back(v);
      labels.push_back(m.labels[r] == Diagnosis::PD ? 1 : 0);
      (m.labels[r] == Diagnosis::PD ? pd : healthy).push_back(v);
    }
    if (pd.empty() || healthy.empty() || present.size() < 3) continue;

    const auto mw = mann_whitney_u(pd, healthy);
    if (!(mw.p < alpha)) continue;

    TestResult t;
    t.feature = m.columns[c];
    t.u_statistic = mw.u;
    t.p_value = mw.p;
    t.spearman_rho = spearman_vs_label(present, labels);
    auto med = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      const size_t k = v.size();
      return k % 2 == 1 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
    };
    t.pd_median = med(pd);
    t.h_median = med(healthy);
    t.pd_std = sample_std(pd);
    t.h_std = sample_std(healthy);
    results.push_back(std::move(t));
  }

  if (results.empty()) raise(Err::NoSignificantFeatures, "no feature passed the U-test filter");

  std::sort(results.begin(), results.end(), [](const TestResult& a, const TestResult& b) {
    const double ra = std::abs(a.spearman_rho);
    const double rb = std::abs(b.spearman_rho);
    if (ra != rb) return ra > rb;
    return a.feature < b.feature;
  });
  return results;
}

void write_ranking_csv(const std::filesystem::path& path,
                       const std::vector<TestResult>& results) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Err::IoFailure, "cannot write ranking " + path.string());
  out << "feature,segment,functional,task,rho,u,p,pd_median,pd_std,h_median,h_std\n";
  for (const auto& t : results) {
    out << t.feature.base << ',' << to_string(t.feature.segment) << ','
        << to_string(t.feature.functional) << ',' << t.feature.task_id << ','
        << format_double(t.spearman_rho) << ',' << format_double(t.u_statistic) << ','
        << format_double(t.p_value) << ',' << format_double(t.pd_median) << ','
        << format_double(t.pd_std) << ',' << format_double(t.h_median) << ','
        << format_double(t.h_std) << "\n";
  }
}

}  // namespace pdhw
