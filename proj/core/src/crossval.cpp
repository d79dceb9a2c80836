#include "pdhw/crossval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pdhw/util.hpp"

namespace pdhw {

const char* to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::Svm: return "svm";
    case ClassifierKind::AdaBoost: return "adaboost";
    case ClassifierKind::Knn: return "knn";
  }
  return "?";
}

const char* to_string(EvalMode mode) {
  return mode == EvalMode::Nested ? "nested" : "paper-faithful";
}

const char* to_string(FeatureSet set) {
  switch (set) {
    case FeatureSet::Kinematic: return "kinematic";
    case FeatureSet::Pressure: return "pressure";
    case FeatureSet::Both: return "both";
  }
  return "?";
}

std::vector<FoldPlan> make_fold_plans(std::span<const int> labels, int n_folds, int n_repeats,
                                      uint64_t seed) {
  if (n_folds < 2) raise(Err::ClassTooSmall, "need at least 2 folds");
  std::vector<std::vector<size_t>> members(2);
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) raise(Err::ClassTooSmall, "labels must be 0/1");
    members[static_cast<size_t>(labels[i])].push_back(i);
  }
  for (size_t c = 0; c < 2; ++c) {
    if (members[c].size() < static_cast<size_t>(n_folds)) {
      raise(Err::ClassTooSmall, "class " + std::to_string(c) + " has " +
                                    std::to_string(members[c].size()) + " members, needs >= " +
                                    std::to_string(n_folds));
    }
  }

  std::vector<FoldPlan> plans;
  plans.reserve(static_cast<size_t>(n_repeats));
  for (int r = 0; r < n_repeats; ++r) {
    FoldPlan plan;
    plan.repeat_index = r;
    plan.seed = derive_seed(seed, static_cast<uint64_t>(r));
    plan.folds.assign(static_cast<size_t>(n_folds), {});
    Rng rng(plan.seed);

    std::vector<size_t> fold_sizes(static_cast<size_t>(n_folds), 0);
    for (size_t c = 0; c < 2; ++c) {
      std::vector<size_t> shuffled = members[c];
      rng.shuffle(shuffled);

      const size_t base = shuffled.size() / static_cast<size_t>(n_folds);
      const size_t extras = shuffled.size() % static_cast<size_t>(n_folds);

      // Hand the class's spare members to the currently smallest folds.
      std::vector<size_t> order(static_cast<size_t>(n_folds));
      std::iota(order.begin(), order.end(), size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](size_t a, size_t b) { return fold_sizes[a] < fold_sizes[b]; });
      std::vector<size_t> counts(static_cast<size_t>(n_folds), base);
      for (size_t e = 0; e < extras; ++e) ++counts[order[e]];

      size_t cursor = 0;
      for (size_t f = 0; f < static_cast<size_t>(n_folds); ++f) {
        for (size_t k = 0; k < counts[f]; ++k) plan.folds[f].push_back(shuffled[cursor++]);
        fold_sizes[f] += counts[f];
      }
    }
    for (auto& fold : plan.folds) std::sort(fold.begin(), fold.end());
    plans.push_back(std::move(plan));
  }
  return plans;
}

std::vector<std::vector<size_t>> stratified_fold_indices(std::span<const int> labels, int n_folds,
                                                         uint64_t seed) {
  return make_fold_plans(labels, n_folds, 1, seed)[0].folds;
}

std::string ProtocolConfig::digest() const {
  std::ostringstream s;
  s << to_string(mode) << '|' << alpha << '|' << inner_folds << '|' << n_folds << '|'
    << n_repeats << '|' << adaboost.max_rounds << '|' << adaboost.max_depth << '|' << knn_k
    << "|c:";
  for (int e : grid.c_exponents) s << e << ',';
  s << "g:";
  for (int e : grid.gamma_exponents) s << e << ',';
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(fnv1a(s.str())));
  return std::string(hex);
}

namespace {

struct PreparedFold {
  std::vector<size_t> train_rows;
  std::vector<size_t> test_rows;
};

FeatureMatrix take_rows(const FeatureMatrix& m, std::span<const size_t> rows) {
  FeatureMatrix out;
  out.columns = m.columns;
  out.values.reserve(rows.size() * m.cols());
  for (size_t r : rows) {
    out.subject_ids.push_back(m.subject_ids[r]);
    out.labels.push_back(m.labels[r]);
    for (size_t c = 0; c < m.cols(); ++c) out.values.push_back(m.at(r, c));
  }
  return out;
}

uint64_t selection_digest_of(const std::vector<size_t>& cols, const FeatureMatrix& m) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (size_t c : cols) h = fnv1a(m.columns[c].str(), h);
  return h;
}

std::vector<std::vector<double>> gather(const FeatureMatrix& m, std::span<const size_t> rows,
                                        const std::vector<size_t>& cols) {
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (size_t r : rows) {
    std::vector<double> row;
    row.reserve(cols.size());
    for (size_t c : cols) row.push_back(m.at(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<int> signed_labels(const FeatureMatrix& m, std::span<const size_t> rows) {
  std::vector<int> y;
  y.reserve(rows.size());
  for (size_t r : rows) y.push_back(m.labels[r] == Diagnosis::PD ? 1 : -1);
  return y;
}

// Column indices (into `normalized`) of features that pass the U-test filter
// on the given rows, or every column as a fallback when none passes.
std::pair<std::vector<size_t>, bool> select_columns(const FeatureMatrix& normalized,
                                                    std::span<const size_t> rows, double alpha) {
  std::map<std::string, size_t> index_of;
  for (size_t c = 0; c < normalized.cols(); ++c) index_of[normalized.columns[c].str()] = c;

  std::vector<size_t> cols;
  bool fallback = false;
  try {
    const auto ranked = select_and_rank(take_rows(normalized, rows), alpha);
    cols.reserve(ranked.size());
    for (const auto& t : ranked) cols.push_back(index_of.at(t.feature.str()));
  } catch (const Error& e) {
    if (e.code() != Err::NoSignificantFeatures) throw;
    fallback = true;
    cols.resize(normalized.cols());
    std::iota(cols.begin(), cols.end(), size_t{0});
  }
  return {cols, fallback};
}

}  // namespace

ProtocolResult run_protocol(const FeatureMatrix& m, ClassifierKind kind,
                            const std::vector<FoldPlan>& plans, const ProtocolConfig& config) {
  if (m.rows() < 20) {
    raise(Err::TooFewSamples,
          "protocol needs >= 20 rows, matrix has " + std::to_string(m.rows()));
  }

  // Flatten (repeat, fold) pairs into one deterministic job list.
  std::vector<std::pair<size_t, size_t>> jobs;
  for (size_t p = 0; p < plans.size(); ++p) {
    for (size_t f = 0; f < plans[p].folds.size(); ++f) jobs.emplace_back(p, f);
  }

  // Paper-faithful mode fits everything once, on the full matrix.
  Normalizer global_norm;
  FeatureMatrix global_normalized;
  std::vector<size_t> global_cols;
  bool global_fallback = false;
  GridSearchResult global_svm;
  if (config.mode == EvalMode::PaperFaithful) {
    std::vector<size_t> all_rows(m.rows());
    std::iota(all_rows.begin(), all_rows.end(), size_t{0});
    global_norm = fit_normalizer(m, all_rows);
    global_normalized = apply_normalizer(global_norm, m);
    std::tie(global_cols, global_fallback) =
        select_columns(global_normalized, all_rows, config.alpha);
    if (kind == ClassifierKind::Svm) {
      const auto X = gather(global_normalized, all_rows, global_cols);
      const auto y = signed_labels(global_normalized, all_rows);
      global_svm = grid_search_svm(X, y, config.grid, config.inner_folds,
                                   derive_seed(config.seed, 0x67726964), 1);
    }
  }

  std::vector<FoldOutcome> outcomes(jobs.size());
  parallel_for(jobs.size(), config.threads, [&](size_t job) {
    const auto [p, f] = jobs[job];
    const auto& plan = plans[p];
    FoldOutcome& out = outcomes[job];
    out.repeat = plan.repeat_index;
    out.fold = static_cast<int>(f);

    std::vector<size_t> test_rows = plan.folds[f];
    std::vector<char> is_test(m.rows(), 0);
    for (size_t r : test_rows) is_test[r] = 1;
    std::vector<size_t> train_rows;
    train_rows.reserve(m.rows() - test_rows.size());
    for (size_t r = 0; r < m.rows(); ++r) {
      if (!is_test[r]) train_rows.push_back(r);
    }

    try {
      const Normalizer norm =
          config.mode == EvalMode::Nested ? fit_normalizer(m, train_rows) : global_norm;
      const FeatureMatrix normalized =
          config.mode == EvalMode::Nested ? apply_normalizer(norm, m) : global_normalized;

      std::vector<size_t> cols;
      bool fallback = false;
      if (config.mode == EvalMode::Nested) {
        std::tie(cols, fallback) = select_columns(normalized, train_rows, config.alpha);
      } else {
        cols = global_cols;
        fallback = global_fallback;
      }

      out.normalizer_digest = norm.digest();
      out.selection_digest = selection_digest_of(cols, normalized);
      out.n_selected = static_cast<int>(cols.size());
      out.selection_fallback = fallback;

      const auto train_x = gather(normalized, train_rows, cols);
      const auto train_y = signed_labels(normalized, train_rows);
      const auto test_x = gather(normalized, test_rows, cols);
      const auto test_y = signed_labels(normalized, test_rows);

      std::vector<int> predicted(test_rows.size());
      const uint64_t job_seed = derive_seed(config.seed, 0x1000 + job);
      switch (kind) {
        case ClassifierKind::Svm: {
          SvmConfig cfg;
          if (config.mode == EvalMode::Nested) {
            const auto tuned = grid_search_svm(train_x, train_y, config.grid,
                                               config.inner_folds, job_seed, 1);
            cfg = tuned.best;
            out.c_exponent = tuned.c_exponent;
            out.gamma_exponent = tuned.gamma_exponent;
          } else {
            cfg = global_svm.best;
            out.c_exponent = global_svm.c_exponent;
            out.gamma_exponent = global_svm.gamma_exponent;
          }
          const auto model = svm_train(train_x, train_y, cfg, derive_seed(job_seed, 1));
          for (size_t i = 0; i < test_x.size(); ++i) predicted[i] = model.predict(test_x[i]);
          break;
        }
        case ClassifierKind::AdaBoost: {
          const auto model = adaboost_train(train_x, train_y, config.adaboost, job_seed);
          for (size_t i = 0; i < test_x.size(); ++i) predicted[i] = model.predict(test_x[i]);
          break;
        }
        case ClassifierKind::Knn: {
          const auto model = knn_fit(train_x, train_y, config.knn_k);
          for (size_t i = 0; i < test_x.size(); ++i) predicted[i] = knn_predict(model, test_x[i]);
          break;
        }
      }

      for (size_t i = 0; i < test_rows.size(); ++i) {
        const bool actual_pd = test_y[i] == 1;
        const bool pred_pd = predicted[i] == 1;
        if (actual_pd && pred_pd) ++out.tp;
        else if (actual_pd && !pred_pd) ++out.fn;
        else if (!actual_pd && pred_pd) ++out.fp;
        else ++out.tn;
      }
    } catch (const Error& e) {
      throw Error(e.code(), "repeat " + std::to_string(plan.repeat_index) + " fold " +
                                std::to_string(f) + ": " + e.what());
    }
  });

  ProtocolResult result;
  result.folds = std::move(outcomes);
  double acc = 0, sen = 0, spe = 0;
  size_t sen_n = 0, spe_n = 0;
  for (const auto& o : result.folds) {
    const int total = o.tp + o.tn + o.fp + o.fn;
    acc += static_cast<double>(o.tp + o.tn) / total;
    if (o.tp + o.fn > 0) {
      sen += static_cast<double>(o.tp) / (o.tp + o.fn);
      ++sen_n;
    }
    if (o.tn + o.fp > 0) {
      spe += static_cast<double>(o.tn) / (o.tn + o.fp);
      ++spe_n;
    }
    result.tp += o.tp;
    result.tn += o.tn;
    result.fp += o.fp;
    result.fn += o.fn;
  }
  const auto n_folds = static_cast<double>(result.folds.size());
  result.accuracy = acc / n_folds;
  result.sensitivity = sen_n ? sen / static_cast<double>(sen_n) : 0.0;
  result.specificity = spe_n ? spe / static_cast<double>(spe_n) : 0.0;
  result.pooled_accuracy = static_cast<double>(result.tp + result.tn) /
                           static_cast<double>(result.tp + result.tn + result.fp + result.fn);
  return result;
}

namespace {

char hex_digit(uint64_t v) { return "0123456789abcdef"[v & 0xf]; }

std::string hex64(uint64_t v) {
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<size_t>(i)] = hex_digit(v);
    v >>= 4;
  }
  return s;
}

}  // namespace

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["format"] = "pdhw-report-1";
  j["seed"] = report.seed;
  j["config_digest"] = report.config_digest;
  nlohmann::json combos = nlohmann::json::array();
  for (const auto& c : report.combos) {
    nlohmann::json jc;
    jc["task"] = c.task_id == 0 ? "merged" : std::to_string(c.task_id);
    jc["feature_set"] = to_string(c.feature_set);
    jc["classifier"] = to_string(c.classifier);
    jc["skipped"] = c.skipped;
    if (c.skipped) {
      jc["skip_reason"] = c.skip_reason;
    } else {
      jc["accuracy"] = c.result.accuracy;
      jc["sensitivity"] = c.result.sensitivity;
      jc["specificity"] = c.result.specificity;
      jc["pooled"] = {{"tp", c.result.tp},
                      {"tn", c.result.tn},
                      {"fp", c.result.fp},
                      {"fn", c.result.fn},
                      {"accuracy", c.result.pooled_accuracy}};
      nlohmann::json folds = nlohmann::json::array();
      for (const auto& o : c.result.folds) {
        folds.push_back({{"repeat", o.repeat},
                         {"fold", o.fold},
                         {"tp", o.tp},
                         {"tn", o.tn},
                         {"fp", o.fp},
                         {"fn", o.fn},
                         {"normalizer_digest", hex64(o.normalizer_digest)},
                         {"selection_digest", hex64(o.selection_digest)},
                         {"n_selected", o.n_selected},
                         {"selection_fallback", o.selection_fallback},
                         {"c_exponent", o.c_exponent},
                         {"gamma_exponent", o.gamma_exponent}});
      }
      jc["folds"] = std::move(folds);
    }
    combos.push_back(std::move(jc));
  }
  j["combos"] = std::move(combos);
  return j;
}

RenderedReport compare_report(const EvalReport& report) {
  RenderedReport out;

  // Task table: rows = evaluated tasks plus "overall" for the merged matrix;
  // columns = accuracy per feature set for the SVM. Skipped cells render "-".
  std::map<int, std::map<FeatureSet, const ComboResult*>> by_task;
  for (const auto& c : report.combos) {
    if (c.classifier == ClassifierKind::Svm) by_task[c.task_id][c.feature_set] = &c;
  }
  std::ostringstream t4;
  t4 << "task,pressure,kinematic,both\n";
  auto cell = [](const ComboResult* c) -> std::string {
    if (!c) return "";
    if (c->skipped) return "-";
    return format_double(c->result.accuracy);
  };
  for (const auto& [task, sets] : by_task) {
    if (task == 0) continue;
    auto get = [&](FeatureSet s) -> const ComboResult* {
      auto it = sets.find(s);
      return it == sets.end() ? nullptr : it->second;
    };
    t4 << task << ',' << cell(get(FeatureSet::Pressure)) << ',' << cell(get(FeatureSet::Kinematic))
       << ',' << cell(get(FeatureSet::Both)) << "\n";
  }
  if (by_task.count(0)) {
    const auto& sets = by_task[0];
    auto get = [&](FeatureSet s) -> const ComboResult* {
      auto it = sets.find(s);
      return it == sets.end() ? nullptr : it->second;
    };
    t4 << "overall," << cell(get(FeatureSet::Pressure)) << ','
       << cell(get(FeatureSet::Kinematic)) << ',' << cell(get(FeatureSet::Both)) << "\n";
  }
  out.task_table_csv = t4.str();

  // Classifier table from the merged matrix when present, otherwise from the
  // single evaluated task.
  int target = -1;
  for (const auto& c : report.combos) {
    if (c.task_id == 0) target = 0;
  }
  if (target == -1) {
    for (const auto& c : report.combos) {
      if (target == -1 || c.task_id < target) target = c.task_id;
    }
  }
  std::ostringstream t5;
  t5 << "classifier,p_acc,p_spe,p_sen\n";
  for (ClassifierKind kind :
       {ClassifierKind::Svm, ClassifierKind::AdaBoost, ClassifierKind::Knn}) {
    const ComboResult* pick = nullptr;
    for (const auto& c : report.combos) {
      if (c.task_id == target && c.classifier == kind &&
          (!pick || c.feature_set == FeatureSet::Both)) {
        pick = &c;
      }
    }
    if (!pick) continue;
    t5 << to_string(kind) << ',';
    if (pick->skipped) {
      t5 << "-,-,-\n";
    } else {
      t5 << format_double(pick->result.accuracy) << ','
         << format_double(pick->result.specificity) << ','
         << format_double(pick->result.sensitivity) << "\n";
    }
  }
  out.classifier_table_csv = t5.str();
  return out;
}

}  // namespace pdhw
