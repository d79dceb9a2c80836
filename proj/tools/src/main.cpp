// pdhw: batch pipeline for pen-digitizer handwriting analysis.
//
// Subcommands: synth (generate a synthetic cohort), extract (feature
// matrices), rank (U-test filter + Spearman ranking), evaluate (repeated
// stratified cross-validation of SVM / AdaBoost / K-NN).
//
// All randomness flows from --seed; outputs are byte-identical for identical
// inputs, configuration, and seed.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pdhw/pdhw.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIngest = 2;
constexpr int kExitNoFeatures = 3;
constexpr int kExitProtocol = 4;

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) pdhw::raise(pdhw::Err::IoFailure, "cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

std::string slurp_matrix_csv(const pdhw::FeatureMatrix& m) {
  // Reuse the library writer through a temp file-free path: write to string.
  std::ostringstream out;
  out << "subject_id,diagnosis";
  for (const auto& c : m.columns) out << ',' << c.str();
  out << "\n";
  for (size_t r = 0; r < m.rows(); ++r) {
    out << m.subject_ids[r] << ',' << pdhw::to_string(m.labels[r]);
    for (size_t c = 0; c < m.cols(); ++c) {
      const double v = m.at(r, c);
      out << ',';
      if (!std::isnan(v)) out << pdhw::format_double(v);
    }
    out << "\n";
  }
  return out.str();
}

std::vector<int> parse_task_list(const std::string& text) {
  std::vector<int> tasks;
  for (auto part : pdhw::split(text, ',')) {
    auto v = pdhw::parse_double(part);
    if (!v || *v < 1 || *v > 8 || *v != std::floor(*v)) {
      throw CLI::ValidationError("--tasks", "task ids must be integers in 1..8");
    }
    tasks.push_back(static_cast<int>(*v));
  }
  return tasks;
}

std::map<std::string, double> parse_effects(const std::string& text) {
  std::map<std::string, double> effects;
  if (text.empty()) return effects;
  for (auto part : pdhw::split(text, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) {
      throw CLI::ValidationError("--effects", "expected family=value pairs");
    }
    auto value = pdhw::parse_double(part.substr(eq + 1));
    if (!value) throw CLI::ValidationError("--effects", "bad effect value");
    effects[std::string(part.substr(0, eq))] = *value;
  }
  return effects;
}

struct CommonOptions {
  uint64_t seed = 1;
  unsigned threads = 2;
};

// ---- synth ----------------------------------------------------------------

int cmd_synth(const std::string& out_dir, uint64_t seed, int n_per_group,
              const std::string& tasks_text, const std::string& effects_text, double noise,
              int strokes_per_task) {
  pdhw::SynthSpec spec;
  spec.seed = seed;
  spec.n_per_group = n_per_group;
  if (!tasks_text.empty()) spec.tasks = parse_task_list(tasks_text);
  spec.effect_map = parse_effects(effects_text);
  spec.noise_level = noise;
  spec.strokes_per_task = strokes_per_task;

  const auto result = pdhw::generate(spec);
  pdhw::write_cohort(out_dir, result.cohort);
  pdhw::write_ledger(fs::path(out_dir) / "ledger.json", result.ledger);
  std::cout << "wrote cohort of " << result.cohort.subjects.size() << " subjects, "
            << result.cohort.recordings.size() << " recordings to " << out_dir << "\n";
  return kExitOk;
}

// ---- extract ---------------------------------------------------------------

int cmd_extract(const std::string& data_root, const std::string& out_dir, double device_scale,
                const std::string& tasks_text, const pdhw::FeatureConfig& config,
                unsigned threads) {
  pdhw::ParseOptions parse_options;
  parse_options.scale_mm_per_unit = device_scale;

  pdhw::LoadDiagnostics load_diag;
  const auto cohort = pdhw::load_cohort(data_root, parse_options, &load_diag);

  std::vector<int> tasks = {1, 2, 3, 4, 5, 6, 7, 8};
  if (!tasks_text.empty()) tasks = parse_task_list(tasks_text);

  fs::create_directories(out_dir);
  json log;
  log["catalogue_version"] = pdhw::kCatalogueVersion;
  log["columns_per_task"] = pdhw::catalogue_size();
  log["files_parsed"] = load_diag.files_parsed;
  log["residual_pressure_samples"] = load_diag.residual_pressure_samples;
  log["missing_tasks"] = load_diag.missing_tasks;

  pdhw::StrokeDiagnostics stroke_diag;
  std::vector<pdhw::FeatureMatrix> merged_inputs;
  json task_log = json::object();
  for (int task : tasks) {
    try {
      auto matrix = pdhw::build_task_matrix(cohort, task, config, &stroke_diag, threads);
      write_file_atomic(fs::path(out_dir) / ("task" + std::to_string(task) + "_features.csv"),
                        slurp_matrix_csv(matrix));
      task_log["task" + std::to_string(task)] = {{"rows", matrix.rows()},
                                                 {"columns", matrix.cols()}};
      if (task >= 2) merged_inputs.push_back(std::move(matrix));
    } catch (const pdhw::Error& e) {
      if (e.code() != pdhw::Err::TaskUnavailable) throw;
      task_log["task" + std::to_string(task)] = {{"skipped", e.what()}};
    }
  }
  if (merged_inputs.size() >= 2) {
    const auto merged = pdhw::merge_tasks(merged_inputs);
    write_file_atomic(fs::path(out_dir) / "merged_features.csv", slurp_matrix_csv(merged));
    task_log["merged"] = {{"rows", merged.rows()}, {"columns", merged.cols()}};
  }
  log["tasks"] = std::move(task_log);
  log["discarded_short_strokes"] = stroke_diag.discarded_short_runs;
  log["drop_log"] = json::array();  // normalization drops happen in rank/evaluate
  write_file_atomic(fs::path(out_dir) / "extract_log.json", log.dump(2) + "\n");

  std::cout << "extracted feature matrices to " << out_dir << "\n";
  return kExitOk;
}

// ---- rank -----------------------------------------------------------------

int cmd_rank(const std::string& matrix_dir, const std::string& task, double alpha,
             const std::string& out_file, int top) {
  const fs::path path = fs::path(matrix_dir) / (task == "merged"
                                                    ? "merged_features.csv"
                                                    : "task" + task + "_features.csv");
  if (!fs::exists(path)) {
    pdhw::raise(pdhw::Err::IoFailure, "matrix file not found: " + path.string());
  }
  const auto matrix = pdhw::read_matrix_csv(path);

  std::vector<size_t> all_rows(matrix.rows());
  for (size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;
  const auto normalizer = pdhw::fit_normalizer(matrix, all_rows);
  const auto normalized = pdhw::apply_normalizer(normalizer, matrix);

  const auto ranked = pdhw::select_and_rank(normalized, alpha);

  std::cout << "feature,functional,task,rho,pd_median(std),h_median(std)\n";
  const int limit = top > 0 ? std::min<int>(top, static_cast<int>(ranked.size()))
                            : static_cast<int>(ranked.size());
  for (int i = 0; i < limit; ++i) {
    const auto& t = ranked[static_cast<size_t>(i)];
    std::cout << t.feature.base
              << (t.feature.segment == pdhw::Scope::Whole
                      ? ""
                      : std::string("^") + pdhw::to_string(t.feature.segment))
              << ',' << pdhw::to_string(t.feature.functional) << ',' << t.feature.task_id << ','
              << pdhw::format_double(t.spearman_rho) << ',' << pdhw::format_double(t.pd_median)
              << " (" << pdhw::format_double(t.pd_std) << ")," << pdhw::format_double(t.h_median)
              << " (" << pdhw::format_double(t.h_std) << ")\n";
  }
  if (!out_file.empty()) {
    pdhw::write_ranking_csv(out_file, ranked);
    std::cout << "wrote " << ranked.size() << " significant features to " << out_file << "\n";
  }
  return kExitOk;
}

// ---- evaluate ---------------------------------------------------------------

struct EvaluatePlan {
  std::vector<int> tasks;
  bool include_merged = false;
  std::vector<pdhw::ClassifierKind> classifiers;
  pdhw::FeatureSet feature_set = pdhw::FeatureSet::Both;
  pdhw::ProtocolConfig protocol;
};

pdhw::ComboResult run_combo(const pdhw::FeatureMatrix& full, int task_id,
                            pdhw::FeatureSet set, pdhw::ClassifierKind kind,
                            const pdhw::ProtocolConfig& base_config) {
  pdhw::ComboResult combo;
  combo.task_id = task_id;
  combo.feature_set = set;
  combo.classifier = kind;

  const auto matrix = pdhw::filter_columns(full, set);

  // Table-4 "-" semantics: a combination with no significant features on the
  // full matrix is reported, not evaluated.
  std::vector<size_t> all_rows(matrix.rows());
  for (size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;
  try {
    const auto normalizer = pdhw::fit_normalizer(matrix, all_rows);
    const auto normalized = pdhw::apply_normalizer(normalizer, matrix);
    pdhw::select_and_rank(normalized, base_config.alpha);
  } catch (const pdhw::Error& e) {
    if (e.code() == pdhw::Err::NoSignificantFeatures ||
        e.code() == pdhw::Err::DegenerateFitSet) {
      combo.skipped = true;
      combo.skip_reason = e.what();
      return combo;
    }
    throw;
  }

  pdhw::ProtocolConfig config = base_config;
  const std::string combo_name = std::string("task") + std::to_string(task_id) + "|" +
                                 pdhw::to_string(set) + "|" + pdhw::to_string(kind);
  config.seed = pdhw::derive_seed(base_config.seed, pdhw::fnv1a(combo_name));

  std::vector<int> labels01(matrix.rows());
  for (size_t i = 0; i < matrix.rows(); ++i) {
    labels01[i] = matrix.labels[i] == pdhw::Diagnosis::PD ? 1 : 0;
  }
  const auto plans =
      pdhw::make_fold_plans(labels01, config.n_folds, config.n_repeats, config.seed);
  combo.result = pdhw::run_protocol(matrix, kind, plans, config);
  return combo;
}

int cmd_evaluate(const std::string& matrix_dir, const std::string& out_dir,
                 const EvaluatePlan& plan) {
  std::map<int, pdhw::FeatureMatrix> matrices;  // 0 = merged
  for (int task : plan.tasks) {
    const fs::path path = fs::path(matrix_dir) / ("task" + std::to_string(task) +
                                                  "_features.csv");
    if (fs::exists(path)) matrices[task] = pdhw::read_matrix_csv(path);
  }
  if (plan.include_merged) {
    const fs::path path = fs::path(matrix_dir) / "merged_features.csv";
    if (fs::exists(path)) matrices[0] = pdhw::read_matrix_csv(path);
  }
  if (matrices.empty()) {
    pdhw::raise(pdhw::Err::IoFailure, "no feature matrices found in " + matrix_dir);
  }

  pdhw::EvalReport report;
  report.seed = plan.protocol.seed;
  report.config_digest = plan.protocol.digest();

  const bool run_svm_tables =
      std::find(plan.classifiers.begin(), plan.classifiers.end(),
                pdhw::ClassifierKind::Svm) != plan.classifiers.end();

  try {
    // Task table: SVM accuracy per feature set, per task plus merged.
    if (run_svm_tables) {
      for (const auto& [task_id, matrix] : matrices) {
        for (pdhw::FeatureSet set : {pdhw::FeatureSet::Pressure, pdhw::FeatureSet::Kinematic,
                                     pdhw::FeatureSet::Both}) {
          report.combos.push_back(
              run_combo(matrix, task_id, set, pdhw::ClassifierKind::Svm, plan.protocol));
        }
      }
    }
    // Classifier table: every requested classifier on the merged matrix (or
    // the only evaluated task) with the configured feature set.
    const int target = matrices.count(0) ? 0 : matrices.begin()->first;
    for (pdhw::ClassifierKind kind : plan.classifiers) {
      const bool duplicate = kind == pdhw::ClassifierKind::Svm && run_svm_tables &&
                             plan.feature_set == pdhw::FeatureSet::Both;
      if (duplicate) continue;  // already computed for the task table
      report.combos.push_back(
          run_combo(matrices.at(target), target, plan.feature_set, kind, plan.protocol));
    }
  } catch (const pdhw::Error& e) {
    std::cerr << "protocol failure: " << e.what() << "\n";
    return kExitProtocol;
  }

  const auto rendered = pdhw::compare_report(report);
  std::cout << rendered.task_table_csv << "\n" << rendered.classifier_table_csv;

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file_atomic(fs::path(out_dir) / "report.json",
                      pdhw::report_to_json(report).dump(2) + "\n");
    write_file_atomic(fs::path(out_dir) / "task_table.csv", rendered.task_table_csv);
    write_file_atomic(fs::path(out_dir) / "classifier_table.csv",
                      rendered.classifier_table_csv);
    std::cout << "wrote report to " << out_dir << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pen-digitizer handwriting analysis pipeline"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a key=value file");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort");
  std::string synth_out = "synth_cohort";
  uint64_t synth_seed = 1;
  int n_per_group = 40;
  std::string synth_tasks, effects;
  double noise = 1.0;
  int strokes = 6;
  synth->add_option("--out", synth_out, "Output cohort directory");
  synth->add_option("--seed", synth_seed, "RNG seed");
  synth->add_option("--n-per-group", n_per_group, "Subjects per diagnosis group");
  synth->add_option("--tasks", synth_tasks, "Comma-separated task ids (default all)");
  synth->add_option("--effects", effects,
                    "family=sigma pairs, e.g. \"stroke speed=-2,ncp=1.5\"");
  synth->add_option("--noise", noise, "Noise level multiplier");
  synth->add_option("--strokes-per-task", strokes, "Strokes per recording");

  // extract
  auto* extract = app.add_subcommand("extract", "Compute feature matrices from a cohort");
  std::string data_root, extract_out = "features";
  double device_scale = 0.01;
  std::string extract_tasks;
  unsigned threads = 2;
  pdhw::FeatureConfig feature_config;
  extract->add_option("--data-root", data_root, "Cohort directory")->required();
  extract->add_option("--out", extract_out, "Output directory");
  extract->add_option("--device-scale", device_scale, "Millimetres per device unit");
  extract->add_option("--tasks", extract_tasks, "Comma-separated task ids");
  extract->add_option("--threads", threads, "Worker threads");
  extract->add_option("--min-stroke-samples", feature_config.stroke.min_stroke_samples,
                      "Discard shorter on-surface runs");
  extract->add_option("--lowess-span", feature_config.pressure.lowess_span,
                      "Smoothing span for NCP and segmentation");
  extract->add_flag("--smooth-before-derivatives",
                    feature_config.kinematics.differentiate_smoothed,
                    "Lowess-smooth coordinates before differentiation");

  // rank
  auto* rank = app.add_subcommand("rank", "Rank statistically significant features");
  std::string matrix_dir = "features", rank_task = "merged", rank_out;
  double alpha = 0.05;
  int top = 20;
  rank->add_option("--matrix-dir", matrix_dir, "Directory with extracted matrices");
  rank->add_option("--task", rank_task, "Task id or 'merged'");
  rank->add_option("--alpha", alpha, "U-test significance level");
  rank->add_option("--out", rank_out, "Ranking CSV path");
  rank->add_option("--top", top, "Rows to print (0 = all)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Cross-validated classification");
  std::string eval_matrix_dir = "features", eval_out, eval_tasks, classifier = "all";
  std::string features = "both", mode = "nested", grid = "full";
  EvaluatePlan plan;
  evaluate->add_option("--matrix-dir", eval_matrix_dir, "Directory with extracted matrices");
  evaluate->add_option("--out", eval_out, "Report output directory");
  evaluate->add_option("--seed", plan.protocol.seed, "RNG seed")->required();
  evaluate->add_option("--tasks", eval_tasks, "Task ids to evaluate (default: all found)");
  evaluate->add_option("--classifier", classifier, "svm | adaboost | knn | all");
  evaluate->add_option("--features", features, "kinematic | pressure | both");
  evaluate->add_option("--mode", mode, "nested | paper-faithful");
  evaluate->add_option("--grid", grid, "full | reduced hyperparameter grid");
  evaluate->add_option("--alpha", plan.protocol.alpha, "Selection significance level");
  evaluate->add_option("--folds", plan.protocol.n_folds, "Outer folds");
  evaluate->add_option("--repeats", plan.protocol.n_repeats, "Protocol repetitions");
  evaluate->add_option("--threads", plan.protocol.threads, "Worker threads");
  evaluate->add_flag("--no-merged", "Skip the merged-tasks matrix");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      return cmd_synth(synth_out, synth_seed, n_per_group, synth_tasks, effects, noise, strokes);
    }
    if (extract->parsed()) {
      return cmd_extract(data_root, extract_out, device_scale, extract_tasks, feature_config,
                         threads);
    }
    if (rank->parsed()) {
      try {
        return cmd_rank(matrix_dir, rank_task, alpha, rank_out, top);
      } catch (const pdhw::Error& e) {
        if (e.code() == pdhw::Err::NoSignificantFeatures) {
          std::cerr << "no statistically significant features (the '-' case): " << e.what()
                    << "\n";
          return kExitNoFeatures;
        }
        throw;
      }
    }
    if (evaluate->parsed()) {
      plan.tasks = eval_tasks.empty() ? std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8}
                                      : parse_task_list(eval_tasks);
      plan.include_merged = evaluate->count("--no-merged") == 0;
      if (classifier == "all") {
        plan.classifiers = {pdhw::ClassifierKind::Svm, pdhw::ClassifierKind::AdaBoost,
                            pdhw::ClassifierKind::Knn};
      } else if (classifier == "svm") {
        plan.classifiers = {pdhw::ClassifierKind::Svm};
      } else if (classifier == "adaboost") {
        plan.classifiers = {pdhw::ClassifierKind::AdaBoost};
      } else if (classifier == "knn") {
        plan.classifiers = {pdhw::ClassifierKind::Knn};
      } else {
        std::cerr << "unknown classifier '" << classifier << "'\n";
        return kExitIngest;
      }
      if (features == "kinematic") plan.feature_set = pdhw::FeatureSet::Kinematic;
      else if (features == "pressure") plan.feature_set = pdhw::FeatureSet::Pressure;
      else if (features == "both") plan.feature_set = pdhw::FeatureSet::Both;
      else {
        std::cerr << "unknown feature set '" << features << "'\n";
        return kExitIngest;
      }
      plan.protocol.mode =
          mode == "paper-faithful" ? pdhw::EvalMode::PaperFaithful : pdhw::EvalMode::Nested;
      plan.protocol.grid = grid == "reduced" ? pdhw::SvmGrid::reduced() : pdhw::SvmGrid::full();
      return cmd_evaluate(eval_matrix_dir, eval_out, plan);
    }
  } catch (const pdhw::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIngest;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIngest;
  }
  return kExitOk;
}
