#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "pdhw/adaboost.hpp"
#include "pdhw/folds.hpp"
#include "pdhw/knn.hpp"
#include "pdhw/stats.hpp"
#include "pdhw/svm.hpp"

namespace pdhw {

enum class ClassifierKind { Svm, AdaBoost, Knn };
const char* to_string(ClassifierKind kind);

// Nested re-fits normalization, feature selection, and (for the SVM) the
// hyperparameter search inside every training fold. PaperFaithful fits all
// three once on the full matrix before cross-validating, reproducing the
// common single-pass protocol.
enum class EvalMode { Nested, PaperFaithful };
const char* to_string(EvalMode mode);

struct ProtocolConfig {
  EvalMode mode = EvalMode::Nested;
  SvmGrid grid = SvmGrid::full();
  double alpha = 0.05;
  int inner_folds = 3;
  int n_folds = 10;
  int n_repeats = 10;
  uint64_t seed = 1;
  unsigned threads = 1;
  AdaBoostConfig adaboost;
  int knn_k = 3;

  std::string digest() const;  // hex of a canonical parameter string
};

struct FoldOutcome {
  int repeat = 0;
  int fold = 0;
  int tp = 0, tn = 0, fp = 0, fn = 0;  // PD is the positive class
  uint64_t normalizer_digest = 0;
  uint64_t selection_digest = 0;
  int n_selected = 0;
  bool selection_fallback = false;  // fold filter kept nothing; all columns used
  int c_exponent = 0, gamma_exponent = 0;  // SVM only
};

struct ProtocolResult {
  double accuracy = 0.0;     // macro average over the repeat*fold evaluations
  double sensitivity = 0.0;  // TP / (TP + FN), PD positive
  double specificity = 0.0;  // TN / (TN + FP)
  long tp = 0, tn = 0, fp = 0, fn = 0;  // pooled over all folds
  double pooled_accuracy = 0.0;
  std::vector<FoldOutcome> folds;  // ordered by (repeat, fold)
};

// Full repeated stratified cross-validation of one classifier over a raw
// (unnormalized) feature matrix. Per training fold: normalizer fit, U-test /
// rho selection, hyperparameter tuning (SVM, nested mode), training, and
// held-out prediction. Requires >= 20 rows.
ProtocolResult run_protocol(const FeatureMatrix& m, ClassifierKind kind,
                            const std::vector<FoldPlan>& plans, const ProtocolConfig& config);

struct ComboResult {
  int task_id = 0;  // 0 = merged tasks
  FeatureSet feature_set = FeatureSet::Both;
  ClassifierKind classifier = ClassifierKind::Svm;
  bool skipped = false;         // no significant features for this combination
  std::string skip_reason;
  ProtocolResult result;
};

struct EvalReport {
  uint64_t seed = 0;
  std::string config_digest;
  std::vector<ComboResult> combos;
};

nlohmann::json report_to_json(const EvalReport& report);

struct RenderedReport {
  std::string task_table_csv;        // tasks x feature sets, SVM accuracy, "-" cells
  std::string classifier_table_csv;  // classifier x (accuracy, specificity, sensitivity)
};

RenderedReport compare_report(const EvalReport& report);

const char* to_string(FeatureSet set);

}  // namespace pdhw
