#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pdhw {

// One repetition of a stratified k-fold split. Folds partition the index set
// exactly; per-class fold counts differ from perfect proportionality by at
// most 1, and fold sizes by at most 1 overall.
struct FoldPlan {
  int repeat_index = 0;
  std::vector<std::vector<size_t>> folds;
  uint64_t seed = 0;  // the repeat-derived shuffle seed
};

// Stratified folds for binary labels (0/1). Per repeat, each class's members
// are shuffled with a repeat-derived seed and dealt into folds; the extra
// members of each class go to the currently smallest folds, which keeps fold
// sizes balanced. Throws ClassTooSmall when a class has fewer members than
// n_folds.
std::vector<FoldPlan> make_fold_plans(std::span<const int> labels, int n_folds, int n_repeats,
                                      uint64_t seed);

// Single-repeat convenience used by nested hyperparameter selection.
std::vector<std::vector<size_t>> stratified_fold_indices(std::span<const int> labels, int n_folds,
                                                         uint64_t seed);

}  // namespace pdhw
