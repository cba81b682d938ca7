#pragma once

// Model-based difficulty: split the training set into M subsets, train one
// submodel per subset, measure each submodel's correct rates on its own
// subset, then score every sample with the M-1 submodels that never saw it.

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "vcl/corpus.hpp"
#include "vcl/difficulty_score.hpp"
#include "vcl/model.hpp"

namespace vcl {

struct SubmodelStats {
  std::size_t subset_index = 0;
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

  std::size_t total() const noexcept { return tp + tn + fp + fn; }
  /// TP / (TP + FP); empty when nothing was predicted vulnerable.
  std::optional<double> pos_rate() const {
    return tp + fp ? std::optional<double>(double(tp) / double(tp + fp)) : std::nullopt;
  }
  /// TN / (TN + FN); empty when nothing was predicted normal.
  std::optional<double> neg_rate() const {
    return tn + fn ? std::optional<double>(double(tn) / double(tn + fn)) : std::nullopt;
  }

  bool operator==(const SubmodelStats&) const = default;
};

/// Confusion counts of `predictions` against the labels of `data`.
SubmodelStats confusion_stats(std::span<const Prediction> predictions, const Dataset& data,
                              std::size_t subset_index = 0);

struct Submodel {
  std::unique_ptr<Classifier> model;
  Dataset subset;
  SubmodelStats stats;
};

struct DifficultyOptions {
  std::optional<std::size_t> m;  // required for Strategy::Model
  ClassifierSpec spec;
  std::uint64_t seed = 0;  // partition seed; submodel i uses derive_seed(spec.seed, i)
  std::size_t max_epochs = 10;
  ConvergencePolicy policy;
  bool stratify = true;
  std::size_t jobs = 1;
};

/// Trains submodel i on subset i only and tests it on that same subset.
/// Throws DataError when a subset holds a single class.
std::vector<Submodel> train_submodels(const Dataset& train, const DifficultyOptions& options);

/// Difficulty of a sample owned by subset `owner` from per-submodel correct
/// rates and predicted probabilities (entries at `owner` are ignored):
///   label 1: -sum_{i != owner} pos_rate_i * (p_i - 0.5)
///   label 0: -sum_{i != owner} neg_rate_i * (0.5 - p_i)
template <typename DerivedR, typename DerivedP>
double difficulty_score(int label, Eigen::Index owner, const Eigen::ArrayBase<DerivedR>& rates,
                        const Eigen::ArrayBase<DerivedP>& probabilities) {
  Eigen::ArrayXd others = Eigen::ArrayXd::Ones(probabilities.size());
  others[owner] = 0.0;
  const Eigen::ArrayXd confidence =
      label == 1 ? (probabilities - 0.5).eval() : (0.5 - probabilities).eval();
  return -(others * rates * confidence).sum();
}

/// Correct rate the formula uses for a submodel: pos_rate for label 1,
/// neg_rate for label 0, and 0 when that rate is undefined.
double effective_rate(const SubmodelStats& stats, int label);

DifficultyScore model_difficulty(const FunctionSample& sample, std::size_t owner,
                                 std::span<const Submodel> submodels);

/// Sorts by (value ascending, sample id ascending).
void sort_scores(std::vector<DifficultyScore>& scores);

/// One score per training sample, sorted by sort_scores. When `stats_out` is
/// given and the strategy is Model it receives the submodel statistics.
std::vector<DifficultyScore> score_dataset(const Dataset& train, Strategy strategy,
                                           const DifficultyOptions& options,
                                           std::vector<SubmodelStats>* stats_out = nullptr);

}  // namespace vcl
