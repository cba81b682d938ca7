#include "vcl/difficulty.hpp"

#include <algorithm>

#include "vcl/metrics.hpp"

namespace vcl {

SubmodelStats confusion_stats(std::span<const Prediction> predictions, const Dataset& data,
                              std::size_t subset_index) {
  if (predictions.size() != data.size())
    throw std::invalid_argument("confusion_stats: prediction count does not match data");
  SubmodelStats s;
  s.subset_index = subset_index;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int predicted = predictions[i].label();
    const int actual = data[i].label;
    if (predicted == 1 && actual == 1) ++s.tp;
    else if (predicted == 0 && actual == 0) ++s.tn;
    else if (predicted == 1) ++s.fp;
    else ++s.fn;
  }
  return s;
}

std::vector<Submodel> train_submodels(const Dataset& train, const DifficultyOptions& options) {
  if (!options.m) throw ConfigError("model-based difficulty requires M");
  const std::size_t m = *options.m;
  auto subsets = partition_uniform(train, m, options.seed, options.stratify);
  for (std::size_t i = 0; i < m; ++i)
    if (!subsets[i].has_both_labels())
      throw DataError("subset " + std::to_string(i) + " of " + std::to_string(m) +
                      " contains a single class; cannot train a submodel on it");

  std::vector<Submodel> out(m);
  parallel_for(m, options.jobs, [&](std::size_t i) {
    auto model = new_classifier(options.spec.with_seed(derive_seed(options.spec.seed, i)));
    model->train(subsets[i], options.max_epochs, options.policy);
    const auto predictions = model->predict_all(subsets[i]);
    out[i].stats = confusion_stats(predictions, subsets[i], i);
    out[i].model = std::move(model);
    out[i].subset = std::move(subsets[i]);
  });
  return out;
}

double effective_rate(const SubmodelStats& stats, int label) {
  const auto rate = label == 1 ? stats.pos_rate() : stats.neg_rate();
  return rate.value_or(0.0);
}

DifficultyScore model_difficulty(const FunctionSample& sample, std::size_t owner,
                                 std::span<const Submodel> submodels) {
  const auto m = static_cast<Eigen::Index>(submodels.size());
  if (owner >= submodels.size()) throw std::out_of_range("model_difficulty: owner out of range");
  Eigen::ArrayXd rates(m), probabilities(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& sub = submodels[static_cast<std::size_t>(i)];
    rates[i] = effective_rate(sub.stats, sample.label);
    probabilities[i] = static_cast<std::size_t>(i) == owner ? 0.5 : sub.model->predict(sample).p;
  }
  return {sample.id, difficulty_score(sample.label, static_cast<Eigen::Index>(owner), rates,
                                      probabilities),
          Strategy::Model, submodels.size()};
}

void sort_scores(std::vector<DifficultyScore>& scores) {
  std::stable_sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.sample_id < b.sample_id;
  });
}

std::vector<DifficultyScore> score_dataset(const Dataset& train, Strategy strategy,
                                           const DifficultyOptions& options,
                                           std::vector<SubmodelStats>* stats_out) {
  std::vector<DifficultyScore> scores;
  if (strategy == Strategy::Code) {
    if (options.m) throw ConfigError("the code strategy does not take M");
    scores.resize(train.size());
    parallel_for(train.size(), options.jobs,
                 [&](std::size_t i) { scores[i] = code_difficulty(train[i]); });
  } else {
    const auto submodels = train_submodels(train, options);
    if (stats_out) {
      stats_out->clear();
      for (const auto& s : submodels) stats_out->push_back(s.stats);
    }
    for (std::size_t j = 0; j < submodels.size(); ++j) {
      const auto& subset = submodels[j].subset;
      const std::size_t base = scores.size();
      scores.resize(base + subset.size());
      parallel_for(subset.size(), options.jobs, [&](std::size_t k) {
        scores[base + k] = model_difficulty(subset[k], j, submodels);
      });
    }
  }
  sort_scores(scores);
  return scores;
}

}  // namespace vcl
