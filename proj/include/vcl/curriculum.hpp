#pragma once

// Easy-to-hard staged training. Samples are sorted by difficulty and cut into
// N buckets; stage k trains the same classifier on buckets 1..k, then
// fine-tunes it on rewritten variants of the samples it still gets wrong.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vcl/augment.hpp"
#include "vcl/corpus.hpp"
#include "vcl/difficulty.hpp"
#include "vcl/model.hpp"

namespace vcl {

struct BucketStats {
  std::size_t size = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;

  bool operator==(const BucketStats&) const = default;
};

struct CurriculumPlan {
  std::vector<std::vector<std::string>> buckets;  // easiest first
  std::vector<BucketStats> stats;
  Strategy strategy = Strategy::Code;
  std::optional<std::size_t> m;
};

/// Sorts by (DS, id) and slices into n contiguous buckets; the first
/// (size % n) buckets hold one extra sample. Throws ConfigError when n < 2
/// or there are fewer scores than buckets.
CurriculumPlan plan(std::vector<DifficultyScore> scores, std::size_t n);

struct MetricsReport {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  double accuracy = 0.0, recall = 0.0, precision = 0.0, f1 = 0.0;
  // false when the ratio had a zero denominator and was reported as 0
  bool recall_defined = true, precision_defined = true, f1_defined = true;

  std::size_t total() const noexcept { return tp + tn + fp + fn; }
  bool operator==(const MetricsReport&) const = default;
};

MetricsReport metrics_from_counts(std::size_t tp, std::size_t tn, std::size_t fp,
                                  std::size_t fn);

/// Throws DataError on an empty test set.
MetricsReport evaluate(const Classifier& classifier, const Dataset& test);

/// Mean log loss of the classifier's probabilities (clamped away from 0/1).
double log_loss(const Classifier& classifier, const Dataset& data);

struct StageRecord {
  std::size_t stage = 0;  // 1-based
  std::vector<std::string> train_ids;
  TrainReport train;
  std::vector<std::string> mispredicted;
  std::size_t error_book_size = 0;
  std::size_t skipped_unparseable = 0;
  TrainReport fine_tune;
  std::optional<double> valid_loss;  // recorded for inspection, never used for stopping

  bool operator==(const StageRecord&) const = default;
};

struct TrainingOptions {
  std::size_t max_epochs = 10;
  ConvergencePolicy policy;
  bool augment = false;
  std::size_t fine_tune_epochs = 2;
  bool include_originals = false;  // error book also holds the mispredicted samples
  RuleOptions rules;
  std::size_t jobs = 1;
};

struct RunManifest {
  std::string mode;  // "curriculum" or "baseline"
  ClassifierSpec spec;
  std::optional<Strategy> strategy;
  std::optional<std::size_t> m;
  std::optional<std::size_t> n;
  bool augment = false;
  std::size_t max_epochs = 10;
  std::size_t fine_tune_epochs = 0;
  bool include_originals = false;
  bool r1_reverse = false;
  double epsilon = 1e-4;
  std::vector<BucketStats> buckets;
  std::vector<SubmodelStats> submodels;
  std::vector<StageRecord> stages;
  std::optional<MetricsReport> valid_metrics;
  std::optional<MetricsReport> test_metrics;
  nlohmann::json config;  // run configuration that produced this manifest
};

nlohmann::json to_json(const MetricsReport& m);
MetricsReport metrics_report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunManifest& manifest);
/// Throws DataError on malformed documents.
RunManifest run_manifest_from_json(const nlohmann::json& j);

struct RunResult {
  std::unique_ptr<Classifier> classifier;
  RunManifest manifest;
};

/// Throws DataError when the plan does not cover exactly the training ids
/// or the training set holds a single class.
RunResult run_curriculum(const CurriculumPlan& plan, const Dataset& train, const Dataset& valid,
                         const ClassifierSpec& spec, const TrainingOptions& options);

/// One stage over the whole training set in a seeded random order.
RunResult run_baseline(const Dataset& train, const Dataset& valid, const ClassifierSpec& spec,
                       const TrainingOptions& options);

}  // namespace vcl
