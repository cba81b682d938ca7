#pragma once

// Run configuration, single runs, manifest replay, the sweep grid and report
// tables.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vcl/curriculum.hpp"

namespace vcl {

struct RunConfig {
  std::string dataset;              // JSONL path
  std::string mode = "curriculum";  // or "baseline"
  Strategy strategy = Strategy::Model;
  std::optional<std::size_t> m = 3;
  std::size_t n = 5;
  bool augment = true;
  ClassifierSpec classifier;  // seed is replaced by the derived model seed
  std::uint64_t seed = 0;
  std::array<std::uint32_t, 3> split{8, 1, 1};
  bool stratify = true;
  std::size_t max_epochs = 10;
  std::size_t fine_tune_epochs = 2;
  bool include_originals = false;
  bool r1_reverse = false;
  double epsilon = 1e-4;
  std::filesystem::path output_dir = "runs";  // not part of the config hash
  std::size_t jobs = 1;                       // not part of the config hash
};

/// Throws ConfigError when the combination is invalid: the code strategy
/// forbids M, the model strategy requires M >= 2, N >= 2, and so on.
void validate(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);
/// Missing keys keep their defaults. Throws ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);

/// Hex FNV-1a hash of the canonical config JSON, excluding output_dir/jobs.
std::string config_hash(const RunConfig& config);
std::filesystem::path run_directory(const RunConfig& config);

struct DerivedSeeds {
  std::uint64_t split, partition, model;
};
DerivedSeeds derive_seeds(std::uint64_t seed);

/// FNV-1a over ids, labels and code, in order.
std::string dataset_fingerprint(const Dataset& d);

struct ExperimentResult {
  RunResult run;
  std::vector<DifficultyScore> scores;  // empty for baseline runs
  std::optional<CurriculumPlan> plan;
};

/// Scores keyed by (strategy, M) shared between runs that differ only in N
/// or augmentation.
struct ScoreCacheEntry {
  std::vector<DifficultyScore> scores;
  std::vector<SubmodelStats> submodels;
};
using ScoreCache = std::map<std::string, ScoreCacheEntry>;
std::string score_cache_key(const RunConfig& config);

/// Splits `data`, scores and plans (curriculum mode), trains and evaluates
/// on the test split. The manifest records the config, derived seeds and the
/// dataset fingerprint.
ExperimentResult run_experiment(const RunConfig& config, const Dataset& data,
                                const ScoreCache* cache = nullptr);

/// Writes manifest.json, scores.jsonl, plan.json and (when supported)
/// model.json into `dir`.
void write_run(const std::filesystem::path& dir, const ExperimentResult& result);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

struct ReplayResult {
  RunManifest original;
  RunManifest replayed;
  bool identical = false;  // test metrics, valid metrics and stages match byte for byte
};

/// Re-runs the recorded configuration, checking the dataset fingerprint.
ReplayResult replay(const RunManifest& manifest, std::size_t jobs = 1);

// ---------------------------------------------------------------------------
// Sweep

struct SweepGrid {
  std::vector<std::size_t> ms{3, 5, 10};
  std::vector<std::size_t> ns{3, 5, 10};
  std::vector<bool> augment{false, true};
  bool model = true;
  bool code = true;
};

struct SweepCell {
  Strategy strategy;
  std::optional<std::size_t> m;
  std::size_t n;
  bool augment;
};

/// Model-strategy cells (M x N x augment) followed by code-strategy cells
/// (N x augment). The baseline is not a cell.
std::vector<SweepCell> sweep_cells(const SweepGrid& grid);

RunConfig cell_config(const RunConfig& base, const SweepCell& cell);

struct CellOutcome {
  RunConfig config;
  std::optional<RunManifest> manifest;
  std::string error;
  std::filesystem::path run_dir;
};

struct SweepReport {
  CellOutcome baseline;
  std::vector<CellOutcome> cells;
};

/// Runs the baseline and every cell; a failing cell is recorded and the rest
/// continue. When `write` is set each run lands in its run directory.
SweepReport run_sweep(const RunConfig& base, const SweepGrid& grid, const Dataset& data,
                      std::size_t jobs, bool write = true);

nlohmann::json to_json(const SweepReport& report);

/// Accuracy/Recall/Precision/F1 per cell in grid layout.
std::string sweep_table(const SweepReport& report);

// ---------------------------------------------------------------------------
// Reports

struct ReportRow {
  std::string run;
  std::string mode;
  std::string strategy;  // "-" for baseline
  std::string m, n;      // "-" when absent
  bool augment = false;
  MetricsReport metrics;
  std::optional<std::array<double, 4>> delta;  // accuracy, recall, precision, f1 vs baseline
};

/// One row per manifest carrying test metrics; deltas are taken against the
/// first baseline manifest, if any. Throws DataError when a manifest lacks
/// test metrics.
std::vector<ReportRow> report_rows(const std::vector<std::pair<std::string, RunManifest>>& runs);

std::string report_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> parse_report_csv(const std::string& csv);
std::string report_text(const std::vector<ReportRow>& rows,
                        const std::vector<std::pair<std::string, RunManifest>>& runs);

}  // namespace vcl
