#include "vcl/experiment.hpp"

#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>

namespace vcl {

using nlohmann::json;

void validate(const RunConfig& c) {
  if (c.mode != "curriculum" && c.mode != "baseline")
    throw ConfigError("mode must be 'curriculum' or 'baseline', got '" + c.mode + "'");
  if (c.max_epochs == 0) throw ConfigError("max_epochs must be at least 1");
  if (!(c.epsilon >= 0.0)) throw ConfigError("epsilon must be non-negative");
  if (c.split[0] == 0) throw ConfigError("the train share of the split must be positive");
  if (c.mode == "baseline") return;
  if (c.strategy == Strategy::Code && c.m)
    throw ConfigError("the code strategy does not take M");
  if (c.strategy == Strategy::Model && (!c.m || *c.m < 2))
    throw ConfigError("the model strategy requires M >= 2");
  if (c.n < 2) throw ConfigError("N must be at least 2");
}

json to_json(const RunConfig& c) {
  return {{"dataset", c.dataset},
          {"mode", c.mode},
          {"strategy", to_string(c.strategy)},
          {"m", c.m ? json(*c.m) : json(nullptr)},
          {"n", c.n},
          {"augment", c.augment},
          {"classifier", to_json(c.classifier)},
          {"seed", c.seed},
          {"split", c.split},
          {"stratify", c.stratify},
          {"max_epochs", c.max_epochs},
          {"fine_tune_epochs", c.fine_tune_epochs},
          {"include_originals", c.include_originals},
          {"r1_reverse", c.r1_reverse},
          {"epsilon", c.epsilon},
          {"output_dir", c.output_dir.string()},
          {"jobs", c.jobs}};
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  try {
    c.dataset = j.value("dataset", c.dataset);
    c.mode = j.value("mode", c.mode);
    if (j.contains("strategy")) c.strategy = parse_strategy(j["strategy"].get<std::string>());
    if (j.contains("m")) c.m = j["m"].is_null() ? std::nullopt : std::optional(j["m"].get<std::size_t>());
    else if (c.strategy == Strategy::Code) c.m.reset();
    c.n = j.value("n", c.n);
    c.augment = j.value("augment", c.augment);
    if (j.contains("classifier")) c.classifier = classifier_spec_from_json(j["classifier"]);
    c.seed = j.value("seed", c.seed);
    if (j.contains("split")) c.split = j["split"].get<std::array<std::uint32_t, 3>>();
    c.stratify = j.value("stratify", c.stratify);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.fine_tune_epochs = j.value("fine_tune_epochs", c.fine_tune_epochs);
    c.include_originals = j.value("include_originals", c.include_originals);
    c.r1_reverse = j.value("r1_reverse", c.r1_reverse);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.output_dir = j.value("output_dir", c.output_dir.string());
    c.jobs = j.value("jobs", c.jobs);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return c;
}

std::string config_hash(const RunConfig& config) {
  auto j = to_json(config);
  j.erase("output_dir");
  j.erase("jobs");
  return hex64(fnv1a64(j.dump()));
}

std::filesystem::path run_directory(const RunConfig& config) {
  return config.output_dir / (config.mode + "-" + config_hash(config));
}

DerivedSeeds derive_seeds(std::uint64_t seed) {
  return {derive_seed(seed, 1), derive_seed(seed, 2), derive_seed(seed, 3)};
}

std::string dataset_fingerprint(const Dataset& d) {
  std::string bytes;
  for (const auto& s : d) {
    bytes += s.id;
    bytes += '\0';
    bytes += static_cast<char>('0' + s.label);
    bytes += s.code;
    bytes += '\0';
  }
  return hex64(fnv1a64(bytes));
}

std::string score_cache_key(const RunConfig& c) {
  return std::string(to_string(c.strategy)) + ":" + (c.m ? std::to_string(*c.m) : "-");
}

namespace {

TrainingOptions training_options(const RunConfig& c) {
  TrainingOptions o;
  o.max_epochs = c.max_epochs;
  o.policy.epsilon = c.epsilon;
  o.augment = c.augment;
  o.fine_tune_epochs = c.fine_tune_epochs;
  o.include_originals = c.include_originals;
  o.rules.r1_reverse = c.r1_reverse;
  o.jobs = c.jobs;
  return o;
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& config, const Dataset& data,
                                const ScoreCache* cache) {
  validate(config);
  const auto seeds = derive_seeds(config.seed);
  const auto parts = split(data, {config.split, seeds.split, config.stratify});
  const auto spec = config.classifier.with_seed(seeds.model);
  const auto options = training_options(config);

  ExperimentResult out;
  std::vector<SubmodelStats> submodels;
  if (config.mode == "baseline") {
    out.run = run_baseline(parts.train, parts.valid, spec, options);
  } else {
    const auto cached = cache ? cache->find(score_cache_key(config)) : ScoreCache::const_iterator{};
    if (cache && cached != cache->end()) {
      out.scores = cached->second.scores;
      submodels = cached->second.submodels;
    } else {
      DifficultyOptions d;
      d.m = config.strategy == Strategy::Model ? config.m : std::nullopt;
      d.spec = spec;
      d.seed = seeds.partition;
      d.max_epochs = config.max_epochs;
      d.policy = options.policy;
      d.stratify = config.stratify;
      d.jobs = config.jobs;
      out.scores = score_dataset(parts.train, config.strategy, d, &submodels);
    }
    out.plan = plan(out.scores, config.n);
    out.run = run_curriculum(*out.plan, parts.train, parts.valid, spec, options);
    out.run.manifest.submodels = submodels;
  }
  auto& m = out.run.manifest;
  if (!parts.test.empty()) m.test_metrics = evaluate(*out.run.classifier, parts.test);
  m.config = {{"run", to_json(config)},
              {"config_hash", config_hash(config)},
              {"dataset_fingerprint", dataset_fingerprint(data)},
              {"seeds", {{"split", seeds.split}, {"partition", seeds.partition}, {"model", seeds.model}}},
              {"split_sizes", {parts.train.size(), parts.valid.size(), parts.test.size()}}};
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw Error("failed writing " + path.string());
}

void write_run(const std::filesystem::path& dir, const ExperimentResult& r) {
  std::filesystem::create_directories(dir);
  write_json_file(dir / "manifest.json", to_json(r.run.manifest));
  if (!r.scores.empty()) {
    std::ofstream out(dir / "scores.jsonl");
    for (const auto& s : r.scores)
      out << json{{"id", s.sample_id},
                  {"strategy", to_string(s.strategy)},
                  {"DS", s.value},
                  {"params", s.m ? json{{"M", *s.m}} : json::object()}}
                 .dump()
          << "\n";
  }
  if (r.plan) {
    json p{{"strategy", to_string(r.plan->strategy)}, {"buckets", r.plan->buckets}};
    write_json_file(dir / "plan.json", p);
  }
  if (r.run.classifier && r.run.classifier->supports_snapshot()) {
    const auto state = r.run.classifier->snapshot();
    std::ofstream out(dir / "model.json");
    out << state.data << "\n";
  }
}

namespace {

bool same_json(const json& a, const json& b) { return a.dump() == b.dump(); }

json stages_json(const RunManifest& m) {
  auto j = to_json(m);
  return j["stages"];
}

}  // namespace

ReplayResult replay(const RunManifest& manifest, std::size_t jobs) {
  if (!manifest.config.contains("run")) throw DataError("manifest carries no run config");
  auto config = run_config_from_json(manifest.config["run"]);
  config.jobs = jobs;
  const auto data = ingest_jsonl(config.dataset);
  const auto fingerprint = manifest.config.value("dataset_fingerprint", std::string());
  if (fingerprint != dataset_fingerprint(data))
    throw DataError("dataset " + config.dataset + " changed since the run was recorded");
  ReplayResult r;
  r.original = manifest;
  r.replayed = run_experiment(config, data).run.manifest;
  const auto metrics = [](const std::optional<MetricsReport>& m) {
    return m ? to_json(*m) : json(nullptr);
  };
  r.identical = same_json(metrics(r.original.test_metrics), metrics(r.replayed.test_metrics)) &&
                same_json(metrics(r.original.valid_metrics), metrics(r.replayed.valid_metrics)) &&
                same_json(stages_json(r.original), stages_json(r.replayed));
  return r;
}

// ---------------------------------------------------------------------------

std::vector<SweepCell> sweep_cells(const SweepGrid& grid) {
  std::vector<SweepCell> cells;
  if (grid.model)
    for (auto m : grid.ms)
      for (auto n : grid.ns)
        for (bool a : grid.augment) cells.push_back({Strategy::Model, m, n, a});
  if (grid.code)
    for (auto n : grid.ns)
      for (bool a : grid.augment) cells.push_back({Strategy::Code, std::nullopt, n, a});
  return cells;
}

RunConfig cell_config(const RunConfig& base, const SweepCell& cell) {
  auto c = base;
  c.mode = "curriculum";
  c.strategy = cell.strategy;
  c.m = cell.m;
  c.n = cell.n;
  c.augment = cell.augment;
  return c;
}

SweepReport run_sweep(const RunConfig& base, const SweepGrid& grid, const Dataset& data,
                      std::size_t jobs, bool write) {
  const auto cells = sweep_cells(grid);
  if (cells.empty()) throw ConfigError("the sweep grid has no cells");
  SweepReport report;
  std::vector<CellOutcome> outcomes;
  {
    auto b = base;
    b.mode = "baseline";
    b.augment = false;
    outcomes.push_back({b, std::nullopt, {}, {}});
  }
  for (const auto& cell : cells) outcomes.push_back({cell_config(base, cell), std::nullopt, {}, {}});
  for (auto& o : outcomes) {
    o.config.jobs = 1;
    o.run_dir = run_directory(o.config);
  }

  // Difficulty scores only depend on (strategy, M); compute each once.
  std::vector<RunConfig> score_configs;
  for (const auto& o : outcomes) {
    if (o.config.mode == "baseline") continue;
    const auto key = score_cache_key(o.config);
    bool known = false;
    for (const auto& c : score_configs) known = known || score_cache_key(c) == key;
    if (!known) score_configs.push_back(o.config);
  }
  ScoreCache cache;
  std::map<std::string, std::string> score_errors;
  std::mutex mu;
  parallel_for(score_configs.size(), jobs, [&](std::size_t i) {
    const auto& c = score_configs[i];
    try {
      validate(c);
      const auto seeds = derive_seeds(c.seed);
      const auto parts = split(data, {c.split, seeds.split, c.stratify});
      DifficultyOptions d;
      d.m = c.strategy == Strategy::Model ? c.m : std::nullopt;
      d.spec = c.classifier.with_seed(seeds.model);
      d.seed = seeds.partition;
      d.max_epochs = c.max_epochs;
      d.policy.epsilon = c.epsilon;
      d.stratify = c.stratify;
      ScoreCacheEntry e;
      e.scores = score_dataset(parts.train, c.strategy, d, &e.submodels);
      std::lock_guard lock(mu);
      cache[score_cache_key(c)] = std::move(e);
    } catch (const std::exception& e) {
      std::lock_guard lock(mu);
      score_errors[score_cache_key(c)] = e.what();
    }
  });

  parallel_for(outcomes.size(), jobs, [&](std::size_t i) {
    auto& o = outcomes[i];
    try {
      if (o.config.mode != "baseline") {
        auto err = score_errors.find(score_cache_key(o.config));
        if (err != score_errors.end()) throw Error(err->second);
      }
      auto result = run_experiment(o.config, data, &cache);
      if (write) write_run(o.run_dir, result);
      o.manifest = std::move(result.run.manifest);
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  });
  report.baseline = std::move(outcomes.front());
  report.cells.assign(std::make_move_iterator(outcomes.begin() + 1),
                      std::make_move_iterator(outcomes.end()));
  return report;
}

namespace {

json outcome_json(const CellOutcome& o) {
  json j{{"config", to_json(o.config)}, {"run_dir", o.run_dir.string()}};
  if (o.manifest && o.manifest->test_metrics) j["metrics"] = to_json(*o.manifest->test_metrics);
  if (!o.error.empty()) j["error"] = o.error;
  return j;
}

std::string fixed3(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << v;
  return s.str();
}

std::string metric_cells(const CellOutcome& o) {
  if (!o.manifest || !o.manifest->test_metrics) return "  failed: " + o.error;
  const auto& m = *o.manifest->test_metrics;
  return "  " + fixed3(m.accuracy) + "  " + fixed3(m.recall) + "  " + fixed3(m.precision) +
         "  " + fixed3(m.f1);
}

}  // namespace

json to_json(const SweepReport& r) {
  json j{{"baseline", outcome_json(r.baseline)}, {"cells", json::array()}};
  for (const auto& c : r.cells) j["cells"].push_back(outcome_json(c));
  return j;
}

std::string sweep_table(const SweepReport& r) {
  std::ostringstream out;
  out << "DC          M    N   aug    Acc    Rec    Pre    F1\n";
  out << "baseline    -    -   -   " << metric_cells(r.baseline) << "\n";
  for (const auto& c : r.cells) {
    const auto& k = c.config;
    out << std::left << std::setw(10) << (k.strategy == Strategy::Model ? "model" : "code")
        << std::right << std::setw(3) << (k.m ? std::to_string(*k.m) : "-") << std::setw(5)
        << k.n << std::setw(5) << (k.augment ? "on" : "off") << " " << metric_cells(c) << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------

std::vector<ReportRow> report_rows(const std::vector<std::pair<std::string, RunManifest>>& runs) {
  if (runs.empty()) throw DataError("report needs at least one manifest");
  const RunManifest* baseline = nullptr;
  for (const auto& [name, m] : runs)
    if (m.mode == "baseline") {
      baseline = &m;
      break;
    }
  if (baseline && !baseline->test_metrics) throw DataError("baseline manifest lacks test metrics");
  std::vector<ReportRow> rows;
  for (const auto& [name, m] : runs) {
    if (!m.test_metrics) throw DataError("manifest '" + name + "' lacks test metrics");
    ReportRow r;
    r.run = name;
    r.mode = m.mode;
    r.strategy = m.strategy ? std::string(to_string(*m.strategy)) : "-";
    r.m = m.m ? std::to_string(*m.m) : "-";
    r.n = m.n ? std::to_string(*m.n) : "-";
    r.augment = m.augment;
    r.metrics = *m.test_metrics;
    if (baseline) {
      const auto& b = *baseline->test_metrics;
      r.delta = std::array<double, 4>{r.metrics.accuracy - b.accuracy, r.metrics.recall - b.recall,
                                      r.metrics.precision - b.precision, r.metrics.f1 - b.f1};
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    any = true;
    if (c == '"') quoted = true;
    else if (c == ',') row.push_back(std::exchange(field, {}));
    else if (c == '\n') {
      row.push_back(std::exchange(field, {}));
      rows.push_back(std::exchange(row, {}));
      any = false;
    } else if (c != '\r') field += c;
  }
  if (quoted) throw DataError("unterminated quoted CSV field");
  if (any) {
    row.push_back(field);
    rows.push_back(row);
  }
  return rows;
}

constexpr const char* kCsvHeader =
    "run,mode,strategy,m,n,augment,tp,tn,fp,fn,accuracy,recall,precision,f1,"
    "delta_accuracy,delta_recall,delta_precision,delta_f1";

}  // namespace

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    out += csv_field(r.run) + "," + r.mode + "," + r.strategy + "," + r.m + "," + r.n + "," +
           (r.augment ? "1" : "0") + "," + std::to_string(m.tp) + "," + std::to_string(m.tn) +
           "," + std::to_string(m.fp) + "," + std::to_string(m.fn) + "," +
           format_double(m.accuracy) + "," + format_double(m.recall) + "," +
           format_double(m.precision) + "," + format_double(m.f1);
    for (std::size_t i = 0; i < 4; ++i) out += "," + (r.delta ? format_double((*r.delta)[i]) : "");
    out += "\n";
  }
  return out;
}

std::vector<ReportRow> parse_report_csv(const std::string& csv) {
  const auto table = parse_csv(csv);
  if (table.empty()) throw DataError("empty report CSV");
  std::vector<ReportRow> rows;
  try {
    for (std::size_t i = 1; i < table.size(); ++i) {
      const auto& f = table[i];
      if (f.size() != 18) throw DataError("report CSV row " + std::to_string(i) + " has " +
                                          std::to_string(f.size()) + " fields");
      ReportRow r;
      r.run = f[0];
      r.mode = f[1];
      r.strategy = f[2];
      r.m = f[3];
      r.n = f[4];
      r.augment = f[5] == "1";
      r.metrics = metrics_from_counts(std::stoul(f[6]), std::stoul(f[7]), std::stoul(f[8]),
                                      std::stoul(f[9]));
      r.metrics.accuracy = std::stod(f[10]);
      r.metrics.recall = std::stod(f[11]);
      r.metrics.precision = std::stod(f[12]);
      r.metrics.f1 = std::stod(f[13]);
      if (!f[14].empty())
        r.delta = std::array<double, 4>{std::stod(f[14]), std::stod(f[15]), std::stod(f[16]),
                                        std::stod(f[17])};
      rows.push_back(std::move(r));
    }
  } catch (const std::logic_error& e) {
    throw DataError(std::string("malformed number in report CSV: ") + e.what());
  }
  return rows;
}

std::string report_text(const std::vector<ReportRow>& rows,
                        const std::vector<std::pair<std::string, RunManifest>>& runs) {
  std::ostringstream out;
  out << "run                                     mode        DC     M   N  aug    Acc    Rec    "
         "Pre     F1    dAcc   dRec   dPre    dF1\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(40) << r.run << std::setw(12) << r.mode << std::setw(6)
        << r.strategy << std::right << std::setw(3) << r.m << std::setw(4) << r.n << std::setw(5)
        << (r.augment ? "on" : "off");
    for (double v : {r.metrics.accuracy, r.metrics.recall, r.metrics.precision, r.metrics.f1})
      out << "  " << fixed3(v);
    if (r.delta)
      for (double v : *r.delta) out << "  " << (v >= 0 ? "+" : "") << fixed3(v);
    out << "\n";
  }
  out << "\nbucket difficulty (mean DS per bucket, easiest first)\n";
  for (const auto& [name, m] : runs) {
    if (m.buckets.empty()) continue;
    out << name << ":";
    for (const auto& b : m.buckets) out << " " << fixed3(b.mean) << "(" << b.size << ")";
    out << "\n";
  }
  return out.str();
}

}  // namespace vcl
