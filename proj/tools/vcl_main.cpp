// vcl: command-line front end.
//
// Exit codes: 0 success, 1 check-equivalence found a divergence or a replay
// did not reproduce, 2 configuration error, 3 data error, 4 runtime failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vcl/augment.hpp"
#include "vcl/experiment.hpp"
#include "vcl/metrics.hpp"
#include "vcl/minieval.hpp"
#include "vcl/synth.hpp"

namespace {

using nlohmann::json;
using namespace vcl;

constexpr int kConfigExit = 2;
constexpr int kDataExit = 3;
constexpr int kRuntimeExit = 4;

// Writes to `path`, or stdout when it is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw Error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::size_t> parse_list(const std::string& text, const char* what) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const auto v = std::stoul(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw ConfigError(std::string("bad ") + what + " list '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError(std::string("empty ") + what + " list");
  return out;
}

// Options shared by train, sweep and score. Flags given on the command line
// override values from --config, which override the defaults.
struct RunFlags {
  std::string config_file;
  std::string data;
  std::string strategy;
  std::size_t m = 0;
  std::size_t n = 0;
  bool augment = false;
  bool no_augment = false;
  bool baseline = false;
  std::uint64_t seed = 0;
  std::size_t max_epochs = 0;
  std::size_t fine_tune_epochs = 0;
  bool include_originals = false;
  bool r1_reverse = false;
  bool no_stratify = false;
  double epsilon = 0;
  std::string classifier;
  std::string external_command;
  std::size_t feature_dim = 0;
  double learning_rate = 0;
  double fine_tune_learning_rate = 0;
  double l2 = 0;
  std::string out_dir;
  std::size_t jobs = 0;

  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app, bool with_run_shape = true) {
    opts["config"] = app->add_option("--config", config_file, "JSON run configuration");
    opts["data"] = app->add_option("--data", data, "dataset JSONL");
    if (with_run_shape) {
      opts["strategy"] = app->add_option("--strategy", strategy, "difficulty strategy: code|model");
      opts["m"] = app->add_option("--m", m, "number of submodels (model strategy)");
      opts["buckets"] = app->add_option("--buckets", n, "number of curriculum buckets N");
      opts["augment"] = app->add_flag("--augment", augment, "fine-tune on the error book");
      opts["no-augment"] = app->add_flag("--no-augment", no_augment, "disable the error book");
      opts["baseline"] = app->add_flag("--baseline", baseline, "random-order single-stage run");
    }
    opts["seed"] = app->add_option("--seed", seed, "master seed (falls back to $HUMER_SEED)");
    opts["max-epochs"] = app->add_option("--max-epochs", max_epochs, "epoch cap per stage");
    opts["fine-tune-epochs"] =
        app->add_option("--fine-tune-epochs", fine_tune_epochs, "error-book epochs");
    opts["include-originals"] = app->add_flag(
        "--include-originals", include_originals, "error book also holds mispredicted samples");
    opts["r1-reverse"] = app->add_flag("--r1-reverse", r1_reverse, "R1 negates the condition");
    opts["no-stratify"] = app->add_flag("--no-stratify", no_stratify, "plain random splits");
    opts["epsilon"] = app->add_option("--epsilon", epsilon, "convergence threshold");
    opts["classifier"] = app->add_option("--classifier", classifier, "reference|external");
    opts["external-command"] =
        app->add_option("--external-command", external_command, "external model command line");
    opts["feature-dim"] = app->add_option("--feature-dim", feature_dim, "hashed feature count");
    opts["learning-rate"] = app->add_option("--learning-rate", learning_rate, "SGD step size");
    opts["fine-tune-learning-rate"] = app->add_option(
        "--fine-tune-learning-rate", fine_tune_learning_rate, "SGD step size for the error book");
    opts["l2"] = app->add_option("--l2", l2, "L2 penalty");
    opts["out-dir"] = app->add_option("--out-dir", out_dir, "directory for run artifacts");
    opts["jobs"] = app->add_option("--jobs", jobs, "worker threads");
  }

  bool given(const std::string& name) const {
    const auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }

  RunConfig config() const {
    RunConfig c;
    bool config_seed = false;
    if (given("config")) {
      std::ifstream in(config_file);
      if (!in) throw ConfigError("cannot open config " + config_file);
      try {
        const auto j = json::parse(in);
        c = run_config_from_json(j);
        config_seed = j.contains("seed");
      } catch (const json::parse_error& e) {
        throw ConfigError(config_file + ": " + e.what());
      }
    }
    // HUMER_SEED only fills in when neither the flags nor the config set a seed
    if (!given("seed") && !config_seed)
      if (const char* env = std::getenv("HUMER_SEED")) c.seed = seed_from_env(env);
    if (given("data")) c.dataset = data;
    if (given("strategy")) {
      c.strategy = parse_strategy(strategy);
      if (c.strategy == Strategy::Code && !given("m")) c.m.reset();
    }
    if (given("m")) c.m = m;
    if (given("buckets")) c.n = n;
    if (given("augment")) c.augment = true;
    if (given("no-augment")) c.augment = false;
    if (given("baseline")) {
      c.mode = "baseline";
      c.augment = false;
    }
    if (given("seed")) c.seed = seed;
    if (given("max-epochs")) c.max_epochs = max_epochs;
    if (given("fine-tune-epochs")) c.fine_tune_epochs = fine_tune_epochs;
    if (given("include-originals")) c.include_originals = true;
    if (given("r1-reverse")) c.r1_reverse = true;
    if (given("no-stratify")) c.stratify = false;
    if (given("epsilon")) c.epsilon = epsilon;
    if (given("classifier")) {
      if (classifier == "external") c.classifier.kind = ClassifierKind::External;
      else if (classifier == "reference") c.classifier.kind = ClassifierKind::Reference;
      else throw ConfigError("unknown classifier '" + classifier + "'");
    }
    if (given("external-command")) c.classifier.command = external_command;
    if (given("feature-dim")) c.classifier.feature_dim = feature_dim;
    if (given("learning-rate")) c.classifier.learning_rate = learning_rate;
    if (given("fine-tune-learning-rate"))
      c.classifier.fine_tune_learning_rate = fine_tune_learning_rate;
    if (given("l2")) c.classifier.l2 = l2;
    if (given("out-dir")) c.output_dir = out_dir;
    c.jobs = given("jobs") ? jobs : default_jobs();
    if (c.jobs == 0) throw ConfigError("--jobs must be positive");
    if (c.classifier.kind == ClassifierKind::External && c.classifier.command.empty())
      throw ConfigError("the external classifier needs --external-command");
    return c;
  }

  static std::uint64_t seed_from_env(const char* text) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(text, &used);
      if (text[used] != '\0') throw std::invalid_argument(text);
      return v;
    } catch (const std::logic_error&) {
      throw ConfigError(std::string("HUMER_SEED is not an unsigned integer: ") + text);
    }
  }
};

Dataset load_dataset(const std::string& path) {
  if (path.empty()) throw ConfigError("no dataset given (use --data or the config's \"dataset\")");
  return ingest_jsonl(path);
}

void print_metrics(const char* label, const MetricsReport& m) {
  std::cout << label << ": accuracy=" << format_double(m.accuracy)
            << " recall=" << format_double(m.recall) << " precision=" << format_double(m.precision)
            << " f1=" << format_double(m.f1) << " (tp=" << m.tp << " tn=" << m.tn
            << " fp=" << m.fp << " fn=" << m.fn << ")\n";
}

StmtTree parse_file(const std::string& path) { return parse_function(read_text(path)); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curriculum training toolkit for source-code vulnerability classifiers"};
  app.require_subcommand(1);
  int status = 0;

  // synth
  SynthSpec synth_spec;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write the planted-pattern synthetic corpus");
  synth->add_option("--size", synth_spec.size, "number of samples");
  synth->add_option("--vulnerable-fraction", synth_spec.vulnerable_fraction);
  synth->add_option("--hidden-fraction", synth_spec.hidden_fraction);
  synth->add_option("--seed", synth_spec.seed);
  synth->add_option("--out", synth_out, "output JSONL (default stdout)");
  synth->callback([&] {
    Output out(synth_out);
    write_jsonl(out.stream(), synthetic_corpus(synth_spec));
  });

  // ingest
  std::string ingest_data, ingest_split_dir;
  std::uint64_t ingest_seed = 0;
  bool ingest_no_stratify = false;
  auto* ingest = app.add_subcommand("ingest", "validate a dataset and optionally split it 8:1:1");
  ingest->add_option("--data", ingest_data, "dataset JSONL")->required();
  auto* ingest_seed_opt = ingest->add_option("--seed", ingest_seed, "split seed");
  ingest->add_option("--split-out", ingest_split_dir, "write train/valid/test JSONL here");
  ingest->add_flag("--no-stratify", ingest_no_stratify);
  ingest->callback([&] {
    const auto d = ingest_jsonl(ingest_data);
    std::cout << d.name() << ": " << d.size() << " samples, " << d.count_label(1)
              << " vulnerable, " << d.count_label(0) << " normal\n";
    if (ingest_split_dir.empty()) return;
    std::uint64_t seed = ingest_seed;
    if (!ingest_seed_opt->count())
      if (const char* env = std::getenv("HUMER_SEED")) seed = RunFlags::seed_from_env(env);
    const auto parts = split(d, {{8, 1, 1}, seed, !ingest_no_stratify});
    std::filesystem::create_directories(ingest_split_dir);
    const std::pair<const char*, const Dataset*> named[] = {
        {"train", &parts.train}, {"valid", &parts.valid}, {"test", &parts.test}};
    for (const auto& [name, part] : named) {
      const auto path = std::filesystem::path(ingest_split_dir) / (std::string(name) + ".jsonl");
      std::ofstream out(path);
      if (!out) throw DataError("cannot write " + path.string());
      write_jsonl(out, *part);
      std::cout << path.string() << ": " << part->size() << "\n";
    }
  });

  // metrics
  std::string metrics_data, metrics_out;
  auto* metrics_cmd = app.add_subcommand("metrics", "complexity metrics per function (JSONL)");
  metrics_cmd->add_option("--data", metrics_data, "dataset JSONL")->required();
  metrics_cmd->add_option("--out", metrics_out, "output JSONL (default stdout)");
  metrics_cmd->callback([&] {
    const auto d = ingest_jsonl(metrics_data);
    Output out(metrics_out);
    for (const auto& s : d) {
      ComplexityReport r;
      try {
        r = analyze(s.code);
      } catch (const ParseError& e) {
        std::cerr << "warning: skipping " << s.id << ": " << e.what() << "\n";
        continue;
      }
      out.stream() << json{{"id", s.id},
                           {"L", r.sloc},
                           {"G", r.cyclomatic},
                           {"V", r.halstead_volume},
                           {"MI", r.maintainability_index},
                           {"difficulty", r.difficulty}}
                          .dump()
                   << "\n";
    }
  });

  // score
  RunFlags score_flags;
  std::string score_out;
  auto* score = app.add_subcommand("score", "difficulty score per training sample (JSONL)");
  score_flags.add(score);
  score->add_option("--out", score_out, "output JSONL (default stdout)");
  score->callback([&] {
    const auto c = score_flags.config();
    if (c.strategy == Strategy::Model && (!c.m || *c.m < 2))
      throw ConfigError("the model strategy requires --m >= 2");
    if (c.strategy == Strategy::Code && c.m) throw ConfigError("the code strategy does not take M");
    const auto d = load_dataset(c.dataset);
    const auto seeds = derive_seeds(c.seed);
    DifficultyOptions o;
    o.m = c.m;
    o.spec = c.classifier.with_seed(seeds.model);
    o.seed = seeds.partition;
    o.max_epochs = c.max_epochs;
    o.policy.epsilon = c.epsilon;
    o.stratify = c.stratify;
    o.jobs = c.jobs;
    Output out(score_out);
    for (const auto& s : score_dataset(d, c.strategy, o))
      out.stream() << json{{"id", s.sample_id},
                           {"strategy", to_string(s.strategy)},
                           {"DS", s.value},
                           {"params", s.m ? json{{"M", *s.m}} : json::object()}}
                          .dump()
                   << "\n";
  });

  // plan
  std::string plan_scores, plan_out;
  std::size_t plan_n = 5;
  auto* plan_cmd = app.add_subcommand("plan", "cut scored samples into N buckets");
  plan_cmd->add_option("--scores", plan_scores, "JSONL from `score`")->required();
  plan_cmd->add_option("--buckets", plan_n, "number of buckets N");
  plan_cmd->add_option("--out", plan_out, "output JSON (default stdout)");
  plan_cmd->callback([&] {
    std::ifstream in(plan_scores);
    if (!in) throw DataError("cannot open " + plan_scores);
    std::vector<DifficultyScore> scores;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      try {
        const auto j = json::parse(line);
        DifficultyScore s{j.at("id").get<std::string>(), j.at("DS").get<double>(),
                          parse_strategy(j.at("strategy").get<std::string>()), std::nullopt};
        if (j.contains("params") && j["params"].contains("M"))
          s.m = j["params"]["M"].get<std::size_t>();
        scores.push_back(std::move(s));
      } catch (const std::exception& e) {
        throw DataError(plan_scores + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    const auto p = plan(scores, plan_n);
    json j{{"strategy", to_string(p.strategy)}, {"buckets", p.buckets}, {"stats", json::array()}};
    if (p.m) j["m"] = *p.m;
    for (const auto& st : p.stats)
      j["stats"].push_back({{"size", st.size}, {"mean", st.mean}, {"min", st.min}, {"max", st.max}});
    Output out(plan_out);
    out.stream() << j.dump(2) << "\n";
  });

  // augment
  std::string augment_data, augment_out;
  bool augment_reverse = false;
  auto* augment = app.add_subcommand("augment", "semantics-preserving variants (JSONL)");
  augment->add_option("--data", augment_data, "dataset JSONL")->required();
  augment->add_option("--out", augment_out, "output JSONL (default stdout)");
  augment->add_flag("--r1-reverse", augment_reverse, "R1 negates the condition");
  augment->callback([&] {
    const auto d = ingest_jsonl(augment_data);
    Output out(augment_out);
    std::size_t skipped = 0;
    for (const auto& s : d) {
      std::vector<Variant> variants;
      try {
        variants = generate_variants(s, {augment_reverse});
      } catch (const ParseError& e) {
        std::cerr << "warning: skipping " << s.id << ": " << e.what() << "\n";
        ++skipped;
        continue;
      }
      for (const auto& v : variants) {
        json assignment = json::array();
        for (const auto& [site, rule] : v.assignment)
          assignment.push_back({{"site", site}, {"rule", to_string(rule)}});
        out.stream() << json{{"id", v.id},
                             {"source_id", v.source_id},
                             {"kind", to_string(v.kind)},
                             {"assignment", assignment},
                             {"code", v.code},
                             {"label", v.label}}
                            .dump()
                     << "\n";
      }
    }
    if (skipped) std::cerr << skipped << " unparseable samples skipped\n";
  });

  // train
  RunFlags train_flags;
  std::string replay_path;
  auto* train = app.add_subcommand("train", "run one curriculum (or baseline) experiment");
  train_flags.add(train);
  train->add_option("--replay", replay_path, "re-run a recorded manifest and compare");
  train->callback([&] {
    if (!replay_path.empty()) {
      const auto manifest = run_manifest_from_json(read_json_file(replay_path));
      const auto r = replay(manifest, train_flags.given("jobs") ? train_flags.jobs : default_jobs());
      if (r.replayed.test_metrics) print_metrics("test", *r.replayed.test_metrics);
      std::cout << (r.identical ? "replay identical\n" : "replay DIFFERS\n");
      if (!r.identical) status = 1;
      return;
    }
    const auto c = train_flags.config();
    const auto d = load_dataset(c.dataset);
    const auto result = run_experiment(c, d);
    const auto dir = run_directory(c);
    write_run(dir, result);
    std::cout << "run directory: " << dir.string() << "\n";
    for (const auto& s : result.run.manifest.stages)
      std::cout << "stage " << s.stage << ": " << s.train_ids.size() << " samples, "
                << s.train.epochs_run << " epochs, " << s.mispredicted.size()
                << " mispredicted, error book " << s.error_book_size << "\n";
    if (result.run.manifest.test_metrics) print_metrics("test", *result.run.manifest.test_metrics);
  });

  // evaluate
  std::string eval_run, eval_data;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "evaluate a trained run on a dataset");
  evaluate_cmd->add_option("--run", eval_run, "run directory written by `train`")->required();
  evaluate_cmd->add_option("--data", eval_data, "dataset JSONL")->required();
  evaluate_cmd->callback([&] {
    const std::filesystem::path dir(eval_run);
    const auto manifest = run_manifest_from_json(read_json_file(dir / "manifest.json"));
    if (!std::filesystem::exists(dir / "model.json"))
      throw DataError(eval_run + " holds no model snapshot");
    const auto model = restore_classifier(manifest.spec, {manifest.spec.kind, read_text((dir / "model.json").string())});
    const auto m = evaluate(*model, ingest_jsonl(eval_data));
    print_metrics("evaluation", m);
    std::cout << to_json(m).dump() << "\n";
  });

  // sweep
  RunFlags sweep_flags;
  std::string sweep_ms = "3,5,10", sweep_ns = "3,5,10";
  bool sweep_no_model = false, sweep_no_code = false;
  auto* sweep = app.add_subcommand("sweep", "baseline plus the (strategy, M, N, augment) grid");
  sweep_flags.add(sweep, false);
  sweep->add_option("--ms", sweep_ms, "comma-separated M values");
  sweep->add_option("--ns", sweep_ns, "comma-separated N values");
  sweep->add_flag("--no-model", sweep_no_model, "skip model-strategy cells");
  sweep->add_flag("--no-code", sweep_no_code, "skip code-strategy cells");
  sweep->callback([&] {
    auto base = sweep_flags.config();
    SweepGrid grid;
    grid.ms = parse_list(sweep_ms, "M");
    grid.ns = parse_list(sweep_ns, "N");
    grid.model = !sweep_no_model;
    grid.code = !sweep_no_code;
    const auto d = load_dataset(base.dataset);
    const auto report = run_sweep(base, grid, d, base.jobs);
    std::filesystem::create_directories(base.output_dir);
    write_json_file(base.output_dir / "sweep.json", to_json(report));
    const auto table = sweep_table(report);
    std::ofstream(base.output_dir / "sweep.txt") << table;
    std::cout << table;
    std::size_t failed = report.baseline.manifest ? 0 : 1;
    for (const auto& c : report.cells) failed += c.manifest ? 0 : 1;
    std::cout << report.cells.size() << " cells + baseline, " << failed << " failed\n";
    if (failed) status = kRuntimeExit;
  });

  // report
  std::vector<std::string> report_manifests;
  std::string report_csv_path;
  auto* report = app.add_subcommand("report", "metric tables and deltas vs baseline");
  report->add_option("manifests", report_manifests, "manifest.json files or run directories")
      ->required();
  report->add_option("--csv", report_csv_path, "also write CSV here");
  report->callback([&] {
    std::vector<std::pair<std::string, RunManifest>> runs;
    for (const auto& p : report_manifests) {
      std::filesystem::path path(p);
      if (std::filesystem::is_directory(path)) path /= "manifest.json";
      runs.emplace_back(p, run_manifest_from_json(read_json_file(path)));
    }
    const auto rows = report_rows(runs);
    std::cout << report_text(rows, runs);
    if (!report_csv_path.empty()) {
      Output out(report_csv_path);
      out.stream() << report_csv(rows);
    }
  });

  // check-equivalence
  std::string eq_a, eq_b, eq_rule;
  std::size_t eq_trials = 100, eq_budget = 10000, eq_site = 0;
  std::uint64_t eq_seed = 0;
  auto* eq = app.add_subcommand("check-equivalence",
                                "compare two functions (or one and a rewrite) on random inputs");
  eq->add_option("a", eq_a, "C source file")->required();
  eq->add_option("b", eq_b, "second C source file");
  eq->add_option("--rule", eq_rule, "compare `a` against this rule applied at --site");
  eq->add_option("--site", eq_site, "site index from find_sites");
  eq->add_option("--trials", eq_trials, "random input environments");
  eq->add_option("--seed", eq_seed);
  eq->add_option("--budget", eq_budget, "step budget per run");
  eq->callback([&] {
    const auto a = parse_file(eq_a);
    StmtTree b;
    if (!eq_rule.empty()) {
      const auto sites = find_sites(a);
      if (eq_site >= sites.size())
        throw ConfigError("site " + std::to_string(eq_site) + " out of range (" +
                          std::to_string(sites.size()) + " sites)");
      b = apply_rule(a, sites[eq_site], parse_rule(eq_rule));
      std::cout << render(b);
    } else if (!eq_b.empty()) {
      b = parse_file(eq_b);
    } else {
      throw ConfigError("give a second file or --rule");
    }
    const auto v = equivalent(a, b, eq_trials, eq_seed, eq_budget);
    if (v.equivalent) {
      std::cout << "equivalent on " << v.trials_run << " trials\n";
      return;
    }
    std::cout << "diverged on trial " << v.trials_run << "; witness:";
    for (const auto& [k, val] : *v.witness) std::cout << " " << k << "=" << val;
    std::cout << "\n  a: " << to_string(v.left->outcome) << ", " << v.left->events.size()
              << " assignments\n  b: " << to_string(v.right->outcome) << ", "
              << v.right->events.size() << " assignments\n";
    status = 1;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataExit;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kDataExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeExit;
  }
  return status;
}
