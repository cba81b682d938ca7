#include "vcl/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace vcl {

using nlohmann::json;

CurriculumPlan plan(std::vector<DifficultyScore> scores, std::size_t n) {
  if (n < 2) throw ConfigError("a curriculum needs at least 2 buckets");
  if (scores.size() < n)
    throw ConfigError("cannot split " + std::to_string(scores.size()) + " samples into " +
                      std::to_string(n) + " buckets");
  sort_scores(scores);
  CurriculumPlan p;
  p.strategy = scores.front().strategy;
  p.m = scores.front().m;
  const std::size_t base = scores.size() / n, extra = scores.size() % n;
  std::size_t pos = 0;
  for (std::size_t b = 0; b < n; ++b) {
    const std::size_t size = base + (b < extra ? 1 : 0);
    std::vector<std::string> ids;
    BucketStats st;
    st.size = size;
    st.min = scores[pos].value;
    st.max = scores[pos + size - 1].value;
    double sum = 0.0;
    for (std::size_t i = pos; i < pos + size; ++i) {
      ids.push_back(scores[i].sample_id);
      sum += scores[i].value;
    }
    st.mean = sum / static_cast<double>(size);
    p.buckets.push_back(std::move(ids));
    p.stats.push_back(st);
    pos += size;
  }
  return p;
}

MetricsReport metrics_from_counts(std::size_t tp, std::size_t tn, std::size_t fp,
                                  std::size_t fn) {
  MetricsReport m{tp, tn, fp, fn};
  const auto ratio = [](std::size_t num, std::size_t den, bool& defined) {
    defined = den != 0;
    return defined ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
  };
  bool total_defined = true;
  m.accuracy = ratio(tp + tn, m.total(), total_defined);
  m.recall = ratio(tp, tp + fn, m.recall_defined);
  m.precision = ratio(tp, tp + fp, m.precision_defined);
  m.f1_defined = m.precision + m.recall > 0.0;
  m.f1 = m.f1_defined ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

MetricsReport evaluate(const Classifier& classifier, const Dataset& test) {
  if (test.empty()) throw DataError("cannot evaluate on an empty dataset");
  const auto predictions = classifier.predict_all(test);
  const auto s = confusion_stats(predictions, test);
  return metrics_from_counts(s.tp, s.tn, s.fp, s.fn);
}

double log_loss(const Classifier& classifier, const Dataset& data) {
  if (data.empty()) return 0.0;
  const auto predictions = classifier.predict_all(data);
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double p = std::clamp(predictions[i].p, 1e-12, 1.0 - 1e-12);
    sum -= data[i].label == 1 ? std::log(p) : std::log1p(-p);
  }
  return sum / static_cast<double>(data.size());
}

namespace {

std::vector<std::string> mispredicted_ids(const Classifier& c, const Dataset& data) {
  const auto predictions = c.predict_all(data);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (predictions[i].label() != data[i].label) out.push_back(data[i].id);
  return out;
}

std::vector<std::string> ids_of(const Dataset& d) {
  std::vector<std::string> out;
  for (const auto& s : d) out.push_back(s.id);
  return out;
}

RunManifest base_manifest(std::string mode, const ClassifierSpec& spec,
                          const TrainingOptions& o) {
  RunManifest m;
  m.mode = std::move(mode);
  m.spec = spec;
  m.augment = o.augment;
  m.max_epochs = o.max_epochs;
  m.fine_tune_epochs = o.augment ? o.fine_tune_epochs : 0;
  m.include_originals = o.include_originals;
  m.r1_reverse = o.rules.r1_reverse;
  m.epsilon = o.policy.epsilon;
  return m;
}

// Early stages may hold a single class (the easiest bucket often does); the
// training set as a whole may not.
void require_both_labels(const Dataset& train) {
  if (!train.has_both_labels())
    throw DataError("training data '" + train.name() + "' contains a single class");
}

// Trains one stage, collects its mispredictions and, when enabled, fine-tunes
// on the error book built from them.
StageRecord run_stage(Classifier& c, std::size_t k, const Dataset& data, const Dataset& valid,
                      const TrainingOptions& o) {
  StageRecord r;
  r.stage = k;
  r.train_ids = ids_of(data);
  r.train = c.train(data, o.max_epochs, o.policy);
  r.mispredicted = mispredicted_ids(c, data);
  if (o.augment && o.fine_tune_epochs > 0 && !r.mispredicted.empty()) {
    const auto wrong = data.select(r.mispredicted, data.name() + "-mispredicted");
    auto book = variant_dataset(wrong, "error-book-" + std::to_string(k), o.jobs,
                                &r.skipped_unparseable, o.rules);
    r.error_book_size = book.size();
    if (o.include_originals) {
      auto samples = book.samples();
      samples.insert(samples.end(), wrong.begin(), wrong.end());
      book = Dataset(book.name(), std::move(samples));
    }
    if (!book.empty()) r.fine_tune = c.fine_tune(book, o.fine_tune_epochs);
  }
  if (!valid.empty()) r.valid_loss = log_loss(c, valid);
  return r;
}

}  // namespace

RunResult run_curriculum(const CurriculumPlan& p, const Dataset& train, const Dataset& valid,
                         const ClassifierSpec& spec, const TrainingOptions& options) {
  require_both_labels(train);
  std::size_t covered = 0;
  std::unordered_set<std::string> seen;
  for (const auto& b : p.buckets)
    for (const auto& id : b) {
      if (!train.find(id)) throw DataError("plan references unknown sample '" + id + "'");
      if (!seen.insert(id).second) throw DataError("plan lists sample '" + id + "' twice");
      ++covered;
    }
  if (covered != train.size())
    throw DataError("plan covers " + std::to_string(covered) + " of " +
                    std::to_string(train.size()) + " training samples");

  RunResult out;
  out.manifest = base_manifest("curriculum", spec, options);
  out.manifest.strategy = p.strategy;
  out.manifest.m = p.m;
  out.manifest.n = p.buckets.size();
  out.manifest.buckets = p.stats;
  out.classifier = new_classifier(spec);
  std::vector<std::string> cumulative;
  for (std::size_t k = 0; k < p.buckets.size(); ++k) {
    cumulative.insert(cumulative.end(), p.buckets[k].begin(), p.buckets[k].end());
    const auto stage_data = train.select(cumulative, "stage-" + std::to_string(k + 1));
    out.manifest.stages.push_back(run_stage(*out.classifier, k + 1, stage_data, valid, options));
  }
  if (!valid.empty()) out.manifest.valid_metrics = evaluate(*out.classifier, valid);
  return out;
}

RunResult run_baseline(const Dataset& train, const Dataset& valid, const ClassifierSpec& spec,
                       const TrainingOptions& options) {
  require_both_labels(train);
  auto ids = ids_of(train);
  Rng rng(derive_seed(spec.seed, 0xba5e));
  shuffle(std::span<std::string>(ids), rng);
  auto o = options;
  o.augment = false;

  RunResult out;
  out.manifest = base_manifest("baseline", spec, o);
  out.classifier = new_classifier(spec);
  out.manifest.stages.push_back(
      run_stage(*out.classifier, 1, train.select(ids, "baseline"), valid, o));
  if (!valid.empty()) out.manifest.valid_metrics = evaluate(*out.classifier, valid);
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json to_json(const TrainReport& r) {
  return {{"epoch_losses", r.epoch_losses}, {"epochs_run", r.epochs_run},
          {"converged", r.converged}};
}

TrainReport train_report_from_json(const json& j) {
  return {j.at("epoch_losses").get<std::vector<double>>(), j.at("epochs_run").get<std::size_t>(),
          j.at("converged").get<bool>()};
}

json to_json(const BucketStats& b) {
  return {{"size", b.size}, {"mean", b.mean}, {"min", b.min}, {"max", b.max}};
}

json to_json(const SubmodelStats& s) {
  json j{{"subset", s.subset_index}, {"tp", s.tp}, {"tn", s.tn}, {"fp", s.fp}, {"fn", s.fn}};
  j["pos_rate"] = s.pos_rate() ? json(*s.pos_rate()) : json(nullptr);
  j["neg_rate"] = s.neg_rate() ? json(*s.neg_rate()) : json(nullptr);
  return j;
}

json to_json(const StageRecord& r) {
  return {{"stage", r.stage},
          {"train_ids", r.train_ids},
          {"train", to_json(r.train)},
          {"mispredicted", r.mispredicted},
          {"error_book_size", r.error_book_size},
          {"skipped_unparseable", r.skipped_unparseable},
          {"fine_tune", to_json(r.fine_tune)},
          {"valid_loss", r.valid_loss ? json(*r.valid_loss) : json(nullptr)}};
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

json to_json(const MetricsReport& m) {
  return {{"tp", m.tp},
          {"tn", m.tn},
          {"fp", m.fp},
          {"fn", m.fn},
          {"accuracy", m.accuracy},
          {"recall", m.recall},
          {"precision", m.precision},
          {"f1", m.f1},
          {"recall_defined", m.recall_defined},
          {"precision_defined", m.precision_defined},
          {"f1_defined", m.f1_defined}};
}

MetricsReport metrics_report_from_json(const json& j) {
  try {
    MetricsReport m;
    m.tp = j.at("tp").get<std::size_t>();
    m.tn = j.at("tn").get<std::size_t>();
    m.fp = j.at("fp").get<std::size_t>();
    m.fn = j.at("fn").get<std::size_t>();
    m.accuracy = j.at("accuracy").get<double>();
    m.recall = j.at("recall").get<double>();
    m.precision = j.at("precision").get<double>();
    m.f1 = j.at("f1").get<double>();
    m.recall_defined = j.value("recall_defined", true);
    m.precision_defined = j.value("precision_defined", true);
    m.f1_defined = j.value("f1_defined", true);
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed metrics: ") + e.what());
  }
}

json to_json(const RunManifest& m) {
  json j{{"mode", m.mode},
         {"classifier", to_json(m.spec)},
         {"strategy", m.strategy ? json(to_string(*m.strategy)) : json(nullptr)},
         {"m", optional_json(m.m)},
         {"n", optional_json(m.n)},
         {"augment", m.augment},
         {"max_epochs", m.max_epochs},
         {"fine_tune_epochs", m.fine_tune_epochs},
         {"include_originals", m.include_originals},
         {"r1_reverse", m.r1_reverse},
         {"epsilon", m.epsilon},
         {"buckets", json::array()},
         {"submodels", json::array()},
         {"stages", json::array()},
         {"valid_metrics", m.valid_metrics ? to_json(*m.valid_metrics) : json(nullptr)},
         {"test_metrics", m.test_metrics ? to_json(*m.test_metrics) : json(nullptr)},
         {"config", m.config}};
  for (const auto& b : m.buckets) j["buckets"].push_back(to_json(b));
  for (const auto& s : m.submodels) j["submodels"].push_back(to_json(s));
  for (const auto& s : m.stages) j["stages"].push_back(to_json(s));
  return j;
}

RunManifest run_manifest_from_json(const json& j) {
  try {
    RunManifest m;
    m.mode = j.at("mode").get<std::string>();
    if (m.mode != "curriculum" && m.mode != "baseline")
      throw DataError("unknown manifest mode '" + m.mode + "'");
    m.spec = classifier_spec_from_json(j.at("classifier"));
    if (auto s = optional_from<std::string>(j, "strategy")) m.strategy = parse_strategy(*s);
    m.m = optional_from<std::size_t>(j, "m");
    m.n = optional_from<std::size_t>(j, "n");
    m.augment = j.at("augment").get<bool>();
    m.max_epochs = j.at("max_epochs").get<std::size_t>();
    m.fine_tune_epochs = j.at("fine_tune_epochs").get<std::size_t>();
    m.include_originals = j.value("include_originals", false);
    m.r1_reverse = j.value("r1_reverse", false);
    m.epsilon = j.at("epsilon").get<double>();
    for (const auto& b : j.at("buckets"))
      m.buckets.push_back({b.at("size").get<std::size_t>(), b.at("mean").get<double>(),
                           b.at("min").get<double>(), b.at("max").get<double>()});
    for (const auto& s : j.at("submodels"))
      m.submodels.push_back({s.at("subset").get<std::size_t>(), s.at("tp").get<std::size_t>(),
                             s.at("tn").get<std::size_t>(), s.at("fp").get<std::size_t>(),
                             s.at("fn").get<std::size_t>()});
    for (const auto& s : j.at("stages")) {
      StageRecord r;
      r.stage = s.at("stage").get<std::size_t>();
      r.train_ids = s.at("train_ids").get<std::vector<std::string>>();
      r.train = train_report_from_json(s.at("train"));
      r.mispredicted = s.at("mispredicted").get<std::vector<std::string>>();
      r.error_book_size = s.at("error_book_size").get<std::size_t>();
      r.skipped_unparseable = s.at("skipped_unparseable").get<std::size_t>();
      r.fine_tune = train_report_from_json(s.at("fine_tune"));
      r.valid_loss = optional_from<double>(s, "valid_loss");
      m.stages.push_back(std::move(r));
    }
    if (j.contains("valid_metrics") && !j["valid_metrics"].is_null())
      m.valid_metrics = metrics_report_from_json(j["valid_metrics"]);
    if (j.contains("test_metrics") && !j["test_metrics"].is_null())
      m.test_metrics = metrics_report_from_json(j["test_metrics"]);
    m.config = j.value("config", json::object());
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
}

}  // namespace vcl
