#include "vcl/model.hpp"

#include <map>
#include <sstream>

#include "vcl/cparse.hpp"

namespace vcl {

using nlohmann::json;

nlohmann::json to_json(const ClassifierSpec& spec) {
  if (spec.kind == ClassifierKind::External)
    return {{"kind", "external"}, {"seed", spec.seed}, {"command", spec.command}};
  return {{"kind", "reference"},
          {"seed", spec.seed},
          {"feature_dim", spec.feature_dim},
          {"learning_rate", spec.learning_rate},
          {"l2", spec.l2},
          {"fine_tune_learning_rate", spec.fine_tune_learning_rate
                                          ? json(*spec.fine_tune_learning_rate)
                                          : json(nullptr)}};
}

ClassifierSpec classifier_spec_from_json(const nlohmann::json& j) {
  ClassifierSpec spec;
  try {
    const auto kind = j.value("kind", std::string("reference"));
    if (kind == "external") {
      spec.kind = ClassifierKind::External;
      spec.command = j.at("command").get<std::string>();
    } else if (kind != "reference") {
      throw ConfigError("unknown classifier kind '" + kind + "'");
    }
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.feature_dim = j.value("feature_dim", spec.feature_dim);
    spec.learning_rate = j.value("learning_rate", spec.learning_rate);
    spec.l2 = j.value("l2", spec.l2);
    if (j.contains("fine_tune_learning_rate") && !j["fine_tune_learning_rate"].is_null())
      spec.fine_tune_learning_rate = j["fine_tune_learning_rate"].get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid classifier spec: ") + e.what());
  }
  if (spec.kind == ClassifierKind::Reference && spec.feature_dim == 0)
    throw ConfigError("feature_dim must be positive");
  return spec;
}

std::vector<Prediction> Classifier::predict_all(const Dataset& data) const {
  std::vector<Prediction> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(predict(s));
  return out;
}

std::unique_ptr<Classifier> new_classifier(const ClassifierSpec& spec) {
  if (spec.kind == ClassifierKind::External) return launch_external_classifier(spec);
  return std::make_unique<ReferenceClassifier>(spec);
}

std::unique_ptr<Classifier> restore_classifier(const ClassifierSpec& spec,
                                               const ModelState& state) {
  auto c = new_classifier(spec);
  c->restore(state);
  return c;
}

Eigen::SparseVector<double> hashed_features(std::string_view code, std::size_t dim) {
  Eigen::SparseVector<double> v(static_cast<Eigen::Index>(dim));
  std::vector<Token> tokens;
  try {
    tokens = lex(code);
  } catch (const ParseError&) {
    return v;
  }
  std::map<Eigen::Index, double> counts;
  for (const auto& t : tokens) {
    if (t.kind != TokenKind::Identifier && t.kind != TokenKind::Keyword &&
        t.kind != TokenKind::Operator)
      continue;
    counts[static_cast<Eigen::Index>(fnv1a64(t.text) % dim)] += 1.0;
  }
  double norm = 0.0;
  for (const auto& [idx, c] : counts) norm += c * c;
  norm = std::sqrt(norm);
  v.reserve(static_cast<Eigen::Index>(counts.size()));
  for (const auto& [idx, c] : counts) v.insertBack(idx) = c / norm;
  return v;
}

FeatureMatrix feature_matrix(const Dataset& data, std::size_t dim) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto f = hashed_features(data[i].code, dim);
    for (Eigen::SparseVector<double>::InnerIterator it(f); it; ++it)
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(it.index()), it.value());
  }
  FeatureMatrix x(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(dim));
  x.setFromTriplets(triplets.begin(), triplets.end());
  return x;
}

namespace {

Eigen::VectorXd label_vector(const Dataset& data) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) y[static_cast<Eigen::Index>(i)] = data[i].label;
  return y;
}

}  // namespace

ReferenceClassifier::ReferenceClassifier(const ClassifierSpec& spec)
    : spec_(spec),
      scaled_weights_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.feature_dim))),
      rng_(spec.seed) {
  if (spec.feature_dim == 0) throw ConfigError("feature_dim must be positive");
}

double ReferenceClassifier::margin(const Eigen::SparseVector<double>& features) const {
  double dot = 0.0;
  for (Eigen::SparseVector<double>::InnerIterator it(features); it; ++it)
    dot += scaled_weights_[it.index()] * it.value();
  return scale_ * dot + bias_;
}

double ReferenceClassifier::sgd_epoch(const FeatureMatrix& x, const Eigen::VectorXd& y,
                                      double lr) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  shuffle(std::span<Eigen::Index>(order), rng_);

  const double decay = 1.0 - lr * spec_.l2;
  for (const auto row : order) {
    double dot = 0.0;
    for (FeatureMatrix::InnerIterator it(x, row); it; ++it)
      dot += scaled_weights_[it.index()] * it.value();
    const double residual = sigmoid(scale_ * dot + bias_) - y[row];
    scale_ *= decay;
    const double step = lr * residual / scale_;
    for (FeatureMatrix::InnerIterator it(x, row); it; ++it)
      scaled_weights_[it.index()] -= step * it.value();
    bias_ -= lr * residual;
    if (scale_ < 1e-6) {
      scaled_weights_ *= scale_;
      scale_ = 1.0;
    }
  }
  return logistic_objective<double>(weights(), bias_, x, y, spec_.l2);
}

TrainReport ReferenceClassifier::train(const Dataset& data, std::size_t max_epochs,
                                       const ConvergencePolicy& policy) {
  if (data.empty()) throw DataError("cannot train on an empty dataset");
  if (max_epochs == 0) throw ConfigError("max_epochs must be at least 1");
  const auto x = feature_matrix(data, spec_.feature_dim);
  const auto y = label_vector(data);
  TrainReport report;
  for (std::size_t epoch = 0; epoch < max_epochs; ++epoch) {
    report.epoch_losses.push_back(sgd_epoch(x, y, spec_.learning_rate));
    ++report.epochs_run;
    const auto n = report.epoch_losses.size();
    if (n >= 2 && policy.converged(report.epoch_losses[n - 2], report.epoch_losses[n - 1])) {
      report.converged = true;
      break;
    }
  }
  return report;
}

TrainReport ReferenceClassifier::fine_tune(const Dataset& data, std::size_t epochs) {
  TrainReport report;
  if (epochs == 0) return report;
  if (data.empty()) throw DataError("cannot fine-tune on an empty dataset");
  const auto x = feature_matrix(data, spec_.feature_dim);
  const auto y = label_vector(data);
  const double lr = spec_.fine_tune_learning_rate.value_or(spec_.learning_rate);
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    report.epoch_losses.push_back(sgd_epoch(x, y, lr));
    ++report.epochs_run;
  }
  return report;
}

Prediction ReferenceClassifier::predict(const FunctionSample& sample) const {
  return {sigmoid(margin(hashed_features(sample.code, spec_.feature_dim)))};
}

std::vector<Prediction> ReferenceClassifier::predict_all(const Dataset& data) const {
  std::vector<Prediction> out(data.size());
  parallel_for(data.size(), default_jobs(), [&](std::size_t i) { out[i] = predict(data[i]); });
  return out;
}

double ReferenceClassifier::objective(const Dataset& data) const {
  return logistic_objective<double>(weights(), bias_, feature_matrix(data, spec_.feature_dim),
                                    label_vector(data), spec_.l2);
}

ModelState ReferenceClassifier::snapshot() const {
  json weights = json::array();
  for (Eigen::Index i = 0; i < scaled_weights_.size(); ++i)
    if (scaled_weights_[i] != 0.0) weights.push_back({i, format_double(scaled_weights_[i])});
  std::ostringstream rng_state;
  rng_state << rng_;
  const json doc{{"spec", to_json(spec_)},
                 {"scale", format_double(scale_)},
                 {"bias", format_double(bias_)},
                 {"weights", std::move(weights)},
                 {"rng", rng_state.str()}};
  return {ClassifierKind::Reference, doc.dump()};
}

void ReferenceClassifier::restore(const ModelState& state) {
  if (state.kind != ClassifierKind::Reference)
    throw ConfigError("cannot restore a non-reference state into the reference classifier");
  try {
    const auto doc = json::parse(state.data);
    const auto spec = classifier_spec_from_json(doc.at("spec"));
    if (spec.feature_dim != spec_.feature_dim)
      throw ConfigError("snapshot feature_dim " + std::to_string(spec.feature_dim) +
                        " does not match classifier feature_dim " +
                        std::to_string(spec_.feature_dim));
    spec_ = spec;
    scale_ = std::stod(doc.at("scale").get<std::string>());
    bias_ = std::stod(doc.at("bias").get<std::string>());
    scaled_weights_.setZero();
    for (const auto& w : doc.at("weights")) {
      const auto idx = w.at(0).get<Eigen::Index>();
      if (idx < 0 || idx >= scaled_weights_.size()) throw DataError("weight index out of range");
      scaled_weights_[idx] = std::stod(w.at(1).get<std::string>());
    }
    std::istringstream rng_state(doc.at("rng").get<std::string>());
    rng_state >> rng_;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed reference model state: ") + e.what());
  }
}

}  // namespace vcl
