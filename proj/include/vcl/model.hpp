#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "json.hpp"
#include "vcl/corpus.hpp"
#include "vcl/util.hpp"

namespace vcl {

/// Training is treated as converged at epoch t when loss(t) >= loss(t-1) - epsilon.
struct ConvergencePolicy {
  double epsilon = 1e-4;

  bool converged(double previous, double current) const { return current >= previous - epsilon; }
};

struct TrainReport {
  std::vector<double> epoch_losses;  // mean training objective after each epoch
  std::size_t epochs_run = 0;
  bool converged = false;

  bool operator==(const TrainReport&) const = default;
};

struct Prediction {
  double p = 0.5;

  /// Vulnerable only when p is strictly greater than 0.5.
  int label() const noexcept { return p > 0.5 ? 1 : 0; }
};

enum class ClassifierKind { Reference, External };

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::Reference;
  std::uint64_t seed = 0;
  // reference
  std::size_t feature_dim = 32768;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  std::optional<double> fine_tune_learning_rate;  // defaults to learning_rate
  // external: command line of the model process
  std::string command;

  ClassifierSpec with_seed(std::uint64_t s) const {
    ClassifierSpec out = *this;
    out.seed = s;
    return out;
  }

  bool operator==(const ClassifierSpec&) const = default;
};

nlohmann::json to_json(const ClassifierSpec& spec);
ClassifierSpec classifier_spec_from_json(const nlohmann::json& j);

/// Opaque serialized model. For the reference kind `data` is a JSON document;
/// for external models it is the child's base64 state string.
struct ModelState {
  ClassifierKind kind = ClassifierKind::Reference;
  std::string data;
};

/// Contract shared by every trainable vulnerability classifier.
///
/// train() and fine_tune() continue from the current state; they never reset
/// it. A Classifier is single-owner while training; predict() on a classifier
/// that is not being trained is safe to call concurrently.
class Classifier {
 public:
  virtual ~Classifier() = default;

  /// Runs up to max_epochs epochs, stopping early once `policy` reports
  /// convergence. Visit order within an epoch is a seeded shuffle.
  virtual TrainReport train(const Dataset& data, std::size_t max_epochs,
                            const ConvergencePolicy& policy) = 0;

  /// Runs exactly `epochs` epochs; zero leaves the state untouched.
  virtual TrainReport fine_tune(const Dataset& data, std::size_t epochs) = 0;

  virtual Prediction predict(const FunctionSample& sample) const = 0;

  virtual std::vector<Prediction> predict_all(const Dataset& data) const;

  /// Throws UnsupportedError when the model cannot serialize itself.
  virtual ModelState snapshot() const = 0;
  virtual void restore(const ModelState& state) = 0;

  virtual bool supports_snapshot() const { return true; }
};

std::unique_ptr<Classifier> new_classifier(const ClassifierSpec& spec);

/// Fresh classifier for `spec` with `state` loaded into it.
std::unique_ptr<Classifier> restore_classifier(const ClassifierSpec& spec, const ModelState& state);

// ---------------------------------------------------------------------------
// Reference model: logistic regression over hashed, L2-normalized token counts.

using FeatureMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Bag of identifier, keyword and operator tokens hashed into `dim` buckets,
/// scaled to unit L2 norm. Code that fails to lex yields an empty vector.
Eigen::SparseVector<double> hashed_features(std::string_view code, std::size_t dim);

/// One row per sample, in dataset order.
FeatureMatrix feature_matrix(const Dataset& data, std::size_t dim);

template <typename Scalar>
Scalar sigmoid(Scalar z) {
  using std::exp;
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-z));
  const Scalar e = exp(z);
  return e / (Scalar(1) + e);
}

/// log(1 + exp(z)) without overflow.
template <typename Scalar>
Scalar softplus(Scalar z) {
  using std::exp;
  using std::log1p;
  return z > Scalar(0) ? z + log1p(exp(-z)) : log1p(exp(z));
}

/// Mean logistic loss plus (l2 / 2) * ||w||^2.
template <typename Scalar>
Scalar logistic_objective(const Vector<Scalar>& weights, Scalar bias, const FeatureMatrix& x,
                          const Vector<Scalar>& labels, Scalar l2) {
  const Vector<Scalar> z = (x.template cast<Scalar>() * weights).array() + bias;
  Scalar loss(0);
  for (Eigen::Index i = 0; i < z.size(); ++i)
    loss += labels[i] > Scalar(0.5) ? softplus(Scalar(-z[i])) : softplus(Scalar(z[i]));
  return loss / Scalar(z.size()) + l2 / Scalar(2) * weights.squaredNorm();
}

/// Analytic gradient of logistic_objective with respect to weights and bias.
template <typename Scalar>
void logistic_gradient(const Vector<Scalar>& weights, Scalar bias, const FeatureMatrix& x,
                       const Vector<Scalar>& labels, Scalar l2, Vector<Scalar>& grad_weights,
                       Scalar& grad_bias) {
  const auto xs = x.template cast<Scalar>();
  const Vector<Scalar> z = (xs * weights).array() + bias;
  const Vector<Scalar> residual = z.unaryExpr([](Scalar v) { return sigmoid(v); }) - labels;
  const Scalar n(z.size());
  grad_weights = (xs.transpose() * residual) / n + l2 * weights;
  grad_bias = residual.sum() / n;
}

class ReferenceClassifier final : public Classifier {
 public:
  explicit ReferenceClassifier(const ClassifierSpec& spec);

  TrainReport train(const Dataset& data, std::size_t max_epochs,
                    const ConvergencePolicy& policy) override;
  TrainReport fine_tune(const Dataset& data, std::size_t epochs) override;
  Prediction predict(const FunctionSample& sample) const override;
  std::vector<Prediction> predict_all(const Dataset& data) const override;
  ModelState snapshot() const override;
  void restore(const ModelState& state) override;

  /// Effective weight vector (scale folded in).
  Eigen::VectorXd weights() const { return scale_ * scaled_weights_; }
  double bias() const noexcept { return bias_; }

  /// Objective value at the current state on `data`.
  double objective(const Dataset& data) const;

 private:
  double sgd_epoch(const FeatureMatrix& x, const Eigen::VectorXd& y, double lr);
  double margin(const Eigen::SparseVector<double>& features) const;

  ClassifierSpec spec_;
  // The effective weights are scale_ * scaled_weights_; decaying scale_
  // applies the L2 shrinkage of every SGD step in O(1).
  Eigen::VectorXd scaled_weights_;
  double scale_ = 1.0;
  double bias_ = 0.0;
  Rng rng_;
};

/// Launches the external model (see external_model.cpp for the protocol).
std::unique_ptr<Classifier> launch_external_classifier(const ClassifierSpec& spec);

}  // namespace vcl
