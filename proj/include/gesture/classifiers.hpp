#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "gesture/dataset.hpp"
#include "gesture/feature_pipeline.hpp"
#include "gesture/gesture_label.hpp"

namespace gesture {

enum class ModelKind { Knn, Mlp, Mlr };

std::string_view to_string(ModelKind kind);
/// Case-insensitive: "knn", "Mlp", "MLR".
std::optional<ModelKind> parse_model_kind(std::string_view name);

struct Hyperparameters {
  std::size_t k = 2;
  double learning_rate = 0.01;
  std::size_t epochs = 500;
  /// Initial weights are drawn uniformly from [-init_scale, init_scale].
  double init_scale = 0.1;

  friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

/// k = 2, step 0.01, 500 epochs, init scale 0.1 for every kind.
Hyperparameters default_hyperparameters(ModelKind kind);

using Scores = std::array<double, kNumGestures>;

struct Prediction {
  GestureLabel label;
  /// Class probabilities for the networks, neighbor vote fractions for kNN.
  Scores scores{};
};

/// Index of the largest score; ties resolve to the lowest index.
std::size_t argmax(const Scores& scores);

class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual ModelKind kind() const = 0;
  virtual Prediction predict(const FeatureVector& x) const = 0;
  virtual nlohmann::json parameters_json() const = 0;

  const Hyperparameters& hyperparameters() const noexcept { return hyper_; }
  const std::string& trained_on() const noexcept { return trained_on_; }

 protected:
  Classifier(Hyperparameters hyper, std::string trained_on)
      : hyper_(hyper), trained_on_(std::move(trained_on)) {}

 private:
  Hyperparameters hyper_;
  std::string trained_on_;
};

/// Immutable and shareable between threads.
using TrainedModel = std::shared_ptr<const Classifier>;

// ---------------------------------------------------------------------------
// k-nearest neighbors

class KnnModel final : public Classifier {
 public:
  KnnModel(std::size_t k, std::vector<Sample> points, std::string trained_on);

  ModelKind kind() const override { return ModelKind::Knn; }

  /// Majority vote over the k nearest stored points (Euclidean). Equal
  /// distances order by stored index; a vote tie goes to the tied class
  /// that owns the nearer neighbor.
  Prediction predict(const FeatureVector& x) const override;
  nlohmann::json parameters_json() const override;

  std::size_t k() const noexcept { return hyperparameters().k; }
  const std::vector<Sample>& stored_points() const noexcept { return points_; }

 private:
  std::vector<Sample> points_;
};

// ---------------------------------------------------------------------------
// Networks. Columns of a batch matrix are samples.

inline constexpr int kInputs = static_cast<int>(kFeatureDim);
inline constexpr int kHidden = 10;
inline constexpr int kClasses = static_cast<int>(kNumGestures);

using InputVector = Eigen::Matrix<double, kInputs, 1>;
using InputBatch = Eigen::Matrix<double, kInputs, Eigen::Dynamic>;
using ClassVector = Eigen::Matrix<double, kClasses, 1>;

struct MlpParameters {
  Eigen::Matrix<double, kHidden, kInputs> weights_in;
  Eigen::Matrix<double, kHidden, 1> bias_in;
  Eigen::Matrix<double, kClasses, kHidden> weights_out;
  ClassVector bias_out;

  static MlpParameters random(double scale, std::uint64_t seed);
  static constexpr std::size_t count() {
    return kHidden * kInputs + kHidden + kClasses * kHidden + kClasses;
  }
  /// Flat view used by the gradient checker: weights_in, bias_in,
  /// weights_out, bias_out, each column-major.
  double& at(std::size_t i);
  double at(std::size_t i) const;
};

struct MlrParameters {
  Eigen::Matrix<double, kClasses, kInputs> weights;
  ClassVector bias;

  static MlrParameters random(double scale, std::uint64_t seed);
  static constexpr std::size_t count() { return kClasses * kInputs + kClasses; }
  double& at(std::size_t i);
  double at(std::size_t i) const;
};

/// Numerically stable softmax (max subtracted before exponentiation).
ClassVector softmax(const ClassVector& logits);

InputVector to_input(const FeatureVector& x);

struct Batch {
  InputBatch inputs;
  std::vector<GestureLabel> targets;
};
Batch to_batch(const LabeledDataset& data);

ClassVector mlp_probabilities(const MlpParameters& p, const InputVector& x);
ClassVector mlr_probabilities(const MlrParameters& p, const InputVector& x);

/// Mean cross-entropy over the batch.
double mlp_loss(const MlpParameters& p, const Batch& batch);
double mlr_loss(const MlrParameters& p, const Batch& batch);

/// Analytic gradient of the mean cross-entropy, same layout as the parameters.
MlpParameters mlp_gradient(const MlpParameters& p, const Batch& batch);
MlrParameters mlr_gradient(const MlrParameters& p, const Batch& batch);

class MlpModel final : public Classifier {
 public:
  MlpModel(MlpParameters params, Hyperparameters hyper, std::string trained_on);

  ModelKind kind() const override { return ModelKind::Mlp; }
  Prediction predict(const FeatureVector& x) const override;
  nlohmann::json parameters_json() const override;
  const MlpParameters& parameters() const noexcept { return params_; }

 private:
  MlpParameters params_;
};

class MlrModel final : public Classifier {
 public:
  MlrModel(MlrParameters params, Hyperparameters hyper, std::string trained_on);

  ModelKind kind() const override { return ModelKind::Mlr; }
  Prediction predict(const FeatureVector& x) const override;
  nlohmann::json parameters_json() const override;
  const MlrParameters& parameters() const noexcept { return params_; }

 private:
  MlrParameters params_;
};

// ---------------------------------------------------------------------------
// Training

/// Full-batch gradient descent for the networks: each epoch steps
/// `learning_rate` along the gradient of the cross-entropy summed over the
/// training set. kNN stores the training set verbatim. `loss_history`, when
/// given, receives the mean loss before the first step and after every epoch.
TrainedModel train(ModelKind kind, const LabeledDataset& train_set, const Hyperparameters& hyper,
                   std::uint64_t seed, std::vector<double>* loss_history = nullptr);

std::shared_ptr<const KnnModel> train_knn(const LabeledDataset& train_set, std::size_t k);
std::shared_ptr<const MlpModel> train_mlp(const LabeledDataset& train_set,
                                          const Hyperparameters& hyper, std::uint64_t seed,
                                          std::vector<double>* loss_history = nullptr);
std::shared_ptr<const MlrModel> train_mlr(const LabeledDataset& train_set,
                                          const Hyperparameters& hyper, std::uint64_t seed,
                                          std::vector<double>* loss_history = nullptr);

/// Throws ModelError when `model` is null.
Prediction predict(const TrainedModel& model, const FeatureVector& x);

// ---------------------------------------------------------------------------
// Gradient checking

inline constexpr double kDefaultGradientEpsilon = 1e-5;

/// max over parameters of |analytic - numeric| / max(1, |analytic| + |numeric|),
/// with central differences of step `epsilon`.
double gradient_check(const MlpParameters& p, const FeatureVector& x, GestureLabel target,
                      double epsilon = kDefaultGradientEpsilon);
double gradient_check(const MlrParameters& p, const FeatureVector& x, GestureLabel target,
                      double epsilon = kDefaultGradientEpsilon);

/// Draws weights uniformly from [-1, 1] with `seed`, then checks.
double gradient_check(ModelKind kind, const FeatureVector& x, GestureLabel target,
                      std::uint64_t seed, double epsilon = kDefaultGradientEpsilon);

// ---------------------------------------------------------------------------
// Model files

inline constexpr std::string_view kModelFormatVersion = "1";

nlohmann::json model_to_json(const Classifier& model);
TrainedModel model_from_json(const nlohmann::json& j);

void save_model(const Classifier& model, const std::filesystem::path& path);
/// Throws VersionMismatch on an unknown format version, ModelError on a
/// corrupt or unreadable file.
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace gesture
