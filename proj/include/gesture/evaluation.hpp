#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gesture/classifiers.hpp"
#include "gesture/dataset.hpp"
#include "gesture/gesture_label.hpp"

namespace gesture {

/// Rows are actual classes, columns predicted classes, both in code order.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kNumGestures>, kNumGestures> counts{};

  std::size_t total() const;
  std::size_t row_sum(std::size_t actual) const;
  std::size_t column_sum(std::size_t predicted) const;
  std::size_t trace() const;
  /// trace / total; 0 for an empty matrix.
  double accuracy() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion_matrix(std::span<const GestureLabel> actual,
                                 std::span<const GestureLabel> predicted);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct ClassificationReport {
  std::array<ClassMetrics, kNumGestures> per_class{};
  /// Support-weighted averages; `support` holds the total.
  ClassMetrics average;
  double accuracy = 0.0;
};

/// Precision of a class nobody predicted is 0, as is F1 when P + R = 0.
ClassificationReport classification_report(const ConfusionMatrix& cm);

/// Half-up rounding used for every displayed metric.
double round_half_up(double value, int decimals = 2);

/// Aligned text in the layout `class | precision recall f1-score support`.
std::string format_report(const ClassificationReport& report);
std::string format_confusion(const ConfusionMatrix& cm);

nlohmann::json report_to_json(const ClassificationReport& report);
nlohmann::json confusion_to_json(const ConfusionMatrix& cm);

enum class SplitRole { Train, Test };

/// One point of the misclassification scatter.
struct ScatterPoint {
  double pc1 = 0.0;
  double pc2 = 0.0;
  GestureLabel truth;
  std::optional<GestureLabel> predicted;  // empty for training points
  bool correct = false;
  SplitRole role = SplitRole::Test;
};

struct SplitValidationResult {
  ClassificationReport report;
  ConfusionMatrix confusion;
  std::vector<ScatterPoint> scatter;
};

/// Stratified split, train on the train part, score the test part. The
/// scatter projects every sample with a PCA fitted on the whole dataset.
SplitValidationResult run_split_validation(ModelKind kind, const LabeledDataset& dataset,
                                           double test_fraction, const Hyperparameters& hyper,
                                           std::uint64_t seed);

/// CSV `pc1,pc2,true,predicted,correct,role`.
void write_scatter_csv(const std::filesystem::path& path, std::span<const ScatterPoint> points);

struct KFoldResult {
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0.0;
};

double mean(std::span<const double> values);

/// Folds run concurrently; results are ordered by fold index.
KFoldResult run_kfold(ModelKind kind, const LabeledDataset& dataset, std::size_t k,
                      const Hyperparameters& hyper, std::uint64_t seed);

struct CurveConfig {
  std::vector<std::size_t> sizes = {50, 100, 150, 200, 250, 300, 350, 400, 450, 500};
  std::vector<ModelKind> kinds = {ModelKind::Knn, ModelKind::Mlp, ModelKind::Mlr};
  /// Train/test repeats per size for the networks.
  std::size_t repeats = 5;
  /// Cross-validation folds per size for kNN.
  std::size_t folds = 5;
  double test_fraction = 0.3;
  std::uint64_t seed = 42;
  std::map<ModelKind, Hyperparameters> hyper = {
      {ModelKind::Knn, default_hyperparameters(ModelKind::Knn)},
      {ModelKind::Mlp, default_hyperparameters(ModelKind::Mlp)},
      {ModelKind::Mlr, default_hyperparameters(ModelKind::Mlr)},
  };
};

struct CurvePoint {
  std::size_t n = 0;
  ModelKind kind = ModelKind::Knn;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
};

struct LearningCurve {
  std::vector<std::size_t> sizes;
  /// Ordered by size, then by the configured model order.
  std::vector<CurvePoint> points;

  const CurvePoint& at(std::size_t n, ModelKind kind) const;
};

/// At each size every model sees the same stratified random subset. kNN is
/// scored by k-fold cross-validation on the subset, the networks by the
/// mean of `repeats` stratified train/test splits.
LearningCurve run_learning_curve(const LabeledDataset& dataset, const CurveConfig& config);

/// CSV `n,model,accuracy_mean,accuracy_std`.
void write_curve_csv(const std::filesystem::path& path, const LearningCurve& curve);

/// Mixes extra stream identifiers into a base seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

}  // namespace gesture
