#pragma once

// Independent reference computations. None of these call into the code
// they are used to check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "gesture/classifiers.hpp"
#include "gesture/dataset.hpp"

namespace gesture::oracle {

/// Sorts every stored point by (distance, index), votes over the first k and
/// breaks a vote tie with the earliest-ranked neighbor among tied classes.
inline GestureLabel knn(const std::vector<Sample>& points, std::size_t k, const FeatureVector& q) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < kFeatureDim; ++j) {
      const double diff = points[i].features[j] - q[j];
      d += diff * diff;
    }
    all.emplace_back(std::sqrt(d), i);
  }
  std::sort(all.begin(), all.end());

  std::array<int, kNumGestures> votes{};
  for (std::size_t r = 0; r < k; ++r) ++votes[index_of(points[all[r].second].label)];
  const int best = *std::max_element(votes.begin(), votes.end());
  for (std::size_t r = 0; r < k; ++r) {
    const GestureLabel l = points[all[r].second].label;
    if (votes[index_of(l)] == best) return l;
  }
  return points[all[0].second].label;
}

/// Random kNN instance. Coordinates come from a coarse grid so that exact
/// distance ties and duplicate points actually occur.
struct KnnInstance {
  std::vector<Sample> points;
  std::vector<FeatureVector> queries;
  std::size_t k = 2;
};

inline KnnInstance random_knn_instance(std::mt19937_64& rng, std::size_t max_points = 30,
                                       std::size_t max_classes = 4, std::size_t queries = 50) {
  std::uniform_int_distribution<std::size_t> n_points(2, max_points);
  std::uniform_int_distribution<std::size_t> n_classes(2, max_classes);
  std::uniform_int_distribution<int> grid(0, 4);
  std::uniform_real_distribution<double> real(0.0, 1.0);
  std::bernoulli_distribution coarse(0.5);

  KnnInstance inst;
  const std::size_t n = n_points(rng);
  const std::size_t classes = n_classes(rng);
  std::uniform_int_distribution<std::size_t> cls(0, classes - 1);
  const bool use_grid = coarse(rng);
  auto point = [&] {
    FeatureVector fv;
    for (double& v : fv.values) v = use_grid ? grid(rng) / 4.0 : real(rng);
    return fv;
  };
  for (std::size_t i = 0; i < n; ++i) inst.points.push_back({point(), label_at(cls(rng))});
  for (std::size_t i = 0; i < queries; ++i) {
    // some queries sit exactly on stored points
    if (i % 5 == 0) {
      inst.queries.push_back(inst.points[i % n].features);
    } else {
      inst.queries.push_back(point());
    }
  }
  std::uniform_int_distribution<std::size_t> kk(1, std::min<std::size_t>(n, 5));
  inst.k = coarse(rng) ? 2 : kk(rng);
  return inst;
}

/// Central-difference gradient of a scalar loss over a flat parameter view,
/// compared against a supplied analytic gradient with the relative error
/// |a - n| / max(1, |a| + |n|).
template <typename Params, typename Loss>
double max_relative_gradient_error(Params p, const Params& analytic, Loss loss, double eps) {
  double worst = 0.0;
  for (std::size_t i = 0; i < Params::count(); ++i) {
    const double saved = p.at(i);
    p.at(i) = saved + eps;
    const double up = loss(p);
    p.at(i) = saved - eps;
    const double down = loss(p);
    p.at(i) = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double a = analytic.at(i);
    worst = std::max(worst, std::abs(a - numeric) / std::max(1.0, std::abs(a) + std::abs(numeric)));
  }
  return worst;
}

/// Published confusion matrix. Its rows and columns are in alphabetical
/// class order: Alcohol, Cash, Checkout, Credit, Food, Init, NonAlcohol, Undo.
inline constexpr std::array<GestureLabel, kNumGestures> kTableOrder = {
    GestureLabel::Alcohol, GestureLabel::Cash,       GestureLabel::Checkout, GestureLabel::Credit,
    GestureLabel::Food,    GestureLabel::Init,       GestureLabel::NonAlcohol, GestureLabel::Undo,
};

inline constexpr std::array<std::array<std::size_t, kNumGestures>, kNumGestures> kTableConfusion = {{
    {22, 0, 0, 0, 0, 0, 0, 0},
    {0, 15, 2, 0, 0, 0, 0, 0},
    {0, 0, 18, 0, 0, 0, 0, 1},
    {0, 0, 0, 24, 0, 0, 0, 0},
    {0, 0, 0, 0, 15, 0, 4, 0},
    {0, 0, 0, 0, 0, 15, 0, 0},
    {0, 0, 0, 0, 0, 0, 18, 0},
    {0, 0, 3, 0, 0, 0, 0, 22},
}};

struct PublishedMetrics {
  GestureLabel label;
  double precision;
  double recall;
  double f1;
  std::size_t support;
};

// Support column as printed. Undo is listed with 24 although its matrix row
// sums to 25; the matrix and the printed total both hold 159 samples.
inline constexpr std::array<PublishedMetrics, kNumGestures> kTableReport = {{
    {GestureLabel::Alcohol, 1.00, 1.00, 1.00, 22},
    {GestureLabel::Cash, 1.00, 0.88, 0.94, 17},
    {GestureLabel::Checkout, 0.78, 0.95, 0.86, 19},
    {GestureLabel::Credit, 1.00, 1.00, 1.00, 24},
    {GestureLabel::Food, 1.00, 0.79, 0.88, 19},
    {GestureLabel::Init, 1.00, 1.00, 1.00, 15},
    {GestureLabel::NonAlcohol, 0.82, 1.00, 0.90, 18},
    {GestureLabel::Undo, 0.96, 0.88, 0.92, 24},
}};

inline constexpr double kTablePrecisionAvg = 0.95;
inline constexpr double kTableRecallAvg = 0.94;
inline constexpr double kTableF1Avg = 0.94;
inline constexpr std::size_t kTableSupportTotal = 159;

inline constexpr std::array<double, 5> kTableFoldAccuracies = {0.92, 0.75, 0.85, 0.86, 0.84};
inline constexpr double kTableFoldMean = 0.84;

/// Expands the published matrix into (actual, predicted) label lists in code order.
inline std::pair<std::vector<GestureLabel>, std::vector<GestureLabel>> table_predictions() {
  std::vector<GestureLabel> actual, predicted;
  for (std::size_t r = 0; r < kNumGestures; ++r) {
    for (std::size_t c = 0; c < kNumGestures; ++c) {
      for (std::size_t n = 0; n < kTableConfusion[r][c]; ++n) {
        actual.push_back(kTableOrder[r]);
        predicted.push_back(kTableOrder[c]);
      }
    }
  }
  return {actual, predicted};
}

}  // namespace gesture::oracle
