#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gesture/errors.hpp"
#include "gesture/evaluation.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace gesture;

namespace {

ConfusionMatrix table_matrix() {
  const auto [actual, predicted] = oracle::table_predictions();
  return confusion_matrix(actual, predicted);
}

}  // namespace

TEST_CASE("confusion matrix from label lists") {
  const std::vector<GestureLabel> a{GestureLabel::Init, GestureLabel::Init, GestureLabel::Food};
  const std::vector<GestureLabel> p{GestureLabel::Init, GestureLabel::Food, GestureLabel::Food};
  const auto cm = confusion_matrix(a, p);
  CHECK(cm.counts[0][0] == 1);
  CHECK(cm.counts[0][3] == 1);
  CHECK(cm.counts[3][3] == 1);
  CHECK(cm.total() == 3);
  CHECK(cm.trace() == 2);
  CHECK(cm.row_sum(0) == 2);
  CHECK(cm.column_sum(3) == 2);
  CHECK(cm.accuracy() == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS(confusion_matrix(a, std::vector<GestureLabel>{GestureLabel::Init}));
}

TEST_CASE("published confusion matrix reproduces the per-class report") {
  const auto cm = table_matrix();
  CHECK(cm.total() == 159);
  const auto report = classification_report(cm);

  for (const auto& row : oracle::kTableReport) {
    CAPTURE(to_string(row.label));
    const auto& m = report.per_class[index_of(row.label)];
    CHECK(std::abs(m.precision - row.precision) <= 0.005);
    CHECK(std::abs(m.recall - row.recall) <= 0.005);
    CHECK(std::abs(m.f1 - row.f1) <= 0.005);
    CHECK(round_half_up(m.precision) == doctest::Approx(row.precision));
    CHECK(round_half_up(m.recall) == doctest::Approx(row.recall));
    if (row.label == GestureLabel::Undo) {
      // the printed support for Undo is 24, the matrix row holds 25
      CHECK(m.support == 25);
      CHECK(row.support == 24);
    } else {
      CHECK(m.support == row.support);
    }
  }

  // Support-weighted averages over the matrix match the printed last row.
  CHECK(report.accuracy == doctest::Approx(149.0 / 159.0));
  CHECK(report.average.recall == doctest::Approx(report.accuracy));
  CHECK(std::abs(report.average.precision - oracle::kTablePrecisionAvg) <= 0.005);
  CHECK(std::abs(report.average.recall - oracle::kTableRecallAvg) <= 0.005);
  CHECK(std::abs(report.average.f1 - oracle::kTableF1Avg) <= 0.005);
  CHECK(report.average.support == oracle::kTableSupportTotal);
}

TEST_CASE("report math on a hand-made matrix") {
  ConfusionMatrix cm;
  cm.counts[0][0] = 3;
  cm.counts[0][1] = 1;
  cm.counts[1][1] = 2;
  cm.counts[2][0] = 2;
  const auto r = classification_report(cm);
  // class 0: tp 3, predicted 5, actual 4
  CHECK(r.per_class[0].precision == doctest::Approx(0.6));
  CHECK(r.per_class[0].recall == doctest::Approx(0.75));
  CHECK(r.per_class[0].f1 == doctest::Approx(2 * 0.6 * 0.75 / 1.35));
  // class 2 never predicted correctly, never predicted at all
  CHECK(r.per_class[2].precision == 0.0);
  CHECK(r.per_class[2].recall == 0.0);
  CHECK(r.per_class[2].f1 == 0.0);
  // class 4 absent everywhere
  CHECK(r.per_class[4].support == 0);
  CHECK(r.average.support == 8);
  CHECK(r.average.recall == doctest::Approx(r.accuracy));
}

TEST_CASE("fold accuracies average to the published mean") {
  const double m = mean(oracle::kTableFoldAccuracies);
  CHECK(m == doctest::Approx(0.844));
  CHECK(round_half_up(m) == doctest::Approx(oracle::kTableFoldMean));
  CHECK(mean(std::vector<double>{}) == 0.0);
}

TEST_CASE("round_half_up") {
  CHECK(round_half_up(0.125) == doctest::Approx(0.13));
  CHECK(round_half_up(0.875) == doctest::Approx(0.88));
  CHECK(round_half_up(0.844) == doctest::Approx(0.84));
  CHECK(round_half_up(15.0 / 17.0) == doctest::Approx(0.88));
  CHECK(round_half_up(1.0) == 1.0);
}

TEST_CASE("formatted report") {
  const auto text = format_report(classification_report(table_matrix()));
  CHECK(text.find("precision") != std::string::npos);
  CHECK(text.find("NonAlcohol") != std::string::npos);
  CHECK(text.find("0.78") != std::string::npos);
  CHECK(text.find("159") != std::string::npos);
  const auto j = report_to_json(classification_report(table_matrix()));
  CHECK(j.at("classes").size() == 8);
  CHECK(confusion_to_json(table_matrix()).at("counts").size() == 8);
}

TEST_CASE("split validation and k-fold on synthetic data") {
  SyntheticConfig cfg;
  const auto d = generate_synthetic(cfg).dataset;
  const auto res = run_split_validation(ModelKind::Knn, d, 0.3, default_hyperparameters(ModelKind::Knn), 5);
  CHECK(res.confusion.total() == 159);
  CHECK(res.report.average.support == 159);
  CHECK(res.report.accuracy >= 0.9);
  CHECK(res.scatter.size() == 528);
  std::size_t test_points = 0;
  for (const auto& p : res.scatter) {
    if (p.role == SplitRole::Test) {
      ++test_points;
      REQUIRE(p.predicted.has_value());
      CHECK(p.correct == (*p.predicted == p.truth));
    } else {
      CHECK_FALSE(p.predicted.has_value());
    }
  }
  CHECK(test_points == 159);

  const auto kf = run_kfold(ModelKind::Knn, d, 5, default_hyperparameters(ModelKind::Knn), 5);
  REQUIRE(kf.fold_accuracies.size() == 5);
  CHECK(kf.mean_accuracy == doctest::Approx(mean(kf.fold_accuracies)));
  const auto again = run_kfold(ModelKind::Knn, d, 5, default_hyperparameters(ModelKind::Knn), 5);
  CHECK(again.fold_accuracies == kf.fold_accuracies);
}

TEST_CASE("learning curve shape") {
  SyntheticConfig cfg;
  cfg.noise_sigma = 0.12;
  const auto d = generate_synthetic(cfg).dataset;
  CurveConfig cc;
  cc.sizes = {50, 120};
  cc.repeats = 2;
  cc.hyper[ModelKind::Mlp].epochs = 50;
  cc.hyper[ModelKind::Mlr].epochs = 50;
  const auto curve = run_learning_curve(d, cc);
  CHECK(curve.points.size() == 6);
  for (const auto& p : curve.points) {
    CHECK(p.accuracy_mean >= 0.0);
    CHECK(p.accuracy_mean <= 1.0);
    CHECK(p.accuracy_std >= 0.0);
  }
  CHECK(curve.at(120, ModelKind::Mlr).n == 120);
  CHECK_THROWS(curve.at(77, ModelKind::Knn));

  testing::TempDir dir;
  write_curve_csv(dir / "c.csv", curve);
  const auto text = testing::read_file(dir / "c.csv");
  CHECK(text.rfind("n,model,accuracy_mean,accuracy_std\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 7);
}

TEST_CASE("derive_seed separates streams") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
}
