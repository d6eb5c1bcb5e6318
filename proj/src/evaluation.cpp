#include "gesture/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gesture/analysis.hpp"
#include "gesture/errors.hpp"

namespace gesture {

namespace {

double accuracy_on(const Classifier& model, const LabeledDataset& test) {
  if (test.empty()) throw DatasetError("empty test set");
  std::size_t correct = 0;
  for (const auto& s : test.samples()) {
    if (model.predict(s.features).label == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

double population_std(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double m = mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", round_half_up(v, 2));
  return buf;
}

}  // namespace

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : counts) t += std::accumulate(row.begin(), row.end(), std::size_t{0});
  return t;
}

std::size_t ConfusionMatrix::row_sum(std::size_t actual) const {
  const auto& row = counts.at(actual);
  return std::accumulate(row.begin(), row.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::column_sum(std::size_t predicted) const {
  std::size_t s = 0;
  for (const auto& row : counts) s += row.at(predicted);
  return s;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < kNumGestures; ++i) t += counts[i][i];
  return t;
}

double ConfusionMatrix::accuracy() const {
  const std::size_t t = total();
  return t == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(t);
}

ConfusionMatrix confusion_matrix(std::span<const GestureLabel> actual,
                                 std::span<const GestureLabel> predicted) {
  if (actual.size() != predicted.size()) {
    throw std::invalid_argument("confusion_matrix: label lists differ in length");
  }
  if (actual.empty()) throw std::invalid_argument("confusion_matrix: no labels");
  ConfusionMatrix cm;
  for (std::size_t t = 0; t < actual.size(); ++t) {
    ++cm.counts[index_of(actual[t])][index_of(predicted[t])];
  }
  return cm;
}

ClassificationReport classification_report(const ConfusionMatrix& cm) {
  ClassificationReport r;
  const std::size_t total = cm.total();
  for (std::size_t c = 0; c < kNumGestures; ++c) {
    ClassMetrics& m = r.per_class[c];
    const std::size_t tp = cm.counts[c][c];
    const std::size_t predicted = cm.column_sum(c);
    m.support = cm.row_sum(c);
    m.precision = predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted);
    m.recall = m.support == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(m.support);
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
  }
  r.average.support = total;
  if (total > 0) {
    for (const auto& m : r.per_class) {
      const double w = static_cast<double>(m.support) / static_cast<double>(total);
      r.average.precision += w * m.precision;
      r.average.recall += w * m.recall;
      r.average.f1 += w * m.f1;
    }
  }
  r.accuracy = cm.accuracy();
  return r;
}

double round_half_up(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // The nudge keeps decimal ties such as 0.845 (stored as 0.84499...) rounding up.
  return std::floor(value * scale + 0.5 + 1e-9) / scale;
}

std::string format_report(const ClassificationReport& report) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-16s %9s %9s %9s %9s\n", "", "precision", "recall",
                "f1-score", "support");
  out << line;
  for (std::size_t c = 0; c < kNumGestures; ++c) {
    const auto& m = report.per_class[c];
    std::snprintf(line, sizeof line, "%-16s %9s %9s %9s %9zu\n",
                  std::string(to_string(label_at(c))).c_str(), fixed2(m.precision).c_str(),
                  fixed2(m.recall).c_str(), fixed2(m.f1).c_str(), m.support);
    out << line;
  }
  out << '\n';
  std::snprintf(line, sizeof line, "%-16s %9s %9s %9s %9zu\n", "avg / total",
                fixed2(report.average.precision).c_str(), fixed2(report.average.recall).c_str(),
                fixed2(report.average.f1).c_str(), report.average.support);
  out << line;
  std::snprintf(line, sizeof line, "%-16s %9s\n", "accuracy", fixed2(report.accuracy).c_str());
  out << line;
  return out.str();
}

std::string format_confusion(const ConfusionMatrix& cm) {
  std::ostringstream out;
  char cell[32];
  out << "actual\\pred";
  for (std::size_t j = 0; j < kNumGestures; ++j) {
    std::snprintf(cell, sizeof cell, "%5zu", j + 1);
    out << cell;
  }
  out << '\n';
  for (std::size_t i = 0; i < kNumGestures; ++i) {
    std::snprintf(cell, sizeof cell, "%-11zu", i + 1);
    out << cell;
    for (std::size_t j = 0; j < kNumGestures; ++j) {
      std::snprintf(cell, sizeof cell, "%5zu", cm.counts[i][j]);
      out << cell;
    }
    out << '\n';
  }
  return out.str();
}

nlohmann::json report_to_json(const ClassificationReport& report) {
  auto metrics = [](const ClassMetrics& m) {
    return nlohmann::json{{"precision", m.precision},
                          {"recall", m.recall},
                          {"f1", m.f1},
                          {"support", m.support}};
  };
  nlohmann::json classes = nlohmann::json::object();
  for (std::size_t c = 0; c < kNumGestures; ++c) {
    classes[std::string(to_string(label_at(c)))] = metrics(report.per_class[c]);
  }
  return {{"classes", std::move(classes)},
          {"weighted_average", metrics(report.average)},
          {"accuracy", report.accuracy}};
}

nlohmann::json confusion_to_json(const ConfusionMatrix& cm) {
  nlohmann::json labels = nlohmann::json::array();
  for (GestureLabel g : kAllGestures) labels.push_back(std::string(to_string(g)));
  return {{"labels", std::move(labels)}, {"counts", cm.counts}};
}

SplitValidationResult run_split_validation(ModelKind kind, const LabeledDataset& dataset,
                                           double test_fraction, const Hyperparameters& hyper,
                                           std::uint64_t seed) {
  const Split split = stratified_split(dataset, test_fraction, seed);
  const TrainedModel model = train(kind, split.train, hyper, seed);

  std::vector<GestureLabel> actual;
  std::vector<GestureLabel> predicted;
  std::size_t direct_correct = 0;
  for (const auto& s : split.test.samples()) {
    actual.push_back(s.label);
    predicted.push_back(model->predict(s.features).label);
    if (predicted.back() == s.label) ++direct_correct;
  }

  SplitValidationResult result;
  result.confusion = confusion_matrix(actual, predicted);
  result.report = classification_report(result.confusion);
  if (result.confusion.trace() != direct_correct) {
    throw std::logic_error("confusion matrix trace disagrees with direct label comparison");
  }

  const PcaProjection pca = fit_pca(dataset);
  for (const auto& s : split.train.samples()) {
    const auto [a, b] = pca.project(s.features);
    result.scatter.push_back({a, b, s.label, std::nullopt, false, SplitRole::Train});
  }
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    const auto [a, b] = pca.project(split.test[i].features);
    result.scatter.push_back(
        {a, b, actual[i], predicted[i], actual[i] == predicted[i], SplitRole::Test});
  }
  return result;
}

void write_scatter_csv(const std::filesystem::path& path, std::span<const ScatterPoint> points) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "pc1,pc2,true,predicted,correct,role\n";
  char buf[64];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,", p.pc1, p.pc2);
    out << buf << to_string(p.truth) << ',';
    if (p.predicted) out << to_string(*p.predicted);
    out << ',' << (p.role == SplitRole::Test ? (p.correct ? "1" : "0") : "") << ','
        << (p.role == SplitRole::Train ? "train" : "test") << '\n';
  }
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

KFoldResult run_kfold(ModelKind kind, const LabeledDataset& dataset, std::size_t k,
                      const Hyperparameters& hyper, std::uint64_t seed) {
  const std::vector<Split> folds = kfold_partitions(dataset, k, seed);
  std::vector<std::future<double>> jobs;
  jobs.reserve(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    jobs.push_back(std::async(std::launch::async, [&, f] {
      const TrainedModel model = train(kind, folds[f].train, hyper, derive_seed(seed, f));
      return accuracy_on(*model, folds[f].test);
    }));
  }
  KFoldResult r;
  for (auto& j : jobs) r.fold_accuracies.push_back(j.get());
  r.mean_accuracy = mean(r.fold_accuracies);
  return r;
}

const CurvePoint& LearningCurve::at(std::size_t n, ModelKind kind) const {
  for (const auto& p : points) {
    if (p.n == n && p.kind == kind) return p;
  }
  throw std::out_of_range("no learning-curve point for that size and model");
}

LearningCurve run_learning_curve(const LabeledDataset& dataset, const CurveConfig& config) {
  if (config.sizes.empty()) throw DatasetError("learning curve needs at least one size");
  for (std::size_t i = 0; i < config.sizes.size(); ++i) {
    if (config.sizes[i] > dataset.size()) {
      throw DatasetError("learning-curve size " + std::to_string(config.sizes[i]) +
                         " exceeds dataset size " + std::to_string(dataset.size()));
    }
    if (i > 0 && config.sizes[i] <= config.sizes[i - 1]) {
      throw DatasetError("learning-curve sizes must be strictly increasing");
    }
  }
  if (config.repeats == 0) throw DatasetError("learning curve needs at least one repeat");

  auto hyper_for = [&](ModelKind kind) {
    const auto it = config.hyper.find(kind);
    return it != config.hyper.end() ? it->second : default_hyperparameters(kind);
  };

  std::vector<LabeledDataset> subsets;
  for (std::size_t n : config.sizes) {
    subsets.push_back(stratified_subset(dataset, n, derive_seed(config.seed, n)));
  }

  std::vector<std::future<CurvePoint>> jobs;
  for (std::size_t si = 0; si < config.sizes.size(); ++si) {
    for (ModelKind kind : config.kinds) {
      jobs.push_back(std::async(std::launch::async, [&, si, kind] {
        const std::size_t n = config.sizes[si];
        const LabeledDataset& subset = subsets[si];
        const Hyperparameters hyper = hyper_for(kind);
        const std::uint64_t cell_seed =
            derive_seed(config.seed, n, static_cast<std::uint64_t>(kind) + 1);
        std::vector<double> accs;
        if (kind == ModelKind::Knn) {
          accs = run_kfold(kind, subset, config.folds, hyper, cell_seed).fold_accuracies;
        } else {
          for (std::size_t r = 0; r < config.repeats; ++r) {
            const std::uint64_t s = derive_seed(cell_seed, r);
            const Split split = stratified_split(subset, config.test_fraction, s);
            accs.push_back(accuracy_on(*train(kind, split.train, hyper, s), split.test));
          }
        }
        return CurvePoint{n, kind, mean(accs), population_std(accs)};
      }));
    }
  }

  LearningCurve curve;
  curve.sizes = config.sizes;
  for (auto& j : jobs) curve.points.push_back(j.get());
  return curve;
}

void write_curve_csv(const std::filesystem::path& path, const LearningCurve& curve) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "n,model,accuracy_mean,accuracy_std\n";
  char buf[96];
  for (const auto& p : curve.points) {
    std::snprintf(buf, sizeof buf, "%zu,%s,%.6f,%.6f\n", p.n, std::string(to_string(p.kind)).c_str(),
                  p.accuracy_mean, p.accuracy_std);
    out << buf;
  }
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

}  // namespace gesture
