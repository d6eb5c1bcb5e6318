#include "gesture/classifiers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "gesture/errors.hpp"

namespace gesture {

namespace {

template <typename Matrix>
void fill_uniform(Matrix& m, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
  }
}

// Locate flat index `i` inside a list of column-major blocks.
template <typename... Blocks>
double& flat_at(std::size_t i, Blocks&... blocks) {
  double* found = nullptr;
  auto visit = [&](auto& block) {
    if (found) return;
    const auto n = static_cast<std::size_t>(block.size());
    if (i < n) {
      found = block.data() + i;
    } else {
      i -= n;
    }
  };
  (visit(blocks), ...);
  if (!found) throw std::out_of_range("parameter index out of range");
  return *found;
}

Eigen::Matrix<double, kClasses, Eigen::Dynamic> one_hot(const std::vector<GestureLabel>& targets) {
  Eigen::Matrix<double, kClasses, Eigen::Dynamic> y =
      Eigen::Matrix<double, kClasses, Eigen::Dynamic>::Zero(kClasses,
                                                             static_cast<Eigen::Index>(targets.size()));
  for (std::size_t n = 0; n < targets.size(); ++n) {
    y(static_cast<Eigen::Index>(index_of(targets[n])), static_cast<Eigen::Index>(n)) = 1.0;
  }
  return y;
}

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& a) {
  return (1.0 / (1.0 + (-a.array()).exp())).matrix();
}

// Column-wise softmax and the mean negative log-likelihood of the targets.
struct SoftmaxResult {
  Eigen::Matrix<double, kClasses, Eigen::Dynamic> probs;
  double loss = 0.0;
};

SoftmaxResult batch_softmax(const Eigen::Matrix<double, kClasses, Eigen::Dynamic>& logits,
                            const std::vector<GestureLabel>& targets) {
  SoftmaxResult out;
  out.probs.resize(kClasses, logits.cols());
  double total = 0.0;
  for (Eigen::Index n = 0; n < logits.cols(); ++n) {
    const double max = logits.col(n).maxCoeff();
    const ClassVector shifted = logits.col(n).array() - max;
    const double log_sum = std::log(shifted.array().exp().sum());
    out.probs.col(n) = (shifted.array() - log_sum).exp();
    total -= shifted(static_cast<Eigen::Index>(index_of(targets[static_cast<std::size_t>(n)]))) -
             log_sum;
  }
  out.loss = logits.cols() > 0 ? total / static_cast<double>(logits.cols()) : 0.0;
  return out;
}

Prediction prediction_from(const ClassVector& probs) {
  Prediction p{};
  for (std::size_t c = 0; c < kNumGestures; ++c) p.scores[c] = probs(static_cast<Eigen::Index>(c));
  p.label = label_at(argmax(p.scores));
  return p;
}

template <typename Matrix>
nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename Vector>
nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

double finite_number(const nlohmann::json& j) {
  if (!j.is_number()) throw ModelError("model parameter is not a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ModelError("model parameter is not finite");
  return v;
}

template <typename Matrix>
void matrix_from_json(const nlohmann::json& j, Matrix& m, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != m.rows()) {
    throw ModelError(std::string("model field '") + name + "' has the wrong row count");
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m.cols()) {
      throw ModelError(std::string("model field '") + name + "' has the wrong column count");
    }
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(i, c) = finite_number(row[static_cast<std::size_t>(c)]);
  }
}

template <typename Vector>
void vector_from_json(const nlohmann::json& j, Vector& v, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != v.size()) {
    throw ModelError(std::string("model field '") + name + "' has the wrong length");
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = finite_number(j[static_cast<std::size_t>(i)]);
}

void require_trainable(const LabeledDataset& train_set) {
  if (train_set.empty()) throw ModelError("training set is empty");
}

// Gradients are of the mean loss; descent runs on the summed loss.
double summed_loss_step(const Hyperparameters& hyper, const LabeledDataset& train_set) {
  return hyper.learning_rate * static_cast<double>(train_set.size());
}

template <typename Params, typename Loss>
double central_difference_error(Params& p, const Params& analytic, double epsilon, Loss&& loss) {
  double worst = 0.0;
  for (std::size_t i = 0; i < Params::count(); ++i) {
    const double saved = p.at(i);
    p.at(i) = saved + epsilon;
    const double up = loss(p);
    p.at(i) = saved - epsilon;
    const double down = loss(p);
    p.at(i) = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double a = analytic.at(i);
    const double err = std::abs(a - numeric) / std::max(1.0, std::abs(a) + std::abs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Knn: return "Knn";
    case ModelKind::Mlp: return "Mlp";
    case ModelKind::Mlr: return "Mlr";
  }
  return "?";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "knn") return ModelKind::Knn;
  if (lower == "mlp") return ModelKind::Mlp;
  if (lower == "mlr" || lower == "softmax") return ModelKind::Mlr;
  return std::nullopt;
}

Hyperparameters default_hyperparameters(ModelKind) { return Hyperparameters{}; }

std::size_t argmax(const Scores& scores) {
  return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

// ---------------------------------------------------------------------------

KnnModel::KnnModel(std::size_t k, std::vector<Sample> points, std::string trained_on)
    : Classifier(Hyperparameters{.k = k}, std::move(trained_on)), points_(std::move(points)) {
  if (k == 0) throw ModelError("kNN needs k >= 1");
  if (points_.empty()) throw ModelError("kNN needs at least one stored point");
  if (k > points_.size()) throw ModelError("kNN: k exceeds the number of stored points");
}

Prediction KnnModel::predict(const FeatureVector& x) const {
  struct Neighbor {
    double dist2;
    std::size_t index;
  };
  std::vector<Neighbor> all(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    double d2 = 0.0;
    for (std::size_t f = 0; f < kFeatureDim; ++f) {
      const double diff = x[f] - points_[i].features[f];
      d2 += diff * diff;
    }
    all[i] = {d2, i};
  }
  const std::size_t k = this->k();
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(),
                    [](const Neighbor& a, const Neighbor& b) {
                      return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
                    });

  std::array<std::size_t, kNumGestures> votes{};
  for (std::size_t n = 0; n < k; ++n) ++votes[index_of(points_[all[n].index].label)];
  const std::size_t best = *std::max_element(votes.begin(), votes.end());

  Prediction p{};
  for (std::size_t n = 0; n < k; ++n) {
    const GestureLabel label = points_[all[n].index].label;
    if (votes[index_of(label)] == best) {
      p.label = label;
      break;
    }
  }
  for (std::size_t c = 0; c < kNumGestures; ++c) {
    p.scores[c] = static_cast<double>(votes[c]) / static_cast<double>(k);
  }
  return p;
}

nlohmann::json KnnModel::parameters_json() const {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& s : points_) {
    points.push_back({{"label", std::string(to_string(s.label))}, {"features", s.features.values}});
  }
  return {{"points", std::move(points)}};
}

// ---------------------------------------------------------------------------

MlpParameters MlpParameters::random(double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  MlpParameters p;
  fill_uniform(p.weights_in, scale, rng);
  fill_uniform(p.bias_in, scale, rng);
  fill_uniform(p.weights_out, scale, rng);
  fill_uniform(p.bias_out, scale, rng);
  return p;
}

double& MlpParameters::at(std::size_t i) { return flat_at(i, weights_in, bias_in, weights_out, bias_out); }

double MlpParameters::at(std::size_t i) const { return const_cast<MlpParameters&>(*this).at(i); }

MlrParameters MlrParameters::random(double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  MlrParameters p;
  fill_uniform(p.weights, scale, rng);
  fill_uniform(p.bias, scale, rng);
  return p;
}

double& MlrParameters::at(std::size_t i) { return flat_at(i, weights, bias); }

double MlrParameters::at(std::size_t i) const { return const_cast<MlrParameters&>(*this).at(i); }

ClassVector softmax(const ClassVector& logits) {
  const ClassVector e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

InputVector to_input(const FeatureVector& x) {
  return Eigen::Map<const InputVector>(x.values.data());
}

Batch to_batch(const LabeledDataset& data) {
  Batch b;
  b.inputs.resize(kInputs, static_cast<Eigen::Index>(data.size()));
  b.targets.reserve(data.size());
  for (std::size_t n = 0; n < data.size(); ++n) {
    b.inputs.col(static_cast<Eigen::Index>(n)) = to_input(data[n].features);
    b.targets.push_back(data[n].label);
  }
  return b;
}

ClassVector mlp_probabilities(const MlpParameters& p, const InputVector& x) {
  const Eigen::Matrix<double, kHidden, 1> h = sigmoid(p.weights_in * x + p.bias_in);
  return softmax(p.weights_out * h + p.bias_out);
}

ClassVector mlr_probabilities(const MlrParameters& p, const InputVector& x) {
  return softmax(p.weights * x + p.bias);
}

double mlp_loss(const MlpParameters& p, const Batch& batch) {
  const Eigen::Matrix<double, kHidden, Eigen::Dynamic> h =
      sigmoid((p.weights_in * batch.inputs).colwise() + p.bias_in);
  return batch_softmax((p.weights_out * h).colwise() + p.bias_out, batch.targets).loss;
}

double mlr_loss(const MlrParameters& p, const Batch& batch) {
  return batch_softmax((p.weights * batch.inputs).colwise() + p.bias, batch.targets).loss;
}

MlpParameters mlp_gradient(const MlpParameters& p, const Batch& batch) {
  const auto n = static_cast<double>(batch.inputs.cols());
  const Eigen::Matrix<double, kHidden, Eigen::Dynamic> h =
      sigmoid((p.weights_in * batch.inputs).colwise() + p.bias_in);
  const auto sm = batch_softmax((p.weights_out * h).colwise() + p.bias_out, batch.targets);

  const Eigen::Matrix<double, kClasses, Eigen::Dynamic> d_logits = (sm.probs - one_hot(batch.targets)) / n;
  const Eigen::Matrix<double, kHidden, Eigen::Dynamic> d_hidden =
      ((p.weights_out.transpose() * d_logits).array() * h.array() * (1.0 - h.array())).matrix();

  MlpParameters g;
  g.weights_out = d_logits * h.transpose();
  g.bias_out = d_logits.rowwise().sum();
  g.weights_in = d_hidden * batch.inputs.transpose();
  g.bias_in = d_hidden.rowwise().sum();
  return g;
}

MlrParameters mlr_gradient(const MlrParameters& p, const Batch& batch) {
  const auto n = static_cast<double>(batch.inputs.cols());
  const auto sm = batch_softmax((p.weights * batch.inputs).colwise() + p.bias, batch.targets);
  const Eigen::Matrix<double, kClasses, Eigen::Dynamic> d_logits = (sm.probs - one_hot(batch.targets)) / n;
  MlrParameters g;
  g.weights = d_logits * batch.inputs.transpose();
  g.bias = d_logits.rowwise().sum();
  return g;
}

MlpModel::MlpModel(MlpParameters params, Hyperparameters hyper, std::string trained_on)
    : Classifier(hyper, std::move(trained_on)), params_(std::move(params)) {}

Prediction MlpModel::predict(const FeatureVector& x) const {
  return prediction_from(mlp_probabilities(params_, to_input(x)));
}

nlohmann::json MlpModel::parameters_json() const {
  return {{"weights_in", matrix_to_json(params_.weights_in)},
          {"bias_in", vector_to_json(params_.bias_in)},
          {"weights_out", matrix_to_json(params_.weights_out)},
          {"bias_out", vector_to_json(params_.bias_out)}};
}

MlrModel::MlrModel(MlrParameters params, Hyperparameters hyper, std::string trained_on)
    : Classifier(hyper, std::move(trained_on)), params_(std::move(params)) {}

Prediction MlrModel::predict(const FeatureVector& x) const {
  return prediction_from(mlr_probabilities(params_, to_input(x)));
}

nlohmann::json MlrModel::parameters_json() const {
  return {{"weights", matrix_to_json(params_.weights)}, {"bias", vector_to_json(params_.bias)}};
}

// ---------------------------------------------------------------------------

std::shared_ptr<const KnnModel> train_knn(const LabeledDataset& train_set, std::size_t k) {
  require_trainable(train_set);
  if (k > train_set.size()) throw ModelError("kNN: k exceeds the training set size");
  return std::make_shared<const KnnModel>(k, train_set.samples(), train_set.provenance());
}

std::shared_ptr<const MlpModel> train_mlp(const LabeledDataset& train_set,
                                          const Hyperparameters& hyper, std::uint64_t seed,
                                          std::vector<double>* loss_history) {
  require_trainable(train_set);
  const Batch batch = to_batch(train_set);
  MlpParameters p = MlpParameters::random(hyper.init_scale, seed);
  if (loss_history) loss_history->push_back(mlp_loss(p, batch));
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    const MlpParameters g = mlp_gradient(p, batch);
    const double step = summed_loss_step(hyper, train_set);
    p.weights_in -= step * g.weights_in;
    p.bias_in -= step * g.bias_in;
    p.weights_out -= step * g.weights_out;
    p.bias_out -= step * g.bias_out;
    if (loss_history) loss_history->push_back(mlp_loss(p, batch));
  }
  return std::make_shared<const MlpModel>(std::move(p), hyper, train_set.provenance());
}

std::shared_ptr<const MlrModel> train_mlr(const LabeledDataset& train_set,
                                          const Hyperparameters& hyper, std::uint64_t seed,
                                          std::vector<double>* loss_history) {
  require_trainable(train_set);
  const Batch batch = to_batch(train_set);
  MlrParameters p = MlrParameters::random(hyper.init_scale, seed);
  if (loss_history) loss_history->push_back(mlr_loss(p, batch));
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    const MlrParameters g = mlr_gradient(p, batch);
    const double step = summed_loss_step(hyper, train_set);
    p.weights -= step * g.weights;
    p.bias -= step * g.bias;
    if (loss_history) loss_history->push_back(mlr_loss(p, batch));
  }
  return std::make_shared<const MlrModel>(std::move(p), hyper, train_set.provenance());
}

TrainedModel train(ModelKind kind, const LabeledDataset& train_set, const Hyperparameters& hyper,
                   std::uint64_t seed, std::vector<double>* loss_history) {
  switch (kind) {
    case ModelKind::Knn: return train_knn(train_set, hyper.k);
    case ModelKind::Mlp: return train_mlp(train_set, hyper, seed, loss_history);
    case ModelKind::Mlr: return train_mlr(train_set, hyper, seed, loss_history);
  }
  throw ModelError("unknown model kind");
}

Prediction predict(const TrainedModel& model, const FeatureVector& x) {
  if (!model) throw ModelError("model is not trained");
  return model->predict(x);
}

// ---------------------------------------------------------------------------

double gradient_check(const MlpParameters& p, const FeatureVector& x, GestureLabel target,
                      double epsilon) {
  Batch batch{to_input(x), {target}};
  MlpParameters probe = p;
  return central_difference_error(probe, mlp_gradient(p, batch), epsilon,
                                   [&](const MlpParameters& q) { return mlp_loss(q, batch); });
}

double gradient_check(const MlrParameters& p, const FeatureVector& x, GestureLabel target,
                      double epsilon) {
  Batch batch{to_input(x), {target}};
  MlrParameters probe = p;
  return central_difference_error(probe, mlr_gradient(p, batch), epsilon,
                                  [&](const MlrParameters& q) { return mlr_loss(q, batch); });
}

double gradient_check(ModelKind kind, const FeatureVector& x, GestureLabel target,
                      std::uint64_t seed, double epsilon) {
  switch (kind) {
    case ModelKind::Mlp: return gradient_check(MlpParameters::random(1.0, seed), x, target, epsilon);
    case ModelKind::Mlr: return gradient_check(MlrParameters::random(1.0, seed), x, target, epsilon);
    case ModelKind::Knn: break;
  }
  throw ModelError("gradient check applies to Mlp and Mlr only");
}

// ---------------------------------------------------------------------------

nlohmann::json model_to_json(const Classifier& model) {
  const auto& h = model.hyperparameters();
  nlohmann::json hyper;
  if (model.kind() == ModelKind::Knn) {
    hyper = {{"k", h.k}};
  } else {
    hyper = {{"learning_rate", h.learning_rate}, {"epochs", h.epochs}, {"init_scale", h.init_scale}};
  }
  nlohmann::json classes = nlohmann::json::array();
  for (GestureLabel g : kAllGestures) classes.push_back(std::string(to_string(g)));
  return {{"format_version", std::string(kModelFormatVersion)},
          {"kind", std::string(to_string(model.kind()))},
          {"trained_on", model.trained_on()},
          {"class_list", std::move(classes)},
          {"hyperparameters", std::move(hyper)},
          {"parameters", model.parameters_json()}};
}

TrainedModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ModelError("model file must hold a JSON object");
  const auto version = j.find("format_version");
  if (version == j.end()) throw VersionMismatch("model file has no format_version");
  const std::string v = version->is_string() ? version->get<std::string>() : version->dump();
  if (v != kModelFormatVersion) {
    throw VersionMismatch("model format version '" + v + "' is not supported (expected '" +
                          std::string(kModelFormatVersion) + "')");
  }
  try {
    const auto kind = parse_model_kind(j.at("kind").get<std::string>());
    if (!kind) throw ModelError("unknown model kind '" + j.at("kind").get<std::string>() + "'");
    const std::string trained_on = j.value("trained_on", std::string{});
    const auto& hj = j.at("hyperparameters");
    const auto& pj = j.at("parameters");

    Hyperparameters h = default_hyperparameters(*kind);
    if (*kind == ModelKind::Knn) {
      h.k = hj.at("k").get<std::size_t>();
      std::vector<Sample> points;
      for (const auto& item : pj.at("points")) {
        const auto label = parse_gesture(item.at("label").get<std::string>());
        if (!label) throw ModelError("unknown label in kNN point");
        points.push_back({make_features(item.at("features").get<std::vector<double>>()), *label});
      }
      return std::make_shared<const KnnModel>(h.k, std::move(points), trained_on);
    }
    h.learning_rate = hj.at("learning_rate").get<double>();
    h.epochs = hj.at("epochs").get<std::size_t>();
    h.init_scale = hj.value("init_scale", h.init_scale);
    if (*kind == ModelKind::Mlp) {
      MlpParameters p;
      matrix_from_json(pj.at("weights_in"), p.weights_in, "weights_in");
      vector_from_json(pj.at("bias_in"), p.bias_in, "bias_in");
      matrix_from_json(pj.at("weights_out"), p.weights_out, "weights_out");
      vector_from_json(pj.at("bias_out"), p.bias_out, "bias_out");
      return std::make_shared<const MlpModel>(std::move(p), h, trained_on);
    }
    MlrParameters p;
    matrix_from_json(pj.at("weights"), p.weights, "weights");
    vector_from_json(pj.at("bias"), p.bias, "bias");
    return std::make_shared<const MlrModel>(std::move(p), h, trained_on);
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("corrupt model file: ") + e.what());
  } catch (const InvalidFrame& e) {
    throw ModelError(std::string("corrupt model file: ") + e.what());
  }
}

void save_model(const Classifier& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write " + path.string());
  out << model_to_json(model).dump(1) << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ModelError("corrupt model file " + path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace gesture
