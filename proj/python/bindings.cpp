#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gesture/analysis.hpp"
#include "gesture/classifiers.hpp"
#include "gesture/errors.hpp"
#include "gesture/evaluation.hpp"
#include "gesture/session.hpp"

namespace py = pybind11;
using namespace gesture;

namespace {

GestureLabel label_arg(const std::string& name) {
  const auto g = parse_gesture(name);
  if (!g) throw py::value_error("unknown gesture '" + name + "'");
  return *g;
}

ModelKind kind_arg(const std::string& name) {
  const auto k = parse_model_kind(name);
  if (!k) throw py::value_error("unknown model kind '" + name + "'");
  return *k;
}

LabeledDataset dataset_arg(const std::vector<std::vector<double>>& features,
                           const std::vector<std::string>& labels) {
  if (features.size() != labels.size()) throw py::value_error("features and labels differ in length");
  std::vector<Sample> samples;
  samples.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    samples.push_back({make_features(features[i]), label_arg(labels[i])});
  }
  return LabeledDataset(std::move(samples), "python");
}

std::vector<double> to_list(const FeatureVector& fv) { return {fv.values.begin(), fv.values.end()}; }

py::dict prediction_dict(const Prediction& p) {
  py::dict scores;
  for (std::size_t c = 0; c < kNumGestures; ++c) scores[py::str(std::string(to_string(label_at(c))))] = p.scores[c];
  py::dict d;
  d["label"] = std::string(to_string(p.label));
  d["scores"] = scores;
  return d;
}

// Thin holder so Python sees one model type for every kind.
struct PyModel {
  TrainedModel model;

  std::string kind() const { return std::string(to_string(model->kind())); }
  py::dict predict(const std::vector<double>& x) const { return prediction_dict(model->predict(make_features(x))); }
  void save(const std::string& path) const { save_model(*model, path); }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Static hand gesture classification core";

  // Translators run newest first, so the base class goes first.
  py::register_exception<Error>(m, "GestureError", PyExc_RuntimeError);
  py::register_exception<InvalidFrame>(m, "InvalidFrame", PyExc_ValueError);
  py::register_exception<VersionMismatch>(m, "VersionMismatch", PyExc_ValueError);

  m.attr("GESTURES") = [] {
    std::vector<std::string> names;
    for (GestureLabel g : kAllGestures) names.emplace_back(to_string(g));
    return names;
  }();

  m.def(
      "normalize_hand",
      [](const std::array<double, kFingersPerHand>& d) { return normalize_hand(d); },
      py::arg("distances"));

  m.def(
      "extract_features",
      [](const std::string& frame_json) {
        return to_list(extract_features(frame_from_json(nlohmann::json::parse(frame_json))));
      },
      py::arg("frame_json"), "Feature vector of a frame given as a JSON string.");

  m.def(
      "generate_synthetic",
      [](std::uint64_t seed, double sigma) {
        SyntheticConfig cfg;
        cfg.seed = seed;
        cfg.noise_sigma = sigma;
        const auto data = generate_synthetic(cfg);
        std::vector<std::vector<double>> features;
        std::vector<std::string> labels;
        for (const auto& s : data.dataset.samples()) {
          features.push_back(to_list(s.features));
          labels.emplace_back(to_string(s.label));
        }
        return py::make_tuple(features, labels);
      },
      py::arg("seed") = 42, py::arg("sigma") = 0.05);

  py::class_<PyModel>(m, "Model")
      .def_property_readonly("kind", &PyModel::kind)
      .def("predict", &PyModel::predict, py::arg("features"))
      .def("save", &PyModel::save, py::arg("path"));

  m.def(
      "train",
      [](const std::string& kind, const std::vector<std::vector<double>>& features,
         const std::vector<std::string>& labels, std::uint64_t seed, std::size_t k, double learning_rate,
         std::size_t epochs) {
        Hyperparameters h;
        h.k = k;
        h.learning_rate = learning_rate;
        h.epochs = epochs;
        const auto data = dataset_arg(features, labels);
        py::gil_scoped_release release;
        return PyModel{train(kind_arg(kind), data, h, seed)};
      },
      py::arg("kind"), py::arg("features"), py::arg("labels"), py::arg("seed") = 0, py::arg("k") = 2,
      py::arg("learning_rate") = 0.01, py::arg("epochs") = 500);

  m.def(
      "load_model", [](const std::string& path) { return PyModel{load_model(path)}; }, py::arg("path"));

  m.def(
      "classification_report",
      [](const std::vector<std::string>& actual, const std::vector<std::string>& predicted) {
        std::vector<GestureLabel> a, p;
        for (const auto& s : actual) a.push_back(label_arg(s));
        for (const auto& s : predicted) p.push_back(label_arg(s));
        return report_to_json(classification_report(confusion_matrix(a, p))).dump();
      },
      py::arg("actual"), py::arg("predicted"), "Report as a JSON string.");

  m.def(
      "fit_pca",
      [](const std::vector<std::vector<double>>& rows) {
        std::vector<FeatureVector> fv;
        for (const auto& r : rows) fv.push_back(make_features(r));
        const auto pca = fit_pca(fv);
        std::vector<std::pair<double, double>> projected;
        for (const auto& r : fv) projected.push_back(pca.project(r));
        return py::make_tuple(pca.eigenvalues, pca.components, projected);
      },
      py::arg("rows"), "Returns (eigenvalues, components, projected rows).");

  py::class_<OrderSession>(m, "OrderSession")
      .def(py::init<std::string>(), py::arg("id") = "")
      .def(
          "apply",
          [](OrderSession& s, const std::string& g) { return std::string(to_string(s.apply_gesture(label_arg(g)))); },
          py::arg("gesture"))
      .def_property_readonly("phase", [](const OrderSession& s) { return std::string(to_string(s.phase())); })
      .def_property_readonly("items",
                             [](const OrderSession& s) {
                               std::vector<std::string> out;
                               for (auto i : s.items()) out.emplace_back(to_string(i));
                               return out;
                             })
      .def_property_readonly("payment",
                             [](const OrderSession& s) -> std::optional<std::string> {
                               if (!s.payment()) return std::nullopt;
                               return std::string(to_string(*s.payment()));
                             })
      .def("to_json", [](const OrderSession& s) { return session_to_json(s).dump(); });
}
