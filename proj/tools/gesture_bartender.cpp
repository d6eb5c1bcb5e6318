// gesture-bartender: data generation, training, evaluation and serving.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gesture/analysis.hpp"
#include "gesture/classifiers.hpp"
#include "gesture/dataset.hpp"
#include "gesture/errors.hpp"
#include "gesture/evaluation.hpp"
#include "gesture/feature_pipeline.hpp"
#include "gesture/service.hpp"

namespace {

using namespace gesture;

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;
constexpr const char* kAddrEnv = "GESTURE_BARTENDER_ADDR";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelFlags {
  std::string kind = "knn";
  std::string model_file;
  std::size_t neighbors = 2;
  double learning_rate = 0.01;
  std::size_t epochs = 500;
  double init_scale = 0.1;

  void add_to(CLI::App& cmd, bool allow_model_file) {
    cmd.add_option("--model", kind, "Model kind: knn, mlp or mlr")
        ->capture_default_str()
        ->check(CLI::IsMember({"knn", "mlp", "mlr"}, CLI::ignore_case));
    if (allow_model_file) {
      cmd.add_option("--model-file", model_file,
                     "Take model kind and hyperparameters from a saved model");
    }
    cmd.add_option("--neighbors", neighbors, "kNN neighbor count")->capture_default_str();
    cmd.add_option("--lr", learning_rate, "Gradient descent step length")->capture_default_str();
    cmd.add_option("--epochs", epochs, "Full-batch training epochs")->capture_default_str();
    cmd.add_option("--init-scale", init_scale, "Initial weight range [-s, s]")
        ->capture_default_str();
  }

  std::pair<ModelKind, Hyperparameters> resolve() const {
    if (!model_file.empty()) {
      const TrainedModel m = load_model(model_file);
      return {m->kind(), m->hyperparameters()};
    }
    const auto k = parse_model_kind(kind);
    if (!k) throw UsageError("unknown model kind '" + kind + "'");
    return {*k, Hyperparameters{neighbors, learning_rate, epochs, init_scale}};
  }
};

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream in(item);
    T v{};
    if (!(in >> v) || !(in >> std::ws).eof()) {
      throw UsageError(std::string("malformed ") + what + " entry '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", round_half_up(v, 2));
  return buf;
}

// ---------------------------------------------------------------------------

int run_generate(std::uint64_t seed, const std::string& out, const std::string& frames_out,
                 double sigma, const std::string& templates, const std::string& counts) {
  SyntheticConfig config;
  config.seed = seed;
  config.noise_sigma = sigma;
  if (!templates.empty()) config.templates = load_templates(templates);
  if (!counts.empty()) {
    const auto values = parse_list<std::size_t>(counts, "count");
    if (values.size() != kNumGestures) throw UsageError("--counts needs 8 comma-separated values");
    std::copy(values.begin(), values.end(), config.counts.begin());
  }
  const SyntheticData data = generate_synthetic(config);
  save_dataset_csv(out, data.dataset);
  if (!frames_out.empty()) {
    std::vector<LabeledFrame> frames;
    for (std::size_t i = 0; i < data.frames.size(); ++i) {
      frames.push_back({data.frames[i], data.dataset[i].label});
    }
    write_frames_jsonl(frames_out, frames);
  }
  std::cout << "wrote " << data.dataset.size() << " samples to " << out << '\n';
  return 0;
}

int run_train(const ModelFlags& flags, const std::string& data_path, const std::string& out,
              std::uint64_t seed) {
  const LabeledDataset data = load_dataset(data_path);
  const auto [kind, hyper] = flags.resolve();
  const TrainedModel model = train(kind, data, hyper, seed);
  save_model(*model, out);
  std::cout << "trained " << to_string(kind) << " on " << data.size() << " samples -> " << out
            << '\n';
  return 0;
}

int run_evaluate(const ModelFlags& flags, const std::string& data_path, double split,
                 std::uint64_t seed, const std::string& confusion_out,
                 const std::string& misclass_out, const std::string& format) {
  const LabeledDataset data = load_dataset(data_path);
  const auto [kind, hyper] = flags.resolve();
  const SplitValidationResult r = run_split_validation(kind, data, split, hyper, seed);

  if (!confusion_out.empty()) {
    std::ofstream cm(confusion_out);
    cm << confusion_to_json(r.confusion).dump(2) << '\n';
  }
  if (!misclass_out.empty()) write_scatter_csv(misclass_out, r.scatter);

  if (format == "json") {
    std::cout << nlohmann::json{{"model", std::string(to_string(kind))},
                                {"report", report_to_json(r.report)},
                                {"confusion", confusion_to_json(r.confusion)}}
                     .dump(2)
              << '\n';
  } else {
    std::cout << format_report(r.report) << '\n' << format_confusion(r.confusion);
  }
  return 0;
}

int run_kfold_cmd(const ModelFlags& flags, const std::string& data_path, std::size_t folds,
                  std::uint64_t seed, const std::string& format) {
  const LabeledDataset data = load_dataset(data_path);
  const auto [kind, hyper] = flags.resolve();
  const KFoldResult r = run_kfold(kind, data, folds, hyper, seed);
  if (format == "json") {
    std::cout << nlohmann::json{{"model", std::string(to_string(kind))},
                                {"fold_accuracies", r.fold_accuracies},
                                {"mean_accuracy", r.mean_accuracy}}
                     .dump(2)
              << '\n';
    return 0;
  }
  std::cout << "k-Fold ";
  for (std::size_t f = 0; f < r.fold_accuracies.size(); ++f) std::cout << '\t' << f + 1;
  std::cout << "\n       ";
  for (double a : r.fold_accuracies) std::cout << '\t' << fmt2(a);
  std::cout << "\nAverage\t" << fmt2(r.mean_accuracy) << '\n';
  return 0;
}

int run_curve(const std::string& data_path, const std::string& models, const std::string& sizes,
              std::size_t repeats, std::size_t folds, std::uint64_t seed, const std::string& out,
              const std::string& format) {
  const LabeledDataset data = load_dataset(data_path);
  CurveConfig config;
  config.seed = seed;
  config.repeats = repeats;
  config.folds = folds;
  config.sizes = parse_list<std::size_t>(sizes, "size");
  config.kinds.clear();
  std::stringstream ss(models);
  std::string name;
  while (std::getline(ss, name, ',')) {
    const auto k = parse_model_kind(name);
    if (!k) throw UsageError("unknown model kind '" + name + "'");
    config.kinds.push_back(*k);
  }
  const LearningCurve curve = run_learning_curve(data, config);
  if (!out.empty()) write_curve_csv(out, curve);

  if (format == "json") {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : curve.points) {
      points.push_back({{"n", p.n},
                        {"model", std::string(to_string(p.kind))},
                        {"accuracy_mean", p.accuracy_mean},
                        {"accuracy_std", p.accuracy_std}});
    }
    std::cout << points.dump(2) << '\n';
  } else {
    std::printf("%6s %6s %14s %13s\n", "n", "model", "accuracy_mean", "accuracy_std");
    for (const auto& p : curve.points) {
      std::printf("%6zu %6s %14.4f %13.4f\n", p.n, std::string(to_string(p.kind)).c_str(),
                  p.accuracy_mean, p.accuracy_std);
    }
  }
  return 0;
}

int run_pca(const std::string& data_path, const std::string& out, const std::string& format) {
  const LabeledDataset data = load_dataset(data_path);
  const PcaProjection pca = fit_pca(data);
  if (!out.empty()) write_projection_csv(out, pca, data);
  const nlohmann::json j{{"mean", pca.mean},
                         {"components", pca.components},
                         {"eigenvalues", pca.eigenvalues}};
  if (format == "json") {
    std::cout << j.dump(2) << '\n';
  } else {
    std::printf("eigenvalues: %.6f %.6f\n", pca.eigenvalues[0], pca.eigenvalues[1]);
    if (!out.empty()) std::cout << "wrote projection of " << data.size() << " samples to " << out << '\n';
  }
  return 0;
}

int run_classify(const std::string& model_file, const std::string& features,
                 const std::string& frames, const std::string& format) {
  if (features.empty() == frames.empty()) {
    throw UsageError("classify needs exactly one of --features or --frames");
  }
  const TrainedModel model = load_model(model_file);
  std::vector<FeatureVector> inputs;
  if (!features.empty()) {
    inputs.push_back(make_features(parse_list<double>(features, "feature")));
  } else {
    for (const auto& f : read_frames_jsonl(frames)) inputs.push_back(extract_features(f.frame));
  }
  for (const auto& x : inputs) {
    const Prediction p = model->predict(x);
    if (format == "json") {
      std::cout << prediction_to_json(p).dump() << '\n';
    } else {
      std::cout << to_string(p.label) << '\n';
    }
  }
  return 0;
}

int run_serve(const std::string& model_file, std::string addr, const std::string& static_dir,
              const std::string& cors_origin, double min_score) {
  if (addr.empty()) {
    const char* env = std::getenv(kAddrEnv);
    addr = env && *env ? env : "127.0.0.1:8080";
  }
  ServerOptions options;
  try {
    options = parse_listen_address(addr);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  options.cors_origin = cors_origin;
  if (!static_dir.empty()) options.static_dir = static_dir;

  BartenderService service(BartenderService::Options{min_score});
  if (!model_file.empty()) service.set_model(load_model(model_file), model_file);

  // Block termination signals before any thread starts so sigwait owns them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  HttpServer server(service, options);
  const int port = server.bind();
  if (port < 0) {
    std::cerr << "error: cannot listen on " << addr << '\n';
    return kExitData;
  }
  std::cout << "listening on http://" << options.host << ':' << port << std::endl;

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.serve();
  // Wake the waiter if serve() returned on its own.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Static two-hand gesture recognition for a bar ordering kiosk"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  std::uint64_t seed = 42;
  std::string data_path;
  std::string out;
  std::string format = "text";
  auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", format, "Output format")
        ->capture_default_str()
        ->check(CLI::IsMember({"text", "json"}));
  };

  // generate
  double sigma = 0.05;
  std::string frames_out;
  std::string templates;
  std::string counts;
  auto* generate = app.add_subcommand("generate", "Generate a synthetic labeled dataset");
  generate->add_option("--seed", seed, "Random seed")->capture_default_str();
  generate->add_option("--out", out, "Feature CSV to write")->required();
  generate->add_option("--frames-out", frames_out, "Also write raw frames as JSON Lines");
  generate->add_option("--sigma", sigma, "Gaussian noise on template features")->capture_default_str();
  generate->add_option("--templates", templates, "Template JSON file (default: built-in)");
  generate->add_option("--counts", counts,
                       "Eight comma-separated per-class counts (default 66,63,63,65,64,64,63,80)");

  // train
  ModelFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train a model and save it as JSON");
  train_flags.add_to(*train_cmd, false);
  train_cmd->add_option("--data", data_path, "Feature CSV or labeled frame JSONL")->required();
  train_cmd->add_option("--out", out, "Model file to write")->required();
  train_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();

  // evaluate
  ModelFlags eval_flags;
  double split = 0.3;
  std::string confusion_out;
  std::string misclass_out;
  auto* evaluate = app.add_subcommand("evaluate", "Stratified split validation report");
  eval_flags.add_to(*evaluate, true);
  evaluate->add_option("--data", data_path, "Feature CSV or labeled frame JSONL")->required();
  evaluate->add_option("--split", split, "Test fraction")->capture_default_str();
  evaluate->add_option("--seed", seed, "Random seed")->capture_default_str();
  evaluate->add_option("--confusion-out", confusion_out, "Write the confusion matrix as JSON");
  evaluate->add_option("--misclass-out", misclass_out, "Write the PCA misclassification CSV");
  add_format(evaluate);

  // kfold
  ModelFlags kfold_flags;
  std::size_t folds = 5;
  auto* kfold = app.add_subcommand("kfold", "k-fold cross validation");
  kfold_flags.add_to(*kfold, true);
  kfold->add_option("--data", data_path, "Feature CSV or labeled frame JSONL")->required();
  kfold->add_option("--k", folds, "Number of folds")->capture_default_str();
  kfold->add_option("--seed", seed, "Random seed")->capture_default_str();
  add_format(kfold);

  // curve
  std::string models = "knn,mlp,mlr";
  std::string sizes = "50,100,150,200,250,300,350,400,450,500";
  std::size_t repeats = 5;
  std::size_t curve_folds = 5;
  auto* curve = app.add_subcommand("curve", "Accuracy versus training-set size");
  curve->add_option("--data", data_path, "Feature CSV or labeled frame JSONL")->required();
  curve->add_option("--models", models, "Comma-separated model kinds")->capture_default_str();
  curve->add_option("--sizes", sizes, "Comma-separated subset sizes")->capture_default_str();
  curve->add_option("--repeats", repeats, "Train/test repeats for the networks")->capture_default_str();
  curve->add_option("--folds", curve_folds, "Cross-validation folds for kNN")->capture_default_str();
  curve->add_option("--seed", seed, "Random seed")->capture_default_str();
  curve->add_option("--out", out, "CSV to write (n,model,accuracy_mean,accuracy_std)");
  add_format(curve);

  // pca
  auto* pca = app.add_subcommand("pca", "Project the dataset onto two principal components");
  pca->add_option("--data", data_path, "Feature CSV or labeled frame JSONL")->required();
  pca->add_option("--out", out, "Projection CSV to write (pc1,pc2,label)");
  add_format(pca);

  // classify
  std::string model_file;
  std::string features;
  std::string frames;
  auto* classify = app.add_subcommand("classify", "Classify a feature vector or frame file");
  classify->add_option("--model-file", model_file, "Saved model")->required();
  classify->add_option("--features", features, "Ten comma-separated feature values");
  classify->add_option("--frames", frames, "Frame JSON Lines file, one prediction per line");
  add_format(classify);

  // serve
  std::string addr;
  std::string static_dir;
  std::string cors_origin = "*";
  double min_score = 0.0;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--model-file", model_file, "Model to serve at startup");
  serve->add_option("--addr", addr,
                    std::string("Listen address host:port (default $") + kAddrEnv +
                        " or 127.0.0.1:8080)");
  serve->add_option("--static-dir", static_dir, "Directory of web UI assets served at /");
  serve->add_option("--cors-origin", cors_origin, "Access-Control-Allow-Origin value")
      ->capture_default_str();
  serve->add_option("--min-score", min_score, "Reject predictions whose top score is lower")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*generate) return run_generate(seed, out, frames_out, sigma, templates, counts);
    if (*train_cmd) return run_train(train_flags, data_path, out, seed);
    if (*evaluate) {
      return run_evaluate(eval_flags, data_path, split, seed, confusion_out, misclass_out, format);
    }
    if (*kfold) return run_kfold_cmd(kfold_flags, data_path, folds, seed, format);
    if (*curve) return run_curve(data_path, models, sizes, repeats, curve_folds, seed, out, format);
    if (*pca) return run_pca(data_path, out, format);
    if (*classify) return run_classify(model_file, features, frames, format);
    if (*serve) return run_serve(model_file, addr, static_dir, cors_origin, min_score);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
