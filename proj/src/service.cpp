#include "gesture/service.hpp"

#include <charconv>
#include <random>
#include <sstream>

#include <httplib.h>

#include "gesture/errors.hpp"

namespace gesture {

namespace {

constexpr std::string_view kSessionsPrefix = "/api/sessions/";

// Accepts {"features": [10 numbers]} or a frame {"left": ..., "right": ...}.
std::optional<FeatureVector> features_from_body(const nlohmann::json& body) {
  if (!body.is_object()) throw InvalidFrame("body must be a JSON object");
  if (const auto it = body.find("features"); it != body.end()) {
    if (!it->is_array()) throw InvalidFrame("'features' must be an array");
    std::vector<double> values;
    for (const auto& v : *it) {
      if (!v.is_number()) throw InvalidFrame("'features' must contain numbers only");
      values.push_back(v.get<double>());
    }
    return make_features(values);
  }
  if (body.contains("left") || body.contains("right")) {
    return extract_features(frame_from_json(body));
  }
  return std::nullopt;
}

std::string random_token() {
  static thread_local std::mt19937_64 rng(std::random_device{}());
  std::ostringstream out;
  out << std::hex << rng();
  return out.str();
}

}  // namespace

std::string_view to_string(ApiErrorCode code) {
  switch (code) {
    case ApiErrorCode::InvalidFrame: return "invalid_frame";
    case ApiErrorCode::InvalidBody: return "invalid_body";
    case ApiErrorCode::UnknownSession: return "unknown_session";
    case ApiErrorCode::NotFound: return "not_found";
    case ApiErrorCode::ModelNotLoaded: return "model_not_loaded";
    case ApiErrorCode::BadModelFile: return "bad_model_file";
    case ApiErrorCode::VersionMismatch: return "version_mismatch";
    case ApiErrorCode::Internal: return "internal";
  }
  return "internal";
}

int http_status(ApiErrorCode code) {
  switch (code) {
    case ApiErrorCode::InvalidFrame:
    case ApiErrorCode::InvalidBody:
    case ApiErrorCode::BadModelFile: return 400;
    case ApiErrorCode::UnknownSession:
    case ApiErrorCode::NotFound: return 404;
    case ApiErrorCode::ModelNotLoaded: return 409;
    case ApiErrorCode::VersionMismatch: return 422;
    case ApiErrorCode::Internal: return 500;
  }
  return 500;
}

ApiResponse api_error(ApiErrorCode code, std::string message) {
  return {http_status(code), {{"code", std::string(to_string(code))}, {"message", std::move(message)}}};
}

nlohmann::json prediction_to_json(const Prediction& p) {
  nlohmann::json scores = nlohmann::json::object();
  for (std::size_t c = 0; c < kNumGestures; ++c) {
    scores[std::string(to_string(label_at(c)))] = p.scores[c];
  }
  return {{"label", std::string(to_string(p.label))}, {"scores", std::move(scores)}};
}

// ---------------------------------------------------------------------------

std::shared_ptr<const ModelSlot::Snapshot> ModelSlot::current() const {
  std::lock_guard lock(mutex_);
  return snapshot_;
}

void ModelSlot::store(TrainedModel model, std::string source) {
  auto next = std::make_shared<const Snapshot>(Snapshot{std::move(model), std::move(source)});
  std::lock_guard lock(mutex_);
  snapshot_ = std::move(next);
}

std::string SessionStore::create() {
  std::lock_guard lock(mutex_);
  std::string id = "s" + std::to_string(++counter_) + "-" + random_token();
  sessions_.emplace(id, std::make_shared<Entry>(id));
  return id;
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

// ---------------------------------------------------------------------------

void BartenderService::set_model(TrainedModel model, std::string source) {
  model_.store(std::move(model), std::move(source));
}

ApiResponse BartenderService::classify(const nlohmann::json& body) const {
  const auto snapshot = model_.current();
  if (!snapshot) return api_error(ApiErrorCode::ModelNotLoaded, "no model is loaded");
  try {
    const auto features = features_from_body(body);
    if (!features) {
      return api_error(ApiErrorCode::InvalidFrame, "body needs 'features' or 'left'/'right' hands");
    }
    return {200, prediction_to_json(snapshot->model->predict(*features))};
  } catch (const InvalidFrame& e) {
    return api_error(ApiErrorCode::InvalidFrame, e.what());
  }
}

ApiResponse BartenderService::create_session() {
  const std::string id = sessions_.create();
  ApiResponse r{201, {{"id", id}}};
  sessions_.with_session(id, [&](OrderSession& s) { r.body["session"] = session_to_json(s); });
  return r;
}

ApiResponse BartenderService::post_gesture(const std::string& id, const nlohmann::json& body) {
  if (!body.is_object()) return api_error(ApiErrorCode::InvalidBody, "body must be a JSON object");

  std::optional<GestureLabel> explicit_gesture;
  std::optional<FeatureVector> features;
  if (const auto it = body.find("gesture"); it != body.end()) {
    if (!it->is_string()) return api_error(ApiErrorCode::InvalidBody, "'gesture' must be a string");
    explicit_gesture = parse_gesture(it->get<std::string>());
    if (!explicit_gesture) {
      return api_error(ApiErrorCode::InvalidBody, "unknown gesture '" + it->get<std::string>() + "'");
    }
  } else {
    try {
      features = features_from_body(body);
    } catch (const InvalidFrame& e) {
      return api_error(ApiErrorCode::InvalidFrame, e.what());
    }
    if (!features) {
      return api_error(ApiErrorCode::InvalidBody, "body needs 'gesture', 'features' or a frame");
    }
  }

  std::shared_ptr<const ModelSlot::Snapshot> snapshot;
  if (features) {
    snapshot = model_.current();
    if (!snapshot) return api_error(ApiErrorCode::ModelNotLoaded, "no model is loaded");
  }

  ApiResponse r{200, nlohmann::json::object()};
  const bool found = sessions_.with_session(id, [&](OrderSession& s) {
    if (explicit_gesture) {
      r.body["outcome"] = std::string(to_string(s.apply_gesture(*explicit_gesture)));
    } else {
      const auto result = classify_and_apply(s, *features, snapshot->model, options_.min_score);
      r.body["prediction"] = prediction_to_json(result.prediction);
      r.body["outcome"] = std::string(to_string(result.outcome));
    }
    r.body["session"] = session_to_json(s);
  });
  if (!found) return api_error(ApiErrorCode::UnknownSession, "no session '" + id + "'");
  return r;
}

ApiResponse BartenderService::get_session(const std::string& id) {
  ApiResponse r{200, nullptr};
  if (!sessions_.with_session(id, [&](OrderSession& s) { r.body = session_to_json(s); })) {
    return api_error(ApiErrorCode::UnknownSession, "no session '" + id + "'");
  }
  return r;
}

ApiResponse BartenderService::get_model() const {
  const auto snapshot = model_.current();
  if (!snapshot) return api_error(ApiErrorCode::ModelNotLoaded, "no model is loaded");
  nlohmann::json classes = nlohmann::json::array();
  for (GestureLabel g : kAllGestures) classes.push_back(std::string(to_string(g)));
  return {200,
          {{"kind", std::string(to_string(snapshot->model->kind()))},
           {"trained_on", snapshot->model->trained_on()},
           {"source", snapshot->source},
           {"class_list", std::move(classes)}}};
}

ApiResponse BartenderService::load_model(const nlohmann::json& body) {
  if (!body.is_object() || !body.contains("path") || !body["path"].is_string()) {
    return api_error(ApiErrorCode::InvalidBody, "body must be {\"path\": string}");
  }
  const std::string path = body["path"].get<std::string>();
  try {
    TrainedModel model = gesture::load_model(path);
    const std::string kind(to_string(model->kind()));
    set_model(std::move(model), path);
    return {200, {{"status", "loaded"}, {"kind", kind}, {"path", path}}};
  } catch (const VersionMismatch& e) {
    return api_error(ApiErrorCode::VersionMismatch, e.what());
  } catch (const ModelError& e) {
    return api_error(ApiErrorCode::BadModelFile, e.what());
  }
}

ApiResponse BartenderService::handle(std::string_view method, std::string_view path,
                                     std::string_view body) {
  auto parsed = [&]() -> std::optional<nlohmann::json> {
    if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) return nlohmann::json::object();
    auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return j;
  };
  const auto bad_json = [] { return api_error(ApiErrorCode::InvalidBody, "body is not valid JSON"); };

  try {
    if (method == "POST" && path == "/api/classify") {
      const auto j = parsed();
      return j ? classify(*j) : bad_json();
    }
    if (method == "POST" && path == "/api/sessions") return create_session();
    if (method == "GET" && path == "/api/model") return get_model();
    if (method == "POST" && path == "/api/model/load") {
      const auto j = parsed();
      return j ? load_model(*j) : bad_json();
    }
    if (path.starts_with(kSessionsPrefix)) {
      std::string_view rest = path.substr(kSessionsPrefix.size());
      const auto slash = rest.find('/');
      const std::string id(rest.substr(0, slash));
      const std::string_view tail = slash == std::string_view::npos ? "" : rest.substr(slash);
      if (!id.empty() && method == "GET" && tail.empty()) return get_session(id);
      if (!id.empty() && method == "POST" && tail == "/gesture") {
        const auto j = parsed();
        return j ? post_gesture(id, *j) : bad_json();
      }
    }
  } catch (const std::exception& e) {
    return api_error(ApiErrorCode::Internal, e.what());
  }
  return api_error(ApiErrorCode::NotFound,
                   "no route for " + std::string(method) + " " + std::string(path));
}

// ---------------------------------------------------------------------------

ServerOptions parse_listen_address(std::string_view address, ServerOptions base) {
  std::string_view port_part = address;
  if (const auto colon = address.rfind(':'); colon != std::string_view::npos) {
    if (colon > 0) base.host = std::string(address.substr(0, colon));
    port_part = address.substr(colon + 1);
  }
  int port = 0;
  const auto [ptr, ec] = std::from_chars(port_part.data(), port_part.data() + port_part.size(), port);
  if (ec != std::errc() || ptr != port_part.data() + port_part.size() || port < 0 || port > 65535) {
    throw std::invalid_argument("invalid listen address '" + std::string(address) + "'");
  }
  base.port = port;
  return base;
}

struct HttpServer::Impl {
  Impl(BartenderService& svc, ServerOptions opts) : service(svc), options(std::move(opts)) {}

  BartenderService& service;
  ServerOptions options;
  httplib::Server server;
};

HttpServer::HttpServer(BartenderService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  auto& srv = impl_->server;
  const std::string origin = impl_->options.cors_origin;

  srv.set_default_headers({{"Access-Control-Allow-Origin", origin},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});

  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    const ApiResponse r = impl_->service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  srv.Get(R"(/api/.*)", route);
  srv.Post(R"(/api/.*)", route);
  srv.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  if (impl_->options.static_dir) {
    srv.set_mount_point("/", impl_->options.static_dir->string());
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  auto& o = impl_->options;
  if (o.port == 0) {
    o.port = impl_->server.bind_to_any_port(o.host);
    return o.port > 0 ? o.port : -1;
  }
  return impl_->server.bind_to_port(o.host, o.port) ? o.port : -1;
}

bool HttpServer::serve() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace gesture
