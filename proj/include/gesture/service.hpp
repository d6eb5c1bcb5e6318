#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "gesture/classifiers.hpp"
#include "gesture/session.hpp"

namespace gesture {

/// Closed set of machine-readable error codes returned by the API.
enum class ApiErrorCode {
  InvalidFrame,     // 400
  InvalidBody,      // 400
  UnknownSession,   // 404
  NotFound,         // 404
  ModelNotLoaded,   // 409
  BadModelFile,     // 400
  VersionMismatch,  // 422
  Internal,         // 500
};

std::string_view to_string(ApiErrorCode code);
int http_status(ApiErrorCode code);

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

ApiResponse api_error(ApiErrorCode code, std::string message);

nlohmann::json prediction_to_json(const Prediction& p);

/// Atomically swappable model snapshot. Readers hold their own reference,
/// so a swap never affects a request already in flight.
class ModelSlot {
 public:
  struct Snapshot {
    TrainedModel model;
    std::string source;
  };

  std::shared_ptr<const Snapshot> current() const;
  void store(TrainedModel model, std::string source);

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const Snapshot> snapshot_;
};

/// In-memory, process-lifetime session storage. Updates to one session are
/// serialized; distinct sessions proceed independently.
class SessionStore {
 public:
  std::string create();

  /// Runs `fn(session)` under the session's lock. Returns false when the id
  /// is unknown.
  template <typename Fn>
  bool with_session(const std::string& id, Fn&& fn) {
    const auto entry = find(id);
    if (!entry) return false;
    std::lock_guard lock(entry->mutex);
    fn(entry->session);
    return true;
  }

  std::size_t size() const;

 private:
  struct Entry {
    explicit Entry(std::string id) : session(std::move(id)) {}
    std::mutex mutex;
    OrderSession session;
  };
  std::shared_ptr<Entry> find(const std::string& id) const;

  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t counter_ = 0;
};

/// Transport-independent implementation of every route.
class BartenderService {
 public:
  struct Options {
    /// Predictions whose top score is below this are logged as rejected.
    double min_score = 0.0;
  };

  BartenderService() = default;
  explicit BartenderService(Options options) : options_(options) {}

  void set_model(TrainedModel model, std::string source);

  ApiResponse classify(const nlohmann::json& body) const;
  ApiResponse create_session();
  ApiResponse post_gesture(const std::string& id, const nlohmann::json& body);
  ApiResponse get_session(const std::string& id);
  ApiResponse get_model() const;
  ApiResponse load_model(const nlohmann::json& body);

  /// Routes `method path` with a raw body; malformed JSON yields 400.
  ApiResponse handle(std::string_view method, std::string_view path, std::string_view body);

  SessionStore& sessions() noexcept { return sessions_; }

 private:
  Options options_;
  ModelSlot model_;
  SessionStore sessions_;
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors_origin = "*";
  std::optional<std::filesystem::path> static_dir;
};

/// Parses "host:port", ":port" or "port".
ServerOptions parse_listen_address(std::string_view address, ServerOptions base = {});

/// HTTP/1.1 front end for a BartenderService.
class HttpServer {
 public:
  HttpServer(BartenderService& service, ServerOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the configured address (port 0 picks a free port) and returns
  /// the bound port, or -1 on failure.
  int bind();
  /// Serves until stop() is called. Requires a successful bind().
  bool serve();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gesture
