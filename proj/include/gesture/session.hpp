#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gesture/classifiers.hpp"
#include "gesture/feature_pipeline.hpp"
#include "gesture/gesture_label.hpp"

namespace gesture {

enum class OrderPhase { Idle, Ordering, CheckingOut, Completed };
enum class OrderItem { Alcohol, NonAlcohol, Food };
enum class Payment { Cash, Credit };
enum class Outcome { Accepted, Rejected };

std::string_view to_string(OrderPhase phase);
std::string_view to_string(OrderItem item);
std::string_view to_string(Payment payment);
std::string_view to_string(Outcome outcome);

struct SessionEvent {
  std::int64_t timestamp_ms = 0;  // milliseconds since the Unix epoch, UTC
  GestureLabel gesture;
  bool accepted = false;
  OrderPhase phase = OrderPhase::Idle;  // phase after the event

  friend bool operator==(const SessionEvent&, const SessionEvent&) = default;
};

std::int64_t now_ms();

/// One customer interaction: Idle -> Ordering -> CheckingOut -> Completed.
///
///   Idle         Init -> Ordering; everything else rejected.
///   Ordering     Alcohol/NonAlcohol/Food append an item; Undo drops the last
///                item (a no-op on an empty order); Checkout -> CheckingOut
///                when items exist; Init, Cash, Credit rejected.
///   CheckingOut  Cash/Credit record payment -> Completed; Undo -> Ordering.
///   Completed    terminal; everything rejected.
///
/// Every call, accepted or not, appends one entry to the event log.
class OrderSession {
 public:
  explicit OrderSession(std::string id = {});

  Outcome apply_gesture(GestureLabel gesture, std::int64_t timestamp_ms);
  Outcome apply_gesture(GestureLabel gesture) { return apply_gesture(gesture, now_ms()); }

  /// Logs a gesture as rejected without evaluating the transition table
  /// (used when a prediction falls below the confidence threshold).
  void reject(GestureLabel gesture, std::int64_t timestamp_ms);

  const std::string& id() const noexcept { return id_; }
  OrderPhase phase() const noexcept { return phase_; }
  const std::vector<OrderItem>& items() const noexcept { return items_; }
  const std::optional<Payment>& payment() const noexcept { return payment_; }
  const std::vector<SessionEvent>& event_log() const noexcept { return log_; }

  /// Rebuilds a session from the accepted entries of a log.
  static OrderSession replay(std::string id, std::span<const SessionEvent> log);

 private:
  std::string id_;
  OrderPhase phase_ = OrderPhase::Idle;
  std::vector<OrderItem> items_;
  std::optional<Payment> payment_;
  std::vector<SessionEvent> log_;
};

nlohmann::json session_to_json(const OrderSession& session);

struct ClassifiedOutcome {
  Prediction prediction;
  Outcome outcome;
};

/// Predicts the gesture and applies it. A prediction whose top score is
/// below `min_score` is logged as rejected without touching the order.
ClassifiedOutcome classify_and_apply(OrderSession& session, const FeatureVector& features,
                                     const TrainedModel& model, double min_score = 0.0);
ClassifiedOutcome classify_and_apply(OrderSession& session, const HandFrame& frame,
                                     const TrainedModel& model, double min_score = 0.0);

}  // namespace gesture
