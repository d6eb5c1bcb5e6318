#include "gesture/session.hpp"

#include <chrono>

#include "gesture/errors.hpp"

namespace gesture {

namespace {

std::optional<OrderItem> item_for(GestureLabel g) {
  switch (g) {
    case GestureLabel::Alcohol: return OrderItem::Alcohol;
    case GestureLabel::NonAlcohol: return OrderItem::NonAlcohol;
    case GestureLabel::Food: return OrderItem::Food;
    default: return std::nullopt;
  }
}

}  // namespace

std::string_view to_string(OrderPhase phase) {
  switch (phase) {
    case OrderPhase::Idle: return "Idle";
    case OrderPhase::Ordering: return "Ordering";
    case OrderPhase::CheckingOut: return "CheckingOut";
    case OrderPhase::Completed: return "Completed";
  }
  return "?";
}

std::string_view to_string(OrderItem item) {
  switch (item) {
    case OrderItem::Alcohol: return "Alcohol";
    case OrderItem::NonAlcohol: return "NonAlcohol";
    case OrderItem::Food: return "Food";
  }
  return "?";
}

std::string_view to_string(Payment payment) {
  return payment == Payment::Cash ? "Cash" : "Credit";
}

std::string_view to_string(Outcome outcome) {
  return outcome == Outcome::Accepted ? "accepted" : "rejected";
}

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

OrderSession::OrderSession(std::string id) : id_(std::move(id)) {}

Outcome OrderSession::apply_gesture(GestureLabel gesture, std::int64_t timestamp_ms) {
  bool accepted = false;
  switch (phase_) {
    case OrderPhase::Idle:
      if (gesture == GestureLabel::Init) {
        phase_ = OrderPhase::Ordering;
        accepted = true;
      }
      break;

    case OrderPhase::Ordering:
      if (const auto item = item_for(gesture)) {
        items_.push_back(*item);
        accepted = true;
      } else if (gesture == GestureLabel::Undo) {
        if (!items_.empty()) items_.pop_back();
        accepted = true;
      } else if (gesture == GestureLabel::Checkout && !items_.empty()) {
        phase_ = OrderPhase::CheckingOut;
        accepted = true;
      }
      break;

    case OrderPhase::CheckingOut:
      if (gesture == GestureLabel::Cash || gesture == GestureLabel::Credit) {
        payment_ = gesture == GestureLabel::Cash ? Payment::Cash : Payment::Credit;
        phase_ = OrderPhase::Completed;
        accepted = true;
      } else if (gesture == GestureLabel::Undo) {
        phase_ = OrderPhase::Ordering;
        accepted = true;
      }
      break;

    case OrderPhase::Completed:
      break;
  }
  log_.push_back({timestamp_ms, gesture, accepted, phase_});
  return accepted ? Outcome::Accepted : Outcome::Rejected;
}

void OrderSession::reject(GestureLabel gesture, std::int64_t timestamp_ms) {
  log_.push_back({timestamp_ms, gesture, false, phase_});
}

OrderSession OrderSession::replay(std::string id, std::span<const SessionEvent> log) {
  OrderSession s(std::move(id));
  for (const auto& e : log) {
    if (e.accepted) s.apply_gesture(e.gesture, e.timestamp_ms);
  }
  return s;
}

nlohmann::json session_to_json(const OrderSession& session) {
  nlohmann::json items = nlohmann::json::array();
  for (OrderItem i : session.items()) items.push_back(std::string(to_string(i)));
  nlohmann::json log = nlohmann::json::array();
  for (const auto& e : session.event_log()) {
    log.push_back({{"timestamp_ms", e.timestamp_ms},
                   {"gesture", std::string(to_string(e.gesture))},
                   {"accepted", e.accepted},
                   {"phase", std::string(to_string(e.phase))}});
  }
  return {{"id", session.id()},
          {"phase", std::string(to_string(session.phase()))},
          {"items", std::move(items)},
          {"payment", session.payment() ? nlohmann::json(std::string(to_string(*session.payment())))
                                        : nlohmann::json(nullptr)},
          {"event_log", std::move(log)}};
}

ClassifiedOutcome classify_and_apply(OrderSession& session, const FeatureVector& features,
                                     const TrainedModel& model, double min_score) {
  validate_features(features);
  const Prediction p = predict(model, features);
  const std::int64_t ts = now_ms();
  if (p.scores[index_of(p.label)] < min_score) {
    session.reject(p.label, ts);
    return {p, Outcome::Rejected};
  }
  return {p, session.apply_gesture(p.label, ts)};
}

ClassifiedOutcome classify_and_apply(OrderSession& session, const HandFrame& frame,
                                     const TrainedModel& model, double min_score) {
  return classify_and_apply(session, extract_features(frame), model, min_score);
}

}  // namespace gesture
