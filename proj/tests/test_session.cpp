#include <doctest.h>

#include <random>

#include "gesture/session.hpp"
#include "test_support.hpp"

using namespace gesture;
using G = GestureLabel;

namespace {

std::vector<GestureLabel> random_sequence(std::mt19937_64& rng, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  // Bias toward Init early so sessions actually leave Idle.
  std::uniform_int_distribution<std::size_t> pick(0, kNumGestures - 1);
  std::vector<GestureLabel> seq(len(rng));
  for (std::size_t i = 0; i < seq.size(); ++i) seq[i] = (i == 0 && rng() % 2) ? G::Init : label_at(pick(rng));
  return seq;
}

bool is_item(G g) { return g == G::Alcohol || g == G::NonAlcohol || g == G::Food; }

}  // namespace

TEST_CASE("transition examples") {
  OrderSession s("t");
  CHECK(s.phase() == OrderPhase::Idle);
  CHECK(s.apply_gesture(G::Alcohol, 1) == Outcome::Rejected);
  CHECK(s.apply_gesture(G::Init, 2) == Outcome::Accepted);
  CHECK(s.phase() == OrderPhase::Ordering);
  CHECK(s.items().empty());

  CHECK(s.apply_gesture(G::Checkout, 3) == Outcome::Rejected);  // nothing ordered yet
  CHECK(s.apply_gesture(G::Food, 4) == Outcome::Accepted);
  CHECK(s.apply_gesture(G::Undo, 5) == Outcome::Accepted);
  CHECK(s.items().empty());
  CHECK(s.phase() == OrderPhase::Ordering);
  CHECK(s.apply_gesture(G::Undo, 6) == Outcome::Accepted);  // no-op
  CHECK(s.apply_gesture(G::Init, 7) == Outcome::Rejected);
  CHECK(s.apply_gesture(G::Cash, 8) == Outcome::Rejected);

  CHECK(s.apply_gesture(G::Alcohol, 9) == Outcome::Accepted);
  CHECK(s.apply_gesture(G::Food, 10) == Outcome::Accepted);
  CHECK(s.apply_gesture(G::Checkout, 11) == Outcome::Accepted);
  CHECK(s.phase() == OrderPhase::CheckingOut);
  CHECK(s.apply_gesture(G::Food, 12) == Outcome::Rejected);
  CHECK(s.apply_gesture(G::Undo, 13) == Outcome::Accepted);
  CHECK(s.phase() == OrderPhase::Ordering);
  CHECK(s.items().size() == 2);
  CHECK(s.apply_gesture(G::Checkout, 14) == Outcome::Accepted);
  CHECK(s.apply_gesture(G::Cash, 15) == Outcome::Accepted);
  CHECK(s.phase() == OrderPhase::Completed);
  CHECK(s.items() == std::vector<OrderItem>{OrderItem::Alcohol, OrderItem::Food});
  CHECK(s.payment() == Payment::Cash);
  CHECK(s.apply_gesture(G::Init, 16) == Outcome::Rejected);
  CHECK(s.event_log().size() == 16);
  CHECK(s.event_log().back().phase == OrderPhase::Completed);
  CHECK_FALSE(s.event_log().back().accepted);
}

TEST_CASE("random sequences against a reference walk") {
  std::mt19937_64 rng(1234);
  std::size_t completed = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const auto seq = random_sequence(rng, 50);
    OrderSession s("p");

    // reference state kept alongside
    OrderPhase phase = OrderPhase::Idle;
    std::size_t items = 0;
    std::size_t adds = 0, removals = 0;
    bool passed_checkout = false;

    std::int64_t ts = 0;
    for (G g : seq) {
      const auto before_phase = s.phase();
      const auto before_items = s.items();
      const bool accepted = s.apply_gesture(g, ++ts) == Outcome::Accepted;

      bool expect = false;
      switch (phase) {
        case OrderPhase::Idle:
          expect = g == G::Init;
          if (expect) phase = OrderPhase::Ordering;
          break;
        case OrderPhase::Ordering:
          if (is_item(g)) {
            expect = true;
            ++items;
            ++adds;
          } else if (g == G::Undo) {
            expect = true;
            if (items > 0) {
              --items;
              ++removals;
            }
          } else if (g == G::Checkout && items > 0) {
            expect = true;
            phase = OrderPhase::CheckingOut;
            passed_checkout = true;
          }
          break;
        case OrderPhase::CheckingOut:
          if (g == G::Cash || g == G::Credit) {
            expect = true;
            phase = OrderPhase::Completed;
          } else if (g == G::Undo) {
            expect = true;
            phase = OrderPhase::Ordering;
          }
          break;
        case OrderPhase::Completed:
          break;
      }
      REQUIRE(accepted == expect);
      REQUIRE(s.phase() == phase);
      REQUIRE(s.items().size() == items);
      REQUIRE(s.items().size() == adds - removals);

      // invariants hold after every step
      REQUIRE(s.payment().has_value() == (s.phase() == OrderPhase::Completed));
      if (s.phase() == OrderPhase::CheckingOut || s.phase() == OrderPhase::Completed) {
        REQUIRE_FALSE(s.items().empty());
      }
      if (s.payment()) REQUIRE(passed_checkout);
      if (!accepted) {
        REQUIRE(s.phase() == before_phase);
        REQUIRE(s.items() == before_items);
      }
    }
    if (s.phase() == OrderPhase::Completed) ++completed;

    REQUIRE(s.event_log().size() == seq.size());
    for (std::size_t i = 1; i < s.event_log().size(); ++i) {
      REQUIRE(s.event_log()[i].timestamp_ms > s.event_log()[i - 1].timestamp_ms);
    }
    const auto r = OrderSession::replay("p", s.event_log());
    REQUIRE(r.phase() == s.phase());
    REQUIRE(r.items() == s.items());
    REQUIRE(r.payment() == s.payment());
  }
  // the generator must actually exercise the payment path
  CHECK(completed > 0);
}

TEST_CASE("undo is the inverse of an add while ordering") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 1000; ++trial) {
    OrderSession s;
    s.apply_gesture(G::Init, 0);
    const int prefix = static_cast<int>(rng() % 6) + 1;
    for (int i = 0; i < prefix; ++i) s.apply_gesture(label_at(1 + rng() % 3), i + 1);
    const auto phase = s.phase();
    const auto items = s.items();
    s.apply_gesture(label_at(1 + rng() % 3), 100);
    s.apply_gesture(G::Undo, 101);
    CHECK(s.phase() == phase);
    CHECK(s.items() == items);
  }
}

TEST_CASE("session JSON") {
  OrderSession s("abc");
  s.apply_gesture(G::Init, 1000);
  s.apply_gesture(G::Credit, 1001);
  const auto j = session_to_json(s);
  CHECK(j.at("id") == "abc");
  CHECK(j.at("phase") == "Ordering");
  CHECK(j.at("items").empty());
  CHECK(j.at("payment").is_null());
  REQUIRE(j.at("event_log").size() == 2);
  CHECK(j["event_log"][0]["timestamp_ms"] == 1000);
  CHECK(j["event_log"][1]["gesture"] == "Credit");
  CHECK(j["event_log"][1]["accepted"] == false);
  CHECK(now_ms() > 1'600'000'000'000);
}

TEST_CASE("classify_and_apply") {
  SyntheticConfig cfg;
  cfg.noise_sigma = 0.0;
  cfg.counts.fill(3);
  const auto data = generate_synthetic(cfg);
  const auto model = train(ModelKind::Knn, data.dataset, default_hyperparameters(ModelKind::Knn), 0);

  auto frame_of = [&](G g) {
    for (std::size_t i = 0; i < data.dataset.size(); ++i)
      if (data.dataset[i].label == g) return data.frames[i];
    throw std::logic_error("no frame");
  };

  OrderSession s("c");
  auto r = classify_and_apply(s, frame_of(G::Init), model);
  CHECK(r.prediction.label == G::Init);
  CHECK(r.outcome == Outcome::Accepted);
  CHECK(s.phase() == OrderPhase::Ordering);

  r = classify_and_apply(s, frame_of(G::Cash), model);
  CHECK(r.prediction.label == G::Cash);
  CHECK(r.outcome == Outcome::Rejected);
  CHECK(s.phase() == OrderPhase::Ordering);

  // a threshold above every score rejects without evaluating the table
  r = classify_and_apply(s, frame_of(G::Food), model, 1.5);
  CHECK(r.outcome == Outcome::Rejected);
  CHECK(s.items().empty());

  std::mt19937_64 rng(4);
  OrderSession long_run("l");
  for (int i = 0; i < 100; ++i) classify_and_apply(long_run, testing::random_frame(rng), model);
  CHECK(long_run.event_log().size() == 100);

  CHECK_THROWS(classify_and_apply(s, frame_of(G::Init), TrainedModel{}));
}
