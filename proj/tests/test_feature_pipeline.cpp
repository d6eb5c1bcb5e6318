#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "gesture/errors.hpp"
#include "gesture/feature_pipeline.hpp"
#include "test_support.hpp"

using namespace gesture;
using gesture::testing::hand_at;
using gesture::testing::max_abs_diff;

TEST_CASE("fingertip_distance") {
  CHECK(fingertip_distance({0, 0}, {3, 4}) == doctest::Approx(5.0));
  CHECK(fingertip_distance({7, -2}, {7, -2}) == 0.0);
  // sqrt(3^2 + 4^2) by hand
  CHECK(fingertip_distance({1, 1}, {4, 5}) == doctest::Approx(5.0));

  SUBCASE("uses both coordinates and is symmetric") {
    CHECK(fingertip_distance({0, 0}, {0, 2}) == doctest::Approx(2.0));
    CHECK(fingertip_distance({2.5, -1}, {-3, 8}) == fingertip_distance({-3, 8}, {2.5, -1}));
  }
  SUBCASE("rejects non-finite input") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(fingertip_distance({nan, 0}, {1, 1}), InvalidFrame);
    CHECK_THROWS_AS(fingertip_distance({0, 0}, {1, inf}), InvalidFrame);
  }
}

TEST_CASE("normalize_hand") {
  auto check = [](HandDistances in, HandDistances expected) {
    const auto out = normalize_hand(in);
    for (std::size_t i = 0; i < kFingersPerHand; ++i) CHECK(out[i] == doctest::Approx(expected[i]));
  };
  check({1, 2, 3, 4, 5}, {0, 0.25, 0.5, 0.75, 1.0});
  check({4, 4, 4, 4, 4}, {0.5, 0.5, 0.5, 0.5, 0.5});
  // (x - 10) / 80
  check({10, 70, 90, 80, 30}, {0, 0.75, 1.0, 0.875, 0.25});

  CHECK_THROWS_AS(normalize_hand(HandDistances{1, -2, 3, 4, 5}), InvalidFrame);
  CHECK_THROWS_AS(normalize_hand(HandDistances{1, std::nan(""), 3, 4, 5}), InvalidFrame);
}

TEST_CASE("extract_features composes distances and per-hand normalization") {
  const HandFrame frame{hand_at({-100, 200}, {1, 2, 3, 4, 5}, 0.2),
                        hand_at({120, 180}, {5, 4, 3, 2, 1}, -0.7)};
  const FeatureVector fv = extract_features(frame);
  const FeatureVector expected{{0, 0.25, 0.5, 0.75, 1, 1, 0.75, 0.5, 0.25, 0}};
  CHECK(max_abs_diff(fv, expected) < 1e-12);
  CHECK(fv[feature_slot(true, Finger::Thumb)] == doctest::Approx(1.0));
  CHECK(fv[feature_slot(false, Finger::Pinky)] == doctest::Approx(1.0));
}

TEST_CASE("extract_features invariances on random frames") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  std::uniform_real_distribution<double> shift(-500.0, 500.0);

  for (int trial = 0; trial < 500; ++trial) {
    const HandFrame f = testing::random_frame(rng);
    const FeatureVector base = extract_features(f);

    for (double v : base.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    // each non-degenerate hand hits both ends of [0, 1]
    for (auto hand : {base.left(), base.right()}) {
      CHECK(*std::min_element(hand.begin(), hand.end()) == 0.0);
      CHECK(*std::max_element(hand.begin(), hand.end()) == 1.0);
    }

    HandFrame scaled = f;
    scaled.right = testing::scale_about_palm(f.right, scale(rng));
    scaled.left = testing::scale_about_palm(f.left, scale(rng));
    CHECK(max_abs_diff(extract_features(scaled), base) < 1e-9);

    const double dx = shift(rng);
    const double dy = shift(rng);
    const HandFrame moved{testing::translate(f.left, dx, dy), testing::translate(f.right, dx, dy)};
    CHECK(max_abs_diff(extract_features(moved), base) < 1e-9);

    HandFrame perturbed = f;
    perturbed.right = testing::random_frame(rng).right;
    const FeatureVector pf = extract_features(perturbed);
    for (std::size_t i = 0; i < kFingersPerHand; ++i) CHECK(pf[i] == base[i]);
  }
}

TEST_CASE("frame JSON") {
  const HandFrame frame{hand_at({1, 2}, {10, 20, 30, 40, 50}), hand_at({3, 4}, {5, 6, 7, 8, 9})};

  SUBCASE("round trip") {
    CHECK(frame_from_json(frame_to_json(frame)) == frame);
    LabeledFrame lf{frame, GestureLabel::Food};
    const auto back = labeled_frame_from_json(labeled_frame_to_json(lf));
    CHECK(back.frame == frame);
    CHECK(back.label == GestureLabel::Food);
  }
  SUBCASE("both hands required") {
    auto j = frame_to_json(frame);
    j.erase("right");
    CHECK_THROWS_AS(frame_from_json(j), InvalidFrame);
  }
  SUBCASE("exactly five tips") {
    auto j = frame_to_json(frame);
    j["left"]["tips"].erase(4);
    CHECK_THROWS_AS(frame_from_json(j), InvalidFrame);
  }
  SUBCASE("points are number pairs") {
    auto j = frame_to_json(frame);
    j["left"]["palm"] = {1, "x"};
    CHECK_THROWS_AS(frame_from_json(j), InvalidFrame);
    j["left"]["palm"] = {1, 2, 3};
    CHECK_THROWS_AS(frame_from_json(j), InvalidFrame);
  }
  SUBCASE("unknown label") {
    auto j = frame_to_json(frame);
    j["label"] = "Beer";
    CHECK_THROWS_AS(labeled_frame_from_json(j), InvalidFrame);
  }
}

TEST_CASE("read_frames_jsonl reports the failing line") {
  testing::TempDir dir;
  const HandFrame frame{hand_at({0, 0}, {1, 2, 3, 4, 5}), hand_at({0, 0}, {1, 2, 3, 4, 5})};
  const std::string good = frame_to_json(frame).dump();
  testing::write_file(dir / "f.jsonl", good + "\n\n" + good + "\n{\"left\": 1}\n");
  try {
    read_frames_jsonl(dir / "f.jsonl");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("make_features validates length and range") {
  const std::vector<double> nine(9, 0.5);
  CHECK_THROWS_AS(make_features(nine), InvalidFrame);
  std::vector<double> ten(10, 0.5);
  CHECK(make_features(ten)[3] == 0.5);
  ten[2] = 1.2;
  CHECK_THROWS_AS(make_features(ten), InvalidFrame);
}
