#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "gesture/gesture_label.hpp"

namespace gesture {

inline constexpr std::size_t kFingersPerHand = 5;
inline constexpr std::size_t kFeatureDim = 2 * kFingersPerHand;

enum class Finger : std::size_t { Thumb = 0, Index, Middle, Ring, Pinky };

/// Sensor-plane position in millimeters. The depth axis is never stored.
struct Point2D {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2D&, const Point2D&) = default;
};

struct HandObservation {
  Point2D palm_center;
  /// Ordered thumb, index, middle, ring, pinky.
  std::array<Point2D, kFingersPerHand> fingertips;

  friend bool operator==(const HandObservation&, const HandObservation&) = default;
};

struct HandFrame {
  HandObservation left;
  HandObservation right;

  friend bool operator==(const HandFrame&, const HandFrame&) = default;
};

using HandDistances = std::array<double, kFingersPerHand>;

/// Ten per-hand normalized fingertip-to-palm distances. Slots 0-4 hold the
/// left hand (thumb..pinky), slots 5-9 the right hand.
struct FeatureVector {
  std::array<double, kFeatureDim> values{};

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  std::span<const double, kFingersPerHand> left() const {
    return std::span<const double, kFeatureDim>(values).first<kFingersPerHand>();
  }
  std::span<const double, kFingersPerHand> right() const {
    return std::span<const double, kFeatureDim>(values).last<kFingersPerHand>();
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

constexpr std::size_t feature_slot(bool right_hand, Finger finger) {
  return (right_hand ? kFingersPerHand : 0) + static_cast<std::size_t>(finger);
}

/// Euclidean distance in the sensor plane. Throws InvalidFrame on NaN/inf.
double fingertip_distance(Point2D palm, Point2D tip);

/// Min-max normalization of one hand's five distances. When all five are
/// equal every output is 0.5.
HandDistances normalize_hand(std::span<const double, kFingersPerHand> distances);

HandDistances hand_distances(const HandObservation& hand);

FeatureVector extract_features(const HandFrame& frame);

/// Throws InvalidFrame unless every value is finite and within [0, 1].
void validate_features(const FeatureVector& features);

/// Builds a FeatureVector from exactly kFeatureDim values, validating them.
FeatureVector make_features(std::span<const double> values);

// Frame JSON: {"left": {"palm": [x, y], "tips": [[x, y] x5]}, "right": ..., "label": "Init"}

struct LabeledFrame {
  HandFrame frame;
  std::optional<GestureLabel> label;
};

HandFrame frame_from_json(const nlohmann::json& j);
nlohmann::json frame_to_json(const HandFrame& frame);

LabeledFrame labeled_frame_from_json(const nlohmann::json& j);
nlohmann::json labeled_frame_to_json(const LabeledFrame& frame);

/// Reads a JSON Lines frame file; blank lines are skipped. Errors carry the
/// 1-based line number.
std::vector<LabeledFrame> read_frames_jsonl(const std::filesystem::path& path);
void write_frames_jsonl(const std::filesystem::path& path,
                        std::span<const LabeledFrame> frames);

}  // namespace gesture
