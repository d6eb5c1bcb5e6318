#include "gesture/feature_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "gesture/errors.hpp"

namespace gesture {

namespace {

void require_finite(Point2D p, const char* what) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw InvalidFrame(std::string("non-finite coordinate in ") + what);
  }
}

Point2D point_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw InvalidFrame(std::string(what) + " must be an [x, y] number pair");
  }
  Point2D p{j[0].get<double>(), j[1].get<double>()};
  require_finite(p, what);
  return p;
}

HandObservation hand_from_json(const nlohmann::json& j, const char* side) {
  if (!j.is_object()) throw InvalidFrame(std::string("missing hand '") + side + "'");
  const auto palm = j.find("palm");
  const auto tips = j.find("tips");
  if (palm == j.end() || tips == j.end()) {
    throw InvalidFrame(std::string("hand '") + side + "' needs 'palm' and 'tips'");
  }
  if (!tips->is_array() || tips->size() != kFingersPerHand) {
    throw InvalidFrame(std::string("hand '") + side + "' must have exactly 5 tips");
  }
  HandObservation hand;
  hand.palm_center = point_from_json(*palm, "palm");
  for (std::size_t i = 0; i < kFingersPerHand; ++i) {
    hand.fingertips[i] = point_from_json((*tips)[i], "tip");
  }
  return hand;
}

nlohmann::json hand_to_json(const HandObservation& hand) {
  nlohmann::json tips = nlohmann::json::array();
  for (const auto& t : hand.fingertips) tips.push_back({t.x, t.y});
  return {{"palm", {hand.palm_center.x, hand.palm_center.y}}, {"tips", std::move(tips)}};
}

}  // namespace

double fingertip_distance(Point2D palm, Point2D tip) {
  require_finite(palm, "palm");
  require_finite(tip, "fingertip");
  return std::hypot(tip.x - palm.x, tip.y - palm.y);
}

HandDistances normalize_hand(std::span<const double, kFingersPerHand> distances) {
  for (double d : distances) {
    if (!std::isfinite(d)) throw InvalidFrame("non-finite distance");
    if (d < 0.0) throw InvalidFrame("negative distance");
  }
  const auto [lo, hi] = std::minmax_element(distances.begin(), distances.end());
  const double min = *lo;
  const double range = *hi - min;

  HandDistances out;
  if (range == 0.0) {
    out.fill(0.5);
    return out;
  }
  for (std::size_t i = 0; i < kFingersPerHand; ++i) {
    out[i] = std::clamp((distances[i] - min) / range, 0.0, 1.0);
  }
  return out;
}

HandDistances hand_distances(const HandObservation& hand) {
  HandDistances d;
  for (std::size_t i = 0; i < kFingersPerHand; ++i) {
    d[i] = fingertip_distance(hand.palm_center, hand.fingertips[i]);
  }
  return d;
}

FeatureVector extract_features(const HandFrame& frame) {
  const HandDistances left = normalize_hand(hand_distances(frame.left));
  const HandDistances right = normalize_hand(hand_distances(frame.right));
  FeatureVector fv;
  std::copy(left.begin(), left.end(), fv.values.begin());
  std::copy(right.begin(), right.end(), fv.values.begin() + kFingersPerHand);
  return fv;
}

void validate_features(const FeatureVector& features) {
  for (std::size_t i = 0; i < kFeatureDim; ++i) {
    const double v = features[i];
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw InvalidFrame("feature " + std::to_string(i) + " outside [0, 1]");
    }
  }
}

FeatureVector make_features(std::span<const double> values) {
  if (values.size() != kFeatureDim) {
    throw InvalidFrame("expected " + std::to_string(kFeatureDim) + " features, got " +
                       std::to_string(values.size()));
  }
  FeatureVector fv;
  std::copy(values.begin(), values.end(), fv.values.begin());
  validate_features(fv);
  return fv;
}

HandFrame frame_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidFrame("frame must be a JSON object");
  if (!j.contains("left") || !j.contains("right")) {
    throw InvalidFrame("frame requires both 'left' and 'right' hands");
  }
  return HandFrame{hand_from_json(j.at("left"), "left"), hand_from_json(j.at("right"), "right")};
}

nlohmann::json frame_to_json(const HandFrame& frame) {
  return {{"left", hand_to_json(frame.left)}, {"right", hand_to_json(frame.right)}};
}

LabeledFrame labeled_frame_from_json(const nlohmann::json& j) {
  LabeledFrame out{frame_from_json(j), std::nullopt};
  if (const auto it = j.find("label"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw InvalidFrame("'label' must be a string");
    out.label = parse_gesture(it->get<std::string>());
    if (!out.label) throw InvalidFrame("unknown gesture label '" + it->get<std::string>() + "'");
  }
  return out;
}

nlohmann::json labeled_frame_to_json(const LabeledFrame& frame) {
  nlohmann::json j = frame_to_json(frame.frame);
  if (frame.label) j["label"] = std::string(to_string(*frame.label));
  return j;
}

std::vector<LabeledFrame> read_frames_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);

  std::vector<LabeledFrame> frames;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      frames.push_back(labeled_frame_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), line_no);
    } catch (const InvalidFrame& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return frames;
}

void write_frames_jsonl(const std::filesystem::path& path,
                        std::span<const LabeledFrame> frames) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& f : frames) out << labeled_frame_to_json(f).dump() << '\n';
}

}  // namespace gesture
