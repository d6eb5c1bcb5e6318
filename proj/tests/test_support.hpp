#pragma once

// Generators and fixtures shared by the unit and acceptance suites.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "gesture/dataset.hpp"
#include "gesture/feature_pipeline.hpp"

namespace gesture::testing {

/// Hand whose fingertips sit at the given distances from the palm, fanned
/// out at distinct angles.
inline HandObservation hand_at(Point2D palm, const HandDistances& distances, double tilt = 0.0) {
  HandObservation h;
  h.palm_center = palm;
  for (std::size_t f = 0; f < kFingersPerHand; ++f) {
    const double angle = tilt + 0.4 * static_cast<double>(f) + 0.3;
    h.fingertips[f] = {palm.x + distances[f] * std::cos(angle),
                       palm.y + distances[f] * std::sin(angle)};
  }
  return h;
}

inline HandFrame random_frame(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(-300.0, 300.0);
  std::uniform_real_distribution<double> offset(-120.0, 120.0);
  auto hand = [&] {
    HandObservation h;
    h.palm_center = {coord(rng), coord(rng)};
    for (auto& t : h.fingertips) t = {h.palm_center.x + offset(rng), h.palm_center.y + offset(rng)};
    return h;
  };
  HandFrame f;
  f.left = hand();
  f.right = hand();
  return f;
}

inline HandObservation scale_about_palm(HandObservation h, double s) {
  for (auto& t : h.fingertips) {
    t = {h.palm_center.x + s * (t.x - h.palm_center.x), h.palm_center.y + s * (t.y - h.palm_center.y)};
  }
  return h;
}

inline HandObservation translate(HandObservation h, double dx, double dy) {
  h.palm_center = {h.palm_center.x + dx, h.palm_center.y + dy};
  for (auto& t : h.fingertips) t = {t.x + dx, t.y + dy};
  return h;
}

inline double max_abs_diff(const FeatureVector& a, const FeatureVector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < kFeatureDim; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("gesture-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace gesture::testing
