#include "gesture/gesture_label.hpp"

#include <cctype>

namespace gesture {

namespace {

constexpr std::array<std::string_view, kNumGestures> kNames = {
    "Init", "Alcohol", "NonAlcohol", "Food", "Undo", "Checkout", "Cash", "Credit",
};

std::string fold(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '-' || c == '_' || c == ' ') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

std::optional<GestureLabel> label_from_code(int value) {
  if (value < 1 || value > static_cast<int>(kNumGestures)) return std::nullopt;
  return static_cast<GestureLabel>(value);
}

std::string_view to_string(GestureLabel label) { return kNames.at(index_of(label)); }

std::optional<GestureLabel> parse_gesture(std::string_view name) {
  const std::string key = fold(name);
  if (key.empty()) return std::nullopt;
  for (std::size_t i = 0; i < kNumGestures; ++i) {
    if (fold(kNames[i]) == key) return kAllGestures[i];
  }
  return std::nullopt;
}

}  // namespace gesture
