#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace gesture {

// Codes follow the order the vocabulary was introduced: 1 = Init ... 8 = Credit.
enum class GestureLabel : int {
  Init = 1,
  Alcohol = 2,
  NonAlcohol = 3,
  Food = 4,
  Undo = 5,
  Checkout = 6,
  Cash = 7,
  Credit = 8,
};

inline constexpr std::size_t kNumGestures = 8;

inline constexpr std::array<GestureLabel, kNumGestures> kAllGestures = {
    GestureLabel::Init,     GestureLabel::Alcohol, GestureLabel::NonAlcohol,
    GestureLabel::Food,     GestureLabel::Undo,    GestureLabel::Checkout,
    GestureLabel::Cash,     GestureLabel::Credit,
};

constexpr int code(GestureLabel label) { return static_cast<int>(label); }

/// Zero-based position, used for score vectors and matrix rows.
constexpr std::size_t index_of(GestureLabel label) {
  return static_cast<std::size_t>(code(label) - 1);
}

constexpr GestureLabel label_at(std::size_t index) { return kAllGestures.at(index); }

std::optional<GestureLabel> label_from_code(int code);

/// Canonical name, e.g. "NonAlcohol".
std::string_view to_string(GestureLabel label);

/// Accepts canonical names case-insensitively and ignores '-', '_' and
/// spaces, so "Non-Alcohol" and "non_alcohol" both parse.
std::optional<GestureLabel> parse_gesture(std::string_view name);

}  // namespace gesture
