#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace hiermetric {

/// Sub-class orientation within an upper-level class.
enum class Polarity : std::uint8_t { Negative = 0, Neutral = 1, Positive = 2 };

inline constexpr int kPolarityCount = 3;

constexpr int ordinal(Polarity p) noexcept { return static_cast<int>(p); }
constexpr double numeric(Polarity p) noexcept { return static_cast<double>(ordinal(p) - 1); }

std::string_view to_string(Polarity p) noexcept;
/// Accepts "positive" / "negative" / "neutral".
std::optional<Polarity> parse_polarity(std::string_view text) noexcept;
/// Entailment-label convention: entailment -> positive, contradiction ->
/// negative, neutral -> neutral.
std::optional<Polarity> parse_entailment_label(std::string_view text) noexcept;

/// (upper class, polarity) pair. Flattens to class_id * 3 + ordinal(polarity).
struct HierLabel {
  int class_id = 0;
  Polarity polarity = Polarity::Neutral;

  constexpr int subclass_index() const noexcept {
    return class_id * kPolarityCount + ordinal(polarity);
  }
  static constexpr HierLabel from_subclass_index(int index) noexcept {
    return {index / kPolarityCount, static_cast<Polarity>(index % kPolarityCount)};
  }

  friend constexpr bool operator==(const HierLabel&, const HierLabel&) = default;
};

}  // namespace hiermetric
