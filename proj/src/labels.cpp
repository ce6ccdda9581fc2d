#include "hiermetric/labels.hpp"

namespace hiermetric {

std::string_view to_string(Polarity p) noexcept {
  switch (p) {
    case Polarity::Negative: return "negative";
    case Polarity::Neutral: return "neutral";
    case Polarity::Positive: return "positive";
  }
  return "neutral";
}

std::optional<Polarity> parse_polarity(std::string_view text) noexcept {
  if (text == "positive") return Polarity::Positive;
  if (text == "negative") return Polarity::Negative;
  if (text == "neutral") return Polarity::Neutral;
  return std::nullopt;
}

std::optional<Polarity> parse_entailment_label(std::string_view text) noexcept {
  if (text == "entailment") return Polarity::Positive;
  if (text == "contradiction") return Polarity::Negative;
  if (text == "neutral") return Polarity::Neutral;
  return std::nullopt;
}

}  // namespace hiermetric
