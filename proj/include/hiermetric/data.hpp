#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hiermetric/core_math.hpp"
#include "hiermetric/labels.hpp"

namespace hiermetric {

enum class Split { Train, Test };

std::string_view to_string(Split split) noexcept;

struct Sample {
  std::string id;
  Vector features;
  HierLabel label;
  /// Annotator-style per-class scores in [-1, 1] (test data only).
  std::optional<Vector> soft_scores;
};

struct Dataset {
  std::vector<Sample> samples;
  int num_classes = 0;
  int input_dim = 0;
  std::vector<std::string> class_names;
  Split split = Split::Train;

  std::size_t size() const noexcept { return samples.size(); }
  int num_subclasses() const noexcept { return num_classes * kPolarityCount; }

  /// Feature matrix, one row per sample (all samples or the given subset).
  Matrix features() const;
  Matrix features(std::span<const std::size_t> indices) const;
  std::vector<HierLabel> labels() const;
  std::vector<HierLabel> labels(std::span<const std::size_t> indices) const;

  /// Checks label ranges, feature widths and score ranges.
  void validate() const;
};

struct GeneratorConfig {
  int num_classes = 5;
  int input_dim = 64;
  int per_subclass_count = 200;
  double polarity_offset = 1.0;  ///< alpha
  double noise_sigma = 0.3;      ///< sigma
  std::uint64_t seed = 42;

  void validate() const;
};

/// Sub-class means shared by every split of a generator config: row
/// subclass_index() holds v_c + alpha*u_c (positive), v_c (neutral) or
/// v_c - alpha*u_c (negative).
Matrix synthetic_means(const GeneratorConfig& config);

/// Gaussian blobs around synthetic_means(). Train and test splits share the
/// means and draw noise from separate streams.
Dataset generate_synthetic(const GeneratorConfig& config, Split split = Split::Train);

struct LoadOptions {
  std::optional<int> expected_dim;
  /// Class names that take ids 0..n-1; unseen names are appended in order of
  /// first appearance.
  std::vector<std::string> class_names;
  /// Accept entailment / contradiction / neutral as polarities.
  bool entailment_labels = false;
  std::optional<Split> split;
};

Dataset load_jsonl(const std::filesystem::path& path, const LoadOptions& options = {});
void save_jsonl(const std::filesystem::path& path, const Dataset& dataset);

}  // namespace hiermetric
