#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hiermetric/core_math.hpp"
#include "hiermetric/data.hpp"
#include "hiermetric/encoder.hpp"

namespace hiermetric {

/// Per-(class, polarity) unit-normalized mean embeddings.
struct SubclassCentroids {
  int num_classes = 0;
  std::map<std::pair<int, Polarity>, Vector> mu;
  std::map<std::pair<int, Polarity>, int> counts;

  bool contains(int class_id, Polarity p) const { return mu.count({class_id, p}) > 0; }
  /// Throws MissingSubclass.
  const Vector& at(int class_id, Polarity p) const;
};

enum class ScoreMode {
  Signed,    ///< (cos(e, mu+) - cos(e, mu-)) / 2
  Unsigned,  ///< (cos(e, mu+) + cos(e, mu-)) / 2
};

struct MaeReport {
  std::string model_tag;
  std::vector<std::string> class_names;
  std::vector<double> per_class_mae;
  double average_mae = 0.0;
  std::size_t num_samples = 0;
};

/// Centroids from precomputed embeddings. Requires a positive and a negative
/// sub-class for every class; neutral centroids are stored when present.
SubclassCentroids centroids_from_embeddings(const Matrix& embeddings,
                                            std::span<const HierLabel> labels, int num_classes);

/// Embeds the training split and averages per sub-class.
SubclassCentroids compute_centroids(const EncoderParams& encoder, const Dataset& train);

double class_score(const Vector& embedding, const SubclassCentroids& centroids, int class_id,
                   ScoreMode mode = ScoreMode::Signed);

/// N x K score matrix for precomputed embeddings.
Matrix score_embeddings(const Matrix& embeddings, const SubclassCentroids& centroids,
                        ScoreMode mode = ScoreMode::Signed, int threads = 1);

/// N x K score matrix for every sample of `dataset`.
Matrix predict_all(const EncoderParams& encoder, const SubclassCentroids& centroids,
                   const Dataset& dataset, ScoreMode mode = ScoreMode::Signed, int threads = 1);

/// N x K ground truth: soft scores when a sample has them, otherwise the
/// sample's polarity value on its own class and 0 elsewhere.
Matrix true_scores(const Dataset& dataset);

/// Per-class mean |prediction - truth| and its average. Throws NoTestLabels
/// for an empty test set.
MaeReport mae_from_scores(const Matrix& predictions, const Matrix& truth, std::string model_tag,
                          std::vector<std::string> class_names);

MaeReport mae_report(const EncoderParams& encoder, const SubclassCentroids& centroids,
                     const Dataset& test, std::string model_tag,
                     ScoreMode mode = ScoreMode::Signed, int threads = 1);

/// Polarity geometry of a trained space. For every class: cosine between
/// its positive and negative centroids, and the mean over the class's
/// neutral samples of (|cos(e, mu+)| + |cos(e, mu-)|) / 2 (NaN when the
/// class has no neutral samples).
struct PolarityGeometry {
  std::vector<double> polar_cosine;
  std::vector<double> neutral_abs_cosine;
};

PolarityGeometry polarity_geometry(const Matrix& embeddings, std::span<const HierLabel> labels,
                                   const SubclassCentroids& centroids);

nlohmann::ordered_json to_json(const MaeReport& report);
nlohmann::ordered_json to_json(const PolarityGeometry& geometry);

/// Aligned plain-text table: one row per report, K class columns + Average.
std::string format_mae_table(std::span<const MaeReport> reports);

}  // namespace hiermetric
