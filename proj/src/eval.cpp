#include "hiermetric/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "hiermetric/error.hpp"
#include "hiermetric/parallel.hpp"

namespace hiermetric {

const Vector& SubclassCentroids::at(int class_id, Polarity p) const {
  auto it = mu.find({class_id, p});
  if (it == mu.end()) {
    throw Error(ErrorKind::MissingSubclass, "no centroid for class " + std::to_string(class_id) +
                                                " polarity " + std::string(to_string(p)));
  }
  return it->second;
}

SubclassCentroids centroids_from_embeddings(const Matrix& embeddings,
                                            std::span<const HierLabel> labels, int num_classes) {
  if (static_cast<std::size_t>(embeddings.rows()) != labels.size()) {
    throw Error(ErrorKind::DimensionMismatch, "embedding rows and labels differ in count");
  }
  std::map<std::pair<int, Polarity>, Vector> sums;
  SubclassCentroids out;
  out.num_classes = num_classes;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto key = std::make_pair(labels[i].class_id, labels[i].polarity);
    const Vector row = embeddings.row(static_cast<Eigen::Index>(i)).transpose();
    auto [it, inserted] = sums.emplace(key, row);
    if (!inserted) it->second += row;
    ++out.counts[key];
  }

  std::string missing;
  for (int c = 0; c < num_classes; ++c) {
    for (Polarity p : {Polarity::Positive, Polarity::Negative}) {
      if (!sums.count({c, p})) {
        missing += (missing.empty() ? "" : ", ") + std::string("(") + std::to_string(c) + ", " +
                   std::string(to_string(p)) + ")";
      }
    }
  }
  if (!missing.empty()) throw Error(ErrorKind::MissingSubclass, "missing sub-classes " + missing);

  for (auto& [key, sum] : sums) out.mu.emplace(key, unit_normalize(sum));
  return out;
}

SubclassCentroids compute_centroids(const EncoderParams& encoder, const Dataset& train) {
  const auto labels = train.labels();
  return centroids_from_embeddings(encode_batch(encoder, train.features()), labels,
                                   train.num_classes);
}

double class_score(const Vector& embedding, const SubclassCentroids& centroids, int class_id,
                   ScoreMode mode) {
  const double pos = cosine_sim(embedding, centroids.at(class_id, Polarity::Positive));
  const double neg = cosine_sim(embedding, centroids.at(class_id, Polarity::Negative));
  return mode == ScoreMode::Signed ? 0.5 * (pos - neg) : 0.5 * (pos + neg);
}

Matrix score_embeddings(const Matrix& embeddings, const SubclassCentroids& centroids,
                        ScoreMode mode, int threads) {
  const int k = centroids.num_classes;
  for (int c = 0; c < k; ++c) {
    centroids.at(c, Polarity::Positive);
    centroids.at(c, Polarity::Negative);
  }
  Matrix scores(embeddings.rows(), k);
  parallel_for(static_cast<std::size_t>(embeddings.rows()), threads,
               [&](std::size_t begin, std::size_t end) {
                 for (auto i = static_cast<Eigen::Index>(begin);
                      i < static_cast<Eigen::Index>(end); ++i) {
                   const Vector e = embeddings.row(i).transpose();
                   for (int c = 0; c < k; ++c) scores(i, c) = class_score(e, centroids, c, mode);
                 }
               });
  return scores;
}

Matrix predict_all(const EncoderParams& encoder, const SubclassCentroids& centroids,
                   const Dataset& dataset, ScoreMode mode, int threads) {
  if (dataset.size() == 0) return Matrix(0, centroids.num_classes);
  return score_embeddings(encode_batch(encoder, dataset.features()), centroids, mode, threads);
}

Matrix true_scores(const Dataset& dataset) {
  Matrix truth = Matrix::Zero(static_cast<Eigen::Index>(dataset.size()), dataset.num_classes);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& s = dataset.samples[i];
    const auto row = static_cast<Eigen::Index>(i);
    if (s.soft_scores) {
      truth.row(row) = s.soft_scores->transpose();
    } else {
      truth(row, s.label.class_id) = numeric(s.label.polarity);
    }
  }
  return truth;
}

MaeReport mae_from_scores(const Matrix& predictions, const Matrix& truth, std::string model_tag,
                          std::vector<std::string> class_names) {
  if (predictions.rows() == 0) throw Error(ErrorKind::NoTestLabels, "test set is empty");
  if (predictions.rows() != truth.rows() || predictions.cols() != truth.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "prediction and truth shapes differ");
  }
  MaeReport r;
  r.model_tag = std::move(model_tag);
  r.class_names = std::move(class_names);
  r.num_samples = static_cast<std::size_t>(predictions.rows());
  const Eigen::RowVectorXd mae = (predictions - truth).cwiseAbs().colwise().mean();
  r.per_class_mae.assign(mae.data(), mae.data() + mae.size());
  r.average_mae = mae.mean();
  return r;
}

MaeReport mae_report(const EncoderParams& encoder, const SubclassCentroids& centroids,
                     const Dataset& test, std::string model_tag, ScoreMode mode, int threads) {
  if (test.size() == 0) throw Error(ErrorKind::NoTestLabels, "test set is empty");
  if (test.num_classes != centroids.num_classes) {
    throw Error(ErrorKind::DimensionMismatch, "test set has " + std::to_string(test.num_classes) +
                                                  " classes, model has " +
                                                  std::to_string(centroids.num_classes));
  }
  return mae_from_scores(predict_all(encoder, centroids, test, mode, threads), true_scores(test),
                         std::move(model_tag), test.class_names);
}

PolarityGeometry polarity_geometry(const Matrix& embeddings, std::span<const HierLabel> labels,
                                   const SubclassCentroids& centroids) {
  if (static_cast<std::size_t>(embeddings.rows()) != labels.size()) {
    throw Error(ErrorKind::DimensionMismatch, "embedding rows and labels differ in count");
  }
  const int k = centroids.num_classes;
  PolarityGeometry g;
  std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int c = 0; c < k; ++c) {
    g.polar_cosine.push_back(
        cosine_sim(centroids.at(c, Polarity::Positive), centroids.at(c, Polarity::Negative)));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& l = labels[i];
    if (l.polarity != Polarity::Neutral || l.class_id < 0 || l.class_id >= k) continue;
    const Vector e = embeddings.row(static_cast<Eigen::Index>(i)).transpose();
    const auto c = static_cast<std::size_t>(l.class_id);
    sums[c] += 0.5 * (std::abs(cosine_sim(e, centroids.at(l.class_id, Polarity::Positive))) +
                      std::abs(cosine_sim(e, centroids.at(l.class_id, Polarity::Negative))));
    ++counts[c];
  }
  for (std::size_t c = 0; c < sums.size(); ++c) {
    g.neutral_abs_cosine.push_back(counts[c] > 0 ? sums[c] / counts[c]
                                                 : std::numeric_limits<double>::quiet_NaN());
  }
  return g;
}

nlohmann::ordered_json to_json(const PolarityGeometry& geometry) {
  nlohmann::ordered_json j;
  j["polar_cosine"] = geometry.polar_cosine;
  nlohmann::ordered_json neutral = nlohmann::ordered_json::array();
  for (double v : geometry.neutral_abs_cosine) {
    neutral.push_back(std::isnan(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v));
  }
  j["neutral_abs_cosine"] = std::move(neutral);
  return j;
}

nlohmann::ordered_json to_json(const MaeReport& report) {
  nlohmann::ordered_json j;
  j["model"] = report.model_tag;
  j["num_samples"] = report.num_samples;
  nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < report.per_class_mae.size(); ++c) {
    const std::string name =
        c < report.class_names.size() ? report.class_names[c] : "class" + std::to_string(c);
    per_class[name] = report.per_class_mae[c];
  }
  j["per_class_mae"] = per_class;
  j["average_mae"] = report.average_mae;
  return j;
}

std::string format_mae_table(std::span<const MaeReport> reports) {
  if (reports.empty()) return {};
  std::vector<std::string> header{"Model"};
  for (const auto& n : reports.front().class_names) header.push_back(n);
  header.push_back("Average");

  std::vector<std::vector<std::string>> rows;
  for (const auto& r : reports) {
    std::vector<std::string> row{r.model_tag};
    char buf[32];
    for (double v : r.per_class_mae) {
      std::snprintf(buf, sizeof buf, "%.3f", v);
      row.emplace_back(buf);
    }
    std::snprintf(buf, sizeof buf, "%.3f", r.average_mae);
    row.emplace_back(buf);
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : rows) {
      if (c < row.size()) width[c] = std::max(width[c], row[c].size());
    }
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out << " | ";
      out << cells[c] << std::string(width[c] - cells[c].size(), ' ');
    }
    out << '\n';
  };
  emit(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out << std::string(total + 3 * (width.size() - 1), '-') << '\n';
  for (const auto& row : rows) emit(row);
  return out.str();
}

}  // namespace hiermetric
