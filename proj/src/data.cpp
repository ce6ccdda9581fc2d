#include "hiermetric/data.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "hiermetric/error.hpp"
#include "hiermetric/rng.hpp"

namespace hiermetric {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Split split) noexcept {
  return split == Split::Train ? "train" : "test";
}

Matrix Dataset::features() const {
  Matrix m(static_cast<Eigen::Index>(samples.size()), input_dim);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = samples[i].features.transpose();
  }
  return m;
}

Matrix Dataset::features(std::span<const std::size_t> indices) const {
  Matrix m(static_cast<Eigen::Index>(indices.size()), input_dim);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = samples.at(indices[i]).features.transpose();
  }
  return m;
}

std::vector<HierLabel> Dataset::labels() const {
  std::vector<HierLabel> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

std::vector<HierLabel> Dataset::labels(std::span<const std::size_t> indices) const {
  std::vector<HierLabel> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(samples.at(i).label);
  return out;
}

void Dataset::validate() const {
  if (static_cast<int>(class_names.size()) != num_classes) {
    throw Error(ErrorKind::InvalidConfig, "class name count differs from num_classes");
  }
  for (const auto& s : samples) {
    if (s.label.class_id < 0 || s.label.class_id >= num_classes) {
      throw Error(ErrorKind::IndexOutOfRange, "sample " + s.id + " has class id " +
                                                  std::to_string(s.label.class_id));
    }
    if (s.features.size() != input_dim) {
      throw Error(ErrorKind::DimensionMismatch, "sample " + s.id + " has feature length " +
                                                    std::to_string(s.features.size()));
    }
    require_finite(s.features, "features of " + s.id);
    if (s.soft_scores) {
      if (s.soft_scores->size() != num_classes) {
        throw Error(ErrorKind::DimensionMismatch, "sample " + s.id + " has " +
                                                      std::to_string(s.soft_scores->size()) +
                                                      " scores for " +
                                                      std::to_string(num_classes) + " classes");
      }
      require_finite(*s.soft_scores, "scores of " + s.id);
      if (s.soft_scores->cwiseAbs().maxCoeff() > 1.0) {
        throw Error(ErrorKind::InvalidArgument, "sample " + s.id + " has a score outside [-1, 1]");
      }
    }
  }
}

// ---------------------------------------------------------------------------

void GeneratorConfig::validate() const {
  if (num_classes < 1) throw Error(ErrorKind::InvalidConfig, "num_classes must be >= 1");
  if (input_dim < 2) throw Error(ErrorKind::InvalidConfig, "input_dim must be >= 2");
  if (per_subclass_count < 1) throw Error(ErrorKind::InvalidConfig, "per_subclass_count must be >= 1");
  if (!(polarity_offset > 0.0)) throw Error(ErrorKind::InvalidConfig, "alpha must be > 0");
  if (!(noise_sigma > 0.0)) throw Error(ErrorKind::InvalidConfig, "sigma must be > 0");
}

namespace {

Vector random_unit(Rng& rng, int dim) {
  Vector v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  } while (v.norm() <= kNormFloor);
  return v.normalized();
}

}  // namespace

Matrix synthetic_means(const GeneratorConfig& config) {
  config.validate();
  Rng rng = Rng(config.seed).split(0);
  const int k = config.num_classes;
  Matrix means(k * kPolarityCount, config.input_dim);
  for (int c = 0; c < k; ++c) {
    const Vector v = random_unit(rng, config.input_dim);
    Vector u;
    do {
      u = random_unit(rng, config.input_dim);
      u -= v * v.dot(u);
    } while (u.norm() <= 1e-6);
    u.normalize();
    const double a = config.polarity_offset;
    means.row(HierLabel{c, Polarity::Positive}.subclass_index()) = (v + a * u).transpose();
    means.row(HierLabel{c, Polarity::Neutral}.subclass_index()) = v.transpose();
    means.row(HierLabel{c, Polarity::Negative}.subclass_index()) = (v - a * u).transpose();
  }
  return means;
}

Dataset generate_synthetic(const GeneratorConfig& config, Split split) {
  const Matrix means = synthetic_means(config);
  Rng noise = Rng(config.seed).split(split == Split::Train ? 1 : 2);

  Dataset ds;
  ds.num_classes = config.num_classes;
  ds.input_dim = config.input_dim;
  ds.split = split;
  for (int c = 0; c < config.num_classes; ++c) ds.class_names.push_back("class" + std::to_string(c));
  ds.samples.reserve(static_cast<std::size_t>(means.rows()) *
                     static_cast<std::size_t>(config.per_subclass_count));

  for (int c = 0; c < config.num_classes; ++c) {
    for (Polarity p : {Polarity::Negative, Polarity::Neutral, Polarity::Positive}) {
      const HierLabel label{c, p};
      for (int i = 0; i < config.per_subclass_count; ++i) {
        Sample s;
        s.id = std::string(to_string(split)) + "-" + std::to_string(c) + "-" +
               std::string(to_string(p)) + "-" + std::to_string(i);
        s.label = label;
        s.features = means.row(label.subclass_index()).transpose();
        for (int j = 0; j < config.input_dim; ++j) s.features[j] += config.noise_sigma * noise.normal();
        ds.samples.push_back(std::move(s));
      }
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------

namespace {

Vector parse_number_array(const ordered_json& arr, const char* field, std::size_t line) {
  if (!arr.is_array()) {
    throw Error(ErrorKind::ParseError, std::string("\"") + field + "\" must be an array", line);
  }
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) {
      throw Error(ErrorKind::ParseError, std::string("\"") + field + "\" holds a non-number", line);
    }
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  if (!v.allFinite()) {
    throw Error(ErrorKind::NonFinite, std::string("\"") + field + "\" holds NaN or Inf", line);
  }
  return v;
}

std::string require_string(const ordered_json& obj, const char* field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_string()) {
    throw Error(ErrorKind::ParseError, std::string("missing string field \"") + field + "\"", line);
  }
  return it->get<std::string>();
}

}  // namespace

Dataset load_jsonl(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());

  Dataset ds;
  ds.class_names = options.class_names;
  std::map<std::string, int> class_ids;
  for (std::size_t i = 0; i < ds.class_names.size(); ++i) {
    class_ids.emplace(ds.class_names[i], static_cast<int>(i));
  }
  std::optional<int> dim = options.expected_dim;
  bool any_scores = false;

  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;

    ordered_json obj;
    try {
      obj = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::ParseError, e.what(), line);
    }
    if (!obj.is_object()) throw Error(ErrorKind::ParseError, "line is not a JSON object", line);

    Sample s;
    s.id = require_string(obj, "id", line);
    const std::string cls = require_string(obj, "class", line);
    const std::string pol = require_string(obj, "polarity", line);

    std::optional<Polarity> polarity = parse_polarity(pol);
    if (!polarity && options.entailment_labels) polarity = parse_entailment_label(pol);
    if (!polarity) throw Error(ErrorKind::UnknownPolarity, "unknown polarity \"" + pol + "\"", line);

    auto [it, inserted] = class_ids.emplace(cls, static_cast<int>(ds.class_names.size()));
    if (inserted) ds.class_names.push_back(cls);
    s.label = HierLabel{it->second, *polarity};

    auto vec = obj.find("vector");
    if (vec == obj.end()) throw Error(ErrorKind::ParseError, "missing field \"vector\"", line);
    s.features = parse_number_array(*vec, "vector", line);
    if (s.features.size() == 0) throw Error(ErrorKind::ParseError, "empty vector", line);
    if (dim && s.features.size() != *dim) {
      throw Error(ErrorKind::DimensionMismatch,
                  "vector length " + std::to_string(s.features.size()) + ", expected " +
                      std::to_string(*dim),
                  line);
    }
    dim = static_cast<int>(s.features.size());

    if (auto sc = obj.find("scores"); sc != obj.end() && !sc->is_null()) {
      s.soft_scores = parse_number_array(*sc, "scores", line);
      if (s.soft_scores->size() > 0 && s.soft_scores->cwiseAbs().maxCoeff() > 1.0) {
        throw Error(ErrorKind::ParseError, "score outside [-1, 1]", line);
      }
      any_scores = true;
    }
    ds.samples.push_back(std::move(s));
  }
  if (in.bad()) throw Error(ErrorKind::IoError, "read failure on " + path.string());

  ds.num_classes = static_cast<int>(ds.class_names.size());
  ds.input_dim = dim.value_or(0);
  ds.split = options.split.value_or(any_scores ? Split::Test : Split::Train);
  ds.validate();
  return ds;
}

void save_jsonl(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  for (const auto& s : dataset.samples) {
    ordered_json obj;
    obj["id"] = s.id;
    obj["class"] = dataset.class_names.at(static_cast<std::size_t>(s.label.class_id));
    obj["polarity"] = std::string(to_string(s.label.polarity));
    obj["vector"] = std::vector<double>(s.features.data(), s.features.data() + s.features.size());
    if (s.soft_scores) {
      obj["scores"] = std::vector<double>(s.soft_scores->data(),
                                          s.soft_scores->data() + s.soft_scores->size());
    }
    out << obj.dump() << '\n';
  }
  if (!out) throw Error(ErrorKind::IoError, "write failure on " + path.string());
}

}  // namespace hiermetric
