#include "hiermetric/dedup.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

#include <json.hpp>

#include "hiermetric/error.hpp"
#include "hiermetric/parallel.hpp"

namespace hiermetric {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (u >= 0x80 || std::isalnum(u)) {
      current.push_back(static_cast<char>(u < 0x80 ? std::tolower(u) : u));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<SparseVector> tfidf_vectors(std::span<const TextItem> texts) {
  std::unordered_map<std::string, int> vocab;
  std::vector<std::map<int, double>> counts(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    for (auto& tok : tokenize(texts[i].text)) {
      auto [it, _] = vocab.emplace(std::move(tok), static_cast<int>(vocab.size()));
      counts[i][it->second] += 1.0;
    }
  }
  std::vector<double> df(vocab.size(), 0.0);
  for (const auto& c : counts) {
    for (const auto& [term, _] : c) df[static_cast<std::size_t>(term)] += 1.0;
  }
  const double n = static_cast<double>(texts.size());

  std::vector<SparseVector> out(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    SparseVector& v = out[i];
    double sq = 0.0;
    for (const auto& [term, tf] : counts[i]) {
      const double idf = std::log((1.0 + n) / (1.0 + df[static_cast<std::size_t>(term)])) + 1.0;
      v.emplace_back(term, tf * idf);
      sq += (tf * idf) * (tf * idf);
    }
    if (sq > 0.0) {
      const double inv = 1.0 / std::sqrt(sq);
      for (auto& [_, w] : v) w *= inv;
    }
  }
  return out;
}

double sparse_cosine(const SparseVector& a, const SparseVector& b) noexcept {
  double dot = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  return std::min(dot, 1.0);
}

DedupResult tfidf_dedup(std::span<const TextItem> texts, double threshold, int threads) {
  if (texts.empty()) throw Error(ErrorKind::EmptyCorpus, "no texts to deduplicate");
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "dedup threshold must lie in (0, 1]");
  }
  const auto vectors = tfidf_vectors(texts);

  DedupResult result;
  std::vector<std::size_t> kept;
  std::vector<double> sims;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    sims.assign(kept.size(), 0.0);
    parallel_for(kept.size(), threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t k = begin; k < end; ++k) sims[k] = sparse_cosine(vectors[i], vectors[kept[k]]);
    });
    // First maximum in keep order.
    std::size_t best = kept.size();
    for (std::size_t k = 0; k < kept.size(); ++k) {
      if (best == kept.size() || sims[k] > sims[best]) best = k;
    }
    if (best != kept.size() && sims[best] >= threshold) {
      result.removed.push_back({texts[i].id, texts[kept[best]].id, sims[best]});
    } else {
      kept.push_back(i);
      result.kept_ids.push_back(texts[i].id);
    }
  }
  return result;
}

std::vector<TextItem> load_texts_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<TextItem> items;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::ParseError, e.what(), n);
    }
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string() ||
        !obj.contains("text") || !obj["text"].is_string()) {
      throw Error(ErrorKind::ParseError, "expected {\"id\": string, \"text\": string}", n);
    }
    items.push_back({obj["id"].get<std::string>(), obj["text"].get<std::string>()});
  }
  return items;
}

void save_texts_jsonl(const std::filesystem::path& path, std::span<const TextItem> texts) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  for (const auto& t : texts) {
    nlohmann::ordered_json obj;
    obj["id"] = t.id;
    obj["text"] = t.text;
    out << obj.dump() << '\n';
  }
}

std::string dedup_report_json(const DedupResult& result) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : result.removed) {
    nlohmann::ordered_json o;
    o["removed_id"] = r.removed_id;
    o["kept_id"] = r.kept_id;
    o["similarity"] = r.similarity;
    arr.push_back(std::move(o));
  }
  return arr.dump(2);
}

}  // namespace hiermetric
