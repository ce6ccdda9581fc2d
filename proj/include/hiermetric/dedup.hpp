#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hiermetric {

inline constexpr double kDefaultDedupThreshold = 0.9;

struct TextItem {
  std::string id;
  std::string text;
};

struct DedupRemoval {
  std::string removed_id;
  std::string kept_id;  ///< most similar previously kept text
  double similarity = 0.0;
};

struct DedupResult {
  std::vector<std::string> kept_ids;
  std::vector<DedupRemoval> removed;
};

/// Lower-cased tokens split on ASCII non-alphanumerics. Bytes >= 0x80 are
/// kept inside tokens so UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view text);

/// Sparse L2-normalized TF-IDF vector: (term id, weight) sorted by term id.
using SparseVector = std::vector<std::pair<int, double>>;

/// raw-count tf times smoothed idf ln((1+N)/(1+df)) + 1, one vector per text.
std::vector<SparseVector> tfidf_vectors(std::span<const TextItem> texts);

double sparse_cosine(const SparseVector& a, const SparseVector& b) noexcept;

/// Greedy scan in input order: a text is dropped when its cosine with any
/// already-kept text is >= threshold. Throws EmptyCorpus for no input.
DedupResult tfidf_dedup(std::span<const TextItem> texts, double threshold = kDefaultDedupThreshold,
                        int threads = 1);

/// Reads {"id": ..., "text": ...} lines.
std::vector<TextItem> load_texts_jsonl(const std::filesystem::path& path);
void save_texts_jsonl(const std::filesystem::path& path, std::span<const TextItem> texts);
/// JSON array of {removed_id, kept_id, similarity}.
std::string dedup_report_json(const DedupResult& result);

}  // namespace hiermetric
