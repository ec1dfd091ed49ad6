#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hypro {

/// Casefold, split on non-alphanumeric bytes, drop empty tokens. Bytes >= 0x80
/// count as alphanumeric so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

struct RetrievalHit {
  std::string doc_id;
  double score = 0;
  double tfidf = 0;
  double lcs = 0;  // normalized by query length

  friend bool operator==(const RetrievalHit&, const RetrievalHit&) = default;
};

/// Score descending, then doc_id ascending.
void sort_hits(std::vector<RetrievalHit>& hits);

using RetrievalDoc = std::pair<std::string, std::string>;  // (doc_id, text)

class TfidfIndex {
 public:
  using SparseVector = std::vector<std::pair<std::size_t, double>>;  // sorted by column

  /// Throws EmptyCorpus when `docs` is empty.
  static TfidfIndex build(const std::vector<RetrievalDoc>& docs);

  /// Cosine against every document, sorted by the hit order.
  std::vector<RetrievalHit> scores(std::string_view query) const;
  double cosine(std::string_view query, std::size_t doc) const;

  std::size_t size() const { return ids_.size(); }
  const std::map<std::string, std::size_t>& vocabulary() const { return vocabulary_; }
  const std::vector<double>& idf() const { return idf_; }
  const SparseVector& doc_vector(std::size_t i) const { return vectors_.at(i); }
  const std::string& doc_id(std::size_t i) const { return ids_.at(i); }

  SparseVector vectorize(std::string_view text) const;

 private:
  std::map<std::string, std::size_t> vocabulary_;
  std::vector<double> idf_;
  std::vector<std::string> ids_;
  std::vector<SparseVector> vectors_;
};

struct LcsResult {
  std::size_t length = 0;
  std::string substring;  // casefolded

  friend bool operator==(const LcsResult&, const LcsResult&) = default;
};

/// Longest contiguous common substring under ASCII casefolding. Ties resolve
/// to the earliest occurrence in `a`.
LcsResult longest_common_substring(std::string_view a, std::string_view b);

/// score = lambda * tfidf_cosine + (1 - lambda) * lcs / max(|query|, 1).
/// Throws EmptyCorpus when `docs` is empty.
std::vector<RetrievalHit> hybrid_retrieve(std::string_view query, const std::vector<RetrievalDoc>& docs,
                                          std::size_t k, double lambda);

/// Returns one vector per input text. Throws on failure.
using Embedder = std::function<std::vector<std::vector<double>>(const std::vector<std::string>&)>;

/// Cosine over embeddings, clamped to [0, 1]. Any embedder failure surfaces
/// as EmbeddingUnavailable.
std::vector<RetrievalHit> embed_retrieve(std::string_view query, const std::vector<RetrievalDoc>& docs,
                                         std::size_t k, const Embedder& embedder);

}  // namespace hypro
