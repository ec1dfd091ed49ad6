#include "hypro/retriever.hpp"

#include <algorithm>
#include <cmath>

#include "hypro/errors.hpp"
#include "hypro/text.hpp"

namespace hypro {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

std::vector<RetrievalHit> top_k(std::vector<RetrievalHit> hits, std::size_t k) {
  sort_hits(hits);
  if (hits.size() > k) hits.resize(k);
  return hits;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

void sort_hits(std::vector<RetrievalHit>& hits) {
  std::stable_sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  });
}

TfidfIndex TfidfIndex::build(const std::vector<RetrievalDoc>& docs) {
  if (docs.empty()) throw EmptyCorpus();
  TfidfIndex index;
  std::vector<std::map<std::size_t, double>> counts;
  std::vector<std::size_t> df;
  for (const auto& [id, text] : docs) {
    std::map<std::size_t, double> tf;
    for (auto& tok : tokenize(text)) {
      auto [it, inserted] = index.vocabulary_.emplace(std::move(tok), index.vocabulary_.size());
      if (inserted) df.push_back(0);
      tf[it->second] += 1;
    }
    for (const auto& [col, n] : tf) ++df[col];
    index.ids_.push_back(id);
    counts.push_back(std::move(tf));
  }
  const double n_docs = static_cast<double>(docs.size());
  index.idf_.resize(df.size());
  for (std::size_t t = 0; t < df.size(); ++t) {
    index.idf_[t] = std::log((1.0 + n_docs) / (1.0 + static_cast<double>(df[t]))) + 1.0;
  }
  for (const auto& tf : counts) {
    SparseVector v;
    double norm = 0;
    for (const auto& [col, n] : tf) {
      double w = n * index.idf_[col];
      v.emplace_back(col, w);
      norm += w * w;
    }
    norm = std::sqrt(norm);
    if (norm > 0) {
      for (auto& [col, w] : v) w /= norm;
    }
    index.vectors_.push_back(std::move(v));
  }
  return index;
}

TfidfIndex::SparseVector TfidfIndex::vectorize(std::string_view text) const {
  std::map<std::size_t, double> tf;
  for (const auto& tok : tokenize(text)) {
    auto it = vocabulary_.find(tok);
    if (it != vocabulary_.end()) tf[it->second] += 1;
  }
  SparseVector v;
  double norm = 0;
  for (const auto& [col, n] : tf) {
    double w = n * idf_[col];
    v.emplace_back(col, w);
    norm += w * w;
  }
  norm = std::sqrt(norm);
  if (norm > 0) {
    for (auto& [col, w] : v) w /= norm;
  }
  return v;
}

namespace {

double sparse_dot(const TfidfIndex::SparseVector& a, const TfidfIndex::SparseVector& b) {
  double dot = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first == b[j].first) {
      dot += a[i++].second * b[j++].second;
    } else if (a[i].first < b[j].first) {
      ++i;
    } else {
      ++j;
    }
  }
  return clamp01(dot);
}

}  // namespace

double TfidfIndex::cosine(std::string_view query, std::size_t doc) const {
  return sparse_dot(vectorize(query), vectors_.at(doc));
}

std::vector<RetrievalHit> TfidfIndex::scores(std::string_view query) const {
  const SparseVector q = vectorize(query);
  std::vector<RetrievalHit> hits;
  hits.reserve(ids_.size());
  for (std::size_t d = 0; d < ids_.size(); ++d) {
    double s = sparse_dot(q, vectors_[d]);
    hits.push_back({ids_[d], s, s, 0});
  }
  sort_hits(hits);
  return hits;
}

LcsResult longest_common_substring(std::string_view a, std::string_view b) {
  const std::string fa = casefold(a);
  const std::string fb = casefold(b);
  std::vector<std::size_t> prev(fb.size() + 1, 0), cur(fb.size() + 1, 0);
  std::size_t best = 0, best_end = 0;
  for (std::size_t i = 1; i <= fa.size(); ++i) {
    for (std::size_t j = 1; j <= fb.size(); ++j) {
      cur[j] = fa[i - 1] == fb[j - 1] ? prev[j - 1] + 1 : 0;
      if (cur[j] > best) {
        best = cur[j];
        best_end = i;
      }
    }
    std::swap(prev, cur);
  }
  return {best, fa.substr(best_end - best, best)};
}

std::vector<RetrievalHit> hybrid_retrieve(std::string_view query, const std::vector<RetrievalDoc>& docs,
                                          std::size_t k, double lambda) {
  const TfidfIndex index = TfidfIndex::build(docs);
  const auto q = index.vectorize(query);
  const double qlen = static_cast<double>(std::max<std::size_t>(query.size(), 1));
  std::vector<RetrievalHit> hits;
  hits.reserve(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    double cos = sparse_dot(q, index.doc_vector(d));
    double lcs = clamp01(static_cast<double>(longest_common_substring(query, docs[d].second).length) / qlen);
    hits.push_back({docs[d].first, clamp01(lambda * cos + (1 - lambda) * lcs), cos, lcs});
  }
  return top_k(std::move(hits), k);
}

std::vector<RetrievalHit> embed_retrieve(std::string_view query, const std::vector<RetrievalDoc>& docs,
                                         std::size_t k, const Embedder& embedder) {
  if (docs.empty()) throw EmptyCorpus();
  if (!embedder) throw EmbeddingUnavailable("no embedding endpoint configured");
  std::vector<std::string> texts{std::string(query)};
  for (const auto& d : docs) texts.push_back(d.second);
  std::vector<std::vector<double>> vecs;
  try {
    vecs = embedder(texts);
  } catch (const EmbeddingUnavailable&) {
    throw;
  } catch (const std::exception& e) {
    throw EmbeddingUnavailable(e.what());
  }
  if (vecs.size() != texts.size()) throw EmbeddingUnavailable("embedding count does not match input count");
  auto norm = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  const double qn = norm(vecs[0]);
  std::vector<RetrievalHit> hits;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto& v = vecs[d + 1];
    if (v.size() != vecs[0].size()) throw EmbeddingUnavailable("embedding dimensions differ");
    double dot = 0;
    for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * vecs[0][i];
    const double dn = norm(v);
    double s = qn > 0 && dn > 0 ? clamp01(dot / (qn * dn)) : 0.0;
    hits.push_back({docs[d].first, s, 0, 0});
  }
  return top_k(std::move(hits), k);
}

}  // namespace hypro
