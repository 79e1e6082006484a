#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "shopgen/catalog.hpp"
#include "shopgen/common.hpp"

namespace shopgen {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct ScoredDoc {
  std::string id;
  double score = 0.0;

  friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

/// Ranked product ids, score-descending with id tie-break; at most k entries.
struct RankedResult {
  std::vector<ScoredDoc> items;

  int rank_of(const std::string& id) const {  // 1-based; 0 = absent
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (items[i].id == id) return static_cast<int>(i) + 1;
    }
    return 0;
  }
};

/// Inverted index over one document per product: the title followed by every
/// aspect key and value, whitespace/punctuation tokenized and case-folded.
/// Scores use idf = ln((N - df + 0.5)/(df + 0.5) + 1); repeated query tokens
/// contribute once per occurrence.
class Bm25Index {
 public:
  explicit Bm25Index(const Catalog& catalog, Bm25Params params = {})
      : params_(params) {
    if (catalog.empty()) throw std::invalid_argument("bm25: empty catalog");
    doc_ids_.reserve(catalog.products.size());
    doc_len_.reserve(catalog.products.size());
    double total_len = 0.0;
    for (std::uint32_t d = 0; d < catalog.products.size(); ++d) {
      const auto tokens = document_tokens(catalog.products[d]);
      std::map<std::string, std::uint32_t> tf;
      for (const auto& t : tokens) ++tf[t];
      for (const auto& [term, count] : tf) postings_[term].emplace_back(d, count);
      doc_ids_.push_back(catalog.products[d].id);
      doc_len_.push_back(static_cast<double>(tokens.size()));
      total_len += static_cast<double>(tokens.size());
    }
    avgdl_ = total_len / static_cast<double>(doc_ids_.size());
  }

  static std::vector<std::string> document_tokens(const Product& p) {
    std::vector<std::string> tokens = tokenize(p.title);
    for (const auto& [key, value] : p.aspects) {
      for (auto& t : tokenize(key)) tokens.push_back(std::move(t));
      for (auto& t : tokenize(value)) tokens.push_back(std::move(t));
    }
    return tokens;
  }

  std::size_t size() const { return doc_ids_.size(); }

  double idf(const std::string& term) const {
    const auto it = postings_.find(term);
    const double df = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
    const double n = static_cast<double>(doc_ids_.size());
    return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
  }

  /// Score every document containing at least one query term. Terms are
  /// accumulated in sorted order with occurrence multipliers, so a reordered
  /// query produces bit-identical scores.
  std::vector<ScoredDoc> score_all(const std::vector<std::string>& query_tokens) const {
    std::map<std::string, std::size_t> term_counts;
    for (const auto& term : query_tokens) ++term_counts[term];
    std::map<std::uint32_t, double> acc;
    for (const auto& [term, count] : term_counts) {
      const auto it = postings_.find(term);
      if (it == postings_.end()) continue;
      const double w = idf(term) * static_cast<double>(count);
      for (const auto& [doc, tf] : it->second) {
        const double norm = params_.k1 * (1.0 - params_.b + params_.b * doc_len_[doc] / avgdl_);
        acc[doc] += w * (tf * (params_.k1 + 1.0)) / (tf + norm);
      }
    }
    std::vector<ScoredDoc> scored;
    scored.reserve(acc.size());
    for (const auto& [doc, score] : acc) scored.push_back({doc_ids_[doc], score});
    std::stable_sort(scored.begin(), scored.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.id < b.id;
    });
    return scored;
  }

  RankedResult rank(const std::string& query, std::size_t k) const {
    if (k == 0) throw std::invalid_argument("bm25: k must be positive");
    RankedResult result;
    result.items = score_all(tokenize(query));
    if (result.items.size() > k) result.items.resize(k);
    return result;
  }

 private:
  Bm25Params params_;
  std::map<std::string, std::vector<std::pair<std::uint32_t, std::uint32_t>>> postings_;
  std::vector<std::string> doc_ids_;
  std::vector<double> doc_len_;
  double avgdl_ = 0.0;
};

}  // namespace shopgen
