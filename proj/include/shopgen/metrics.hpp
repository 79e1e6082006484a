#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "shopgen/bm25.hpp"
#include "shopgen/common.hpp"

namespace shopgen {

struct MetricReport {
  double mrr = 0.0;
  std::map<int, double> hit_at;
  double rouge_1 = 0.0;
  double rouge_2 = 0.0;
  double rouge_l = 0.0;
  double exact_f1 = 0.0;
  std::size_t n_examples = 0;
};

namespace detail {

inline double f1_from(double overlap, double pred_total, double gold_total) {
  if (pred_total == 0.0 && gold_total == 0.0) return 1.0;
  if (pred_total == 0.0 || gold_total == 0.0) return 0.0;
  const double p = overlap / pred_total;
  const double r = overlap / gold_total;
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

inline std::map<std::vector<std::string>, int> ngram_counts(
    const std::vector<std::string>& tokens, std::size_t n) {
  std::map<std::vector<std::string>, int> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace detail

/// ROUGE-N F1 over whitespace tokens with clipped n-gram counts.
inline double rouge_n(const std::vector<std::string>& pred, const std::vector<std::string>& gold,
                      std::size_t n) {
  const auto pc = detail::ngram_counts(pred, n);
  const auto gc = detail::ngram_counts(gold, n);
  double overlap = 0.0, pred_total = 0.0, gold_total = 0.0;
  for (const auto& [_, c] : pc) pred_total += c;
  for (const auto& [g, c] : gc) {
    gold_total += c;
    if (auto it = pc.find(g); it != pc.end()) overlap += std::min(c, it->second);
  }
  return detail::f1_from(overlap, pred_total, gold_total);
}

/// ROUGE-L F1 via longest common subsequence.
inline double rouge_l(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::vector<std::vector<int>> lcs(pred.size() + 1, std::vector<int>(gold.size() + 1, 0));
  for (std::size_t i = 1; i <= pred.size(); ++i) {
    for (std::size_t j = 1; j <= gold.size(); ++j) {
      lcs[i][j] = pred[i - 1] == gold[j - 1] ? lcs[i - 1][j - 1] + 1
                                             : std::max(lcs[i - 1][j], lcs[i][j - 1]);
    }
  }
  const double l = lcs[pred.size()][gold.size()];
  return detail::f1_from(l, static_cast<double>(pred.size()), static_cast<double>(gold.size()));
}

/// Set-level exact-match F1 between canonical query items.
inline double exact_f1_items(const std::set<std::string>& pred, const std::set<std::string>& gold) {
  double overlap = 0.0;
  for (const auto& item : pred) {
    if (gold.count(item)) overlap += 1.0;
  }
  return detail::f1_from(overlap, static_cast<double>(pred.size()),
                         static_cast<double>(gold.size()));
}

/// MRR and Hit@k over (ranking, gold id) pairs. The reciprocal rank of an
/// absent gold is 0.
inline std::pair<double, std::map<int, double>> ranking_metrics(
    const std::vector<std::pair<RankedResult, std::string>>& rankings,
    const std::vector<int>& ks) {
  if (rankings.empty()) throw std::invalid_argument("ranking_metrics: empty input");
  double mrr = 0.0;
  std::map<int, double> hits;
  for (int k : ks) hits[k] = 0.0;
  for (const auto& [result, gold] : rankings) {
    const int rank = result.rank_of(gold);
    if (rank > 0) mrr += 1.0 / rank;
    for (int k : ks) {
      if (rank > 0 && rank <= k) hits[k] += 1.0;
    }
  }
  const double n = static_cast<double>(rankings.size());
  mrr /= n;
  for (auto& [_, v] : hits) v /= n;
  return {mrr, hits};
}

}  // namespace shopgen
