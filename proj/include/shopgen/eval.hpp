#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "shopgen/bm25.hpp"
#include "shopgen/catalog.hpp"
#include "shopgen/conversation.hpp"
#include "shopgen/dialogue.hpp"
#include "shopgen/metrics.hpp"
#include "shopgen/tracker.hpp"

namespace shopgen {

/// The query-generation target: category plus wanted/unwanted/optional
/// feature lists extracted from a dialogue.
struct StructuredQuery {
  std::string category;
  std::vector<std::pair<std::string, std::string>> wanted;
  std::vector<std::pair<std::string, std::string>> unwanted;
  std::vector<std::string> optionals;

  friend bool operator==(const StructuredQuery&, const StructuredQuery&) = default;
};

inline StructuredQuery query_from_preference(const Preference& pref) {
  StructuredQuery q;
  q.category = pref.category;
  for (const auto& e : pref.entries) {
    switch (e.interest) {
      case Interest::Wanted: q.wanted.emplace_back(e.aspect, e.value); break;
      case Interest::Unwanted: q.unwanted.emplace_back(e.aspect, e.value); break;
      case Interest::Optional: q.optionals.push_back(e.aspect); break;
    }
  }
  return q;
}

inline std::vector<PreferenceEntry> query_entries(const StructuredQuery& q) {
  std::vector<PreferenceEntry> entries;
  for (const auto& [a, v] : q.wanted) entries.push_back({a, v, Interest::Wanted});
  for (const auto& [a, v] : q.unwanted) entries.push_back({a, v, Interest::Unwanted});
  for (const auto& a : q.optionals) entries.push_back({a, "", Interest::Optional});
  return entries;
}

/// Canonical serialization: category first, then each group sorted, so equal
/// queries always serialize identically.
inline std::string serialize_query(const StructuredQuery& q) {
  StructuredQuery sorted = q;
  std::sort(sorted.wanted.begin(), sorted.wanted.end());
  std::sort(sorted.unwanted.begin(), sorted.unwanted.end());
  std::sort(sorted.optionals.begin(), sorted.optionals.end());
  std::string out = "category: " + sorted.category;
  for (const auto& [a, v] : sorted.wanted) out += " | wanted " + a + ": " + v;
  for (const auto& [a, v] : sorted.unwanted) out += " | unwanted " + a + ": " + v;
  for (const auto& a : sorted.optionals) out += " | optional " + a;
  return out;
}

/// Items for exact-match F1. A string in the canonical grammar decomposes
/// into one item per segment; anything else is a single opaque item, so a
/// free-text prediction only matches a gold query by being identical.
inline std::set<std::string> query_items(const std::string& serialized) {
  std::vector<std::string> segments;
  std::size_t at = 0;
  while (true) {
    const auto sep = serialized.find(" | ", at);
    if (sep == std::string::npos) {
      segments.push_back(serialized.substr(at));
      break;
    }
    segments.push_back(serialized.substr(at, sep - at));
    at = sep + 3;
  }
  std::set<std::string> items;
  for (const auto& seg : segments) {
    const bool canonical = seg.rfind("category: ", 0) == 0 || seg.rfind("wanted ", 0) == 0 ||
                           seg.rfind("unwanted ", 0) == 0 || seg.rfind("optional ", 0) == 0;
    if (!canonical) return {fold_collapse(serialized)};
    items.insert(fold_collapse(seg));
  }
  return items;
}

/// The weak baseline: the full conversation history as the query.
inline std::string baseline_query(const Conversation& conv) {
  std::string out;
  for (const auto& u : conv.utterances) {
    if (!out.empty()) out += ' ';
    out += u.text;
  }
  return out;
}

class QueryExtractor {
 public:
  virtual ~QueryExtractor() = default;
  virtual StructuredQuery extract(const Conversation& conv) const = 0;
  virtual std::string name() const = 0;
};

/// Deterministic reference extractor: the dialogue-state tracker run over the
/// full transcript. An entry lands in the query only if the customer actually
/// voiced it; the category counts only if turn 0 mentions it.
class ReferenceExtractor final : public QueryExtractor {
 public:
  explicit ReferenceExtractor(TrackerConfig config = {}) : config_(std::move(config)) {}

  std::string name() const override { return "reference"; }

  StructuredQuery extract(const Conversation& conv) const override {
    const std::vector<PlanStep> script = build_script(conv.preference, conv.plan_history);
    const DialogueState state = track_conversation(script, conv.utterances, config_);

    StructuredQuery q;
    if (!conv.utterances.empty() &&
        fold_collapse(conv.utterances.front().text).find(fold_collapse(conv.preference.category)) !=
            std::string::npos) {
      q.category = conv.preference.category;
    }
    for (const auto& e : state.mentioned_wanted) q.wanted.emplace_back(e.aspect, e.value);
    for (const auto& e : state.mentioned_unwanted) q.unwanted.emplace_back(e.aspect, e.value);
    for (const auto& e : state.mentioned_optional) q.optionals.push_back(e.aspect);
    std::sort(q.wanted.begin(), q.wanted.end());
    std::sort(q.unwanted.begin(), q.unwanted.end());
    std::sort(q.optionals.begin(), q.optionals.end());
    return q;
  }

 private:
  TrackerConfig config_;
};

/// Query text for the sparse ranker: category, wanted pairs, optional aspect
/// names. Unwanted pairs stay out of the positive text.
inline std::string flatten_query(const StructuredQuery& q) {
  std::string out = q.category;
  for (const auto& [a, v] : q.wanted) out += " " + a + " " + v;
  for (const auto& a : q.optionals) out += " " + a;
  return out;
}

inline bool matches_unwanted(const Product& p, const StructuredQuery& q) {
  for (const auto& [aspect, value] : q.unwanted) {
    const std::string* v = p.find_aspect(aspect);
    if (v && fold_collapse(*v) == fold_collapse(value)) return true;
  }
  return false;
}

/// Rank for a structured query: BM25 over the flattened positive text, then
/// documents matching an unwanted pair exactly are demoted below every
/// non-matching document. Order within each group is preserved.
inline RankedResult rank_structured(const Bm25Index& index, const Catalog& catalog,
                                    const StructuredQuery& q, std::size_t k) {
  if (k == 0) throw std::invalid_argument("rank: k must be positive");
  std::vector<ScoredDoc> scored = index.score_all(tokenize(flatten_query(q)));
  if (!q.unwanted.empty()) {
    std::stable_partition(scored.begin(), scored.end(), [&](const ScoredDoc& d) {
      const Product* p = catalog.by_id(d.id);
      return p == nullptr || !matches_unwanted(*p, q);
    });
  }
  RankedResult result;
  result.items = std::move(scored);
  if (result.items.size() > k) result.items.resize(k);
  return result;
}

/// Combined CPR + CQG metrics over parallel example lists.
inline MetricReport compute_metrics(
    const std::vector<std::pair<RankedResult, std::string>>& rankings,
    const std::vector<int>& ks,
    const std::vector<std::pair<std::string, std::string>>& query_pairs) {
  if (rankings.empty() && query_pairs.empty()) {
    throw std::invalid_argument("compute_metrics: empty input");
  }
  MetricReport report;
  if (!rankings.empty()) {
    auto [mrr, hits] = ranking_metrics(rankings, ks);
    report.mrr = mrr;
    report.hit_at = std::move(hits);
  }
  for (const auto& [pred, gold] : query_pairs) {
    report.exact_f1 += exact_f1_items(query_items(pred), query_items(gold));
    const auto pt = tokenize(pred), gt = tokenize(gold);
    report.rouge_1 += rouge_n(pt, gt, 1);
    report.rouge_2 += rouge_n(pt, gt, 2);
    report.rouge_l += rouge_l(pt, gt);
  }
  if (!query_pairs.empty()) {
    const double n = static_cast<double>(query_pairs.size());
    report.exact_f1 /= n;
    report.rouge_1 /= n;
    report.rouge_2 /= n;
    report.rouge_l /= n;
  }
  report.n_examples = std::max(rankings.size(), query_pairs.size());
  return report;
}

}  // namespace shopgen
