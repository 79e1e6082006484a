#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "shopgen/catalog.hpp"
#include "shopgen/common.hpp"
#include "shopgen/search.hpp"

namespace shopgen {

// Absent aspect values are kept as an explicit branch of their own.
inline const std::string kMissingValue{};

inline std::string branch_display(const std::string& value) {
  return value.empty() ? "(missing)" : value;
}

/// Training view over a candidate set: one row per product, one column per
/// not-yet-revealed aspect, and a label that concatenates the row's own
/// aspect-value pairs. Products with identical restricted feature sets share
/// a label and therefore a leaf.
struct TreeDataset {
  std::vector<std::string> feature_space;  // first-seen order over the candidate set
  std::vector<std::uint32_t> items;        // catalog indices, aligned with rows
  std::vector<std::vector<std::string>> rows;  // rows[i][j]; empty string = missing
  std::vector<std::string> labels;

  std::size_t size() const { return rows.size(); }
};

inline std::string dataset_label(const std::vector<std::string>& feature_space,
                                 const std::vector<std::string>& row) {
  std::string label;
  for (std::size_t j = 0; j < feature_space.size(); ++j) {
    if (row[j].empty()) continue;
    if (!label.empty()) label += '&';
    label += feature_space[j];
    label += ':';
    label += row[j];
  }
  return label;
}

inline TreeDataset make_dataset(const ProductSet& set, const Catalog& catalog,
                                const RevealedPreference& rev_pref) {
  TreeDataset ds;
  std::set<std::string> seen;
  for (std::uint32_t idx : set) {
    for (const auto& [key, _] : catalog.product(idx).aspects) {
      if (rev_pref.has_aspect(key)) continue;
      if (seen.insert(key).second) ds.feature_space.push_back(key);
    }
  }
  ds.items.assign(set.begin(), set.end());
  ds.rows.reserve(set.size());
  ds.labels.reserve(set.size());
  for (std::uint32_t idx : set) {
    const Product& p = catalog.product(idx);
    std::vector<std::string> row(ds.feature_space.size());
    for (std::size_t j = 0; j < ds.feature_space.size(); ++j) {
      if (const std::string* v = p.find_aspect(ds.feature_space[j])) row[j] = *v;
    }
    ds.labels.push_back(dataset_label(ds.feature_space, row));
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

enum class SplitCriterion { GainRatio, Gain, Gini };

inline SplitCriterion criterion_from_string(std::string_view s) {
  if (s == "gain-ratio") return SplitCriterion::GainRatio;
  if (s == "gain") return SplitCriterion::Gain;
  if (s == "gini") return SplitCriterion::Gini;
  throw std::invalid_argument("unknown split criterion: " + std::string(s));
}

inline std::string to_string(SplitCriterion c) {
  switch (c) {
    case SplitCriterion::GainRatio: return "gain-ratio";
    case SplitCriterion::Gain: return "gain";
    case SplitCriterion::Gini: return "gini";
  }
  return "gain-ratio";
}

namespace detail {

inline double entropy(const std::map<std::string, int>& counts, double total) {
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    if (c == 0) continue;
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return h;
}

inline double gini(const std::map<std::string, int>& counts, double total) {
  double g = 1.0;
  for (const auto& [_, c] : counts) {
    const double p = c / total;
    g -= p * p;
  }
  return g;
}

struct SplitScore {
  double primary = 0.0;  // criterion value
  double gain = 0.0;     // plain information gain, first tie-break
};

// Scores differing by less than this are treated as tied and fall through
// to the next comparison; required because mathematically equal scores are
// reached through different floating-point summation orders.
inline constexpr double kScoreEps = 1e-9;

inline bool split_better(const SplitScore& a, const std::string& a_name,
                         const SplitScore& b, const std::string& b_name) {
  if (a.primary > b.primary + kScoreEps) return true;
  if (a.primary < b.primary - kScoreEps) return false;
  if (a.gain > b.gain + kScoreEps) return true;
  if (a.gain < b.gain - kScoreEps) return false;
  return a_name < b_name;
}

}  // namespace detail

/// Score one candidate aspect over a row subset. nullopt when the aspect has
/// a single branch (it cannot divide the set).
inline std::optional<detail::SplitScore> score_split(const TreeDataset& ds,
                                                     std::span<const std::size_t> row_idx,
                                                     std::size_t feature,
                                                     SplitCriterion criterion) {
  std::map<std::string, int> label_counts;
  std::map<std::string, std::map<std::string, int>> branch_label_counts;
  std::map<std::string, int> branch_sizes;
  for (std::size_t i : row_idx) {
    ++label_counts[ds.labels[i]];
    const std::string& v = ds.rows[i][feature];
    ++branch_label_counts[v][ds.labels[i]];
    ++branch_sizes[v];
  }
  if (branch_sizes.size() < 2) return std::nullopt;

  const double total = static_cast<double>(row_idx.size());
  detail::SplitScore score;
  const double parent_entropy = detail::entropy(label_counts, total);
  double children_entropy = 0.0;
  for (const auto& [v, counts] : branch_label_counts) {
    const double share = branch_sizes.at(v) / total;
    children_entropy += share * detail::entropy(counts, static_cast<double>(branch_sizes.at(v)));
  }
  score.gain = parent_entropy - children_entropy;

  switch (criterion) {
    case SplitCriterion::Gain:
      score.primary = score.gain;
      break;
    case SplitCriterion::GainRatio: {
      const double intrinsic = detail::entropy(branch_sizes, total);
      score.primary = intrinsic > 0.0 ? score.gain / intrinsic : 0.0;
      break;
    }
    case SplitCriterion::Gini: {
      double children_gini = 0.0;
      for (const auto& [v, counts] : branch_label_counts) {
        const double share = branch_sizes.at(v) / total;
        children_gini += share * detail::gini(counts, static_cast<double>(branch_sizes.at(v)));
      }
      score.primary = detail::gini(label_counts, total) - children_gini;
      break;
    }
  }
  return score;
}

/// The candidate aspect that maximally divides the row subset under the
/// configured criterion; ties fall back to plain gain, then the
/// lexicographically smaller aspect name. nullopt when no candidate divides
/// the subset at all.
inline std::optional<std::size_t> best_split(const TreeDataset& ds,
                                             std::span<const std::size_t> row_idx,
                                             std::span<const std::size_t> candidates,
                                             SplitCriterion criterion) {
  if (candidates.empty()) throw std::invalid_argument("best_split: no candidate aspects");
  std::set<std::string> distinct;
  for (std::size_t i : row_idx) distinct.insert(ds.labels[i]);
  if (distinct.size() < 2) throw std::invalid_argument("best_split: single label");

  std::optional<std::size_t> best;
  detail::SplitScore best_score;
  for (std::size_t j : candidates) {
    auto score = score_split(ds, row_idx, j, criterion);
    if (!score) continue;
    if (!best || detail::split_better(*score, ds.feature_space[j], best_score,
                                      ds.feature_space[*best])) {
      best = j;
      best_score = *score;
    }
  }
  return best;
}

struct TreeNode {
  std::string aspect;  // empty for leaves
  std::map<std::string, std::size_t> branches;  // value ("" = missing) -> node index
  std::vector<std::uint32_t> members;           // catalog indices
  std::string label;   // majority label; identical for all members when pure
  bool pure = false;
  int depth = 0;

  bool is_leaf() const { return aspect.empty(); }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  std::size_t root = 0;

  const TreeNode& node(std::size_t i) const { return nodes.at(i); }
  bool empty() const { return nodes.empty(); }
  int depth() const {
    int d = 0;
    for (const auto& n : nodes) d = std::max(d, n.depth);
    return d;
  }
};

struct TreeConfig {
  SplitCriterion criterion = SplitCriterion::GainRatio;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_leaf = 1;   // subsets this small become leaves
};

namespace detail {

inline std::size_t fit_node(const TreeDataset& ds, DecisionTree& tree,
                            std::vector<std::size_t> row_idx,
                            std::vector<std::size_t> candidates, int depth,
                            const TreeConfig& cfg) {
  std::map<std::string, int> label_counts;
  for (std::size_t i : row_idx) ++label_counts[ds.labels[i]];

  TreeNode node;
  node.depth = depth;
  node.members.reserve(row_idx.size());
  for (std::size_t i : row_idx) node.members.push_back(ds.items[i]);
  node.pure = label_counts.size() == 1;
  int best_count = -1;
  for (const auto& [label, count] : label_counts) {
    if (count > best_count) { node.label = label; best_count = count; }
  }

  const bool depth_capped = cfg.max_depth > 0 && depth >= static_cast<int>(cfg.max_depth);
  std::optional<std::size_t> split;
  if (!node.pure && !depth_capped && !candidates.empty() && row_idx.size() > cfg.min_leaf) {
    split = best_split(ds, row_idx, candidates, cfg.criterion);
  }
  if (!split) {
    tree.nodes.push_back(std::move(node));
    return tree.nodes.size() - 1;
  }

  node.aspect = ds.feature_space[*split];
  std::map<std::string, std::vector<std::size_t>> partitions;
  for (std::size_t i : row_idx) partitions[ds.rows[i][*split]].push_back(i);
  std::vector<std::size_t> child_candidates;
  for (std::size_t j : candidates) {
    if (j != *split) child_candidates.push_back(j);
  }

  const std::size_t self = tree.nodes.size();
  tree.nodes.push_back(std::move(node));
  for (auto& [value, subset] : partitions) {
    const std::size_t child =
        fit_node(ds, tree, std::move(subset), child_candidates, depth + 1, cfg);
    tree.nodes[self].branches.emplace(value, child);
  }
  return self;
}

}  // namespace detail

/// Grow a multi-way categorical tree until purity, feature exhaustion or the
/// configured caps. Deterministic for a fixed dataset and config.
inline DecisionTree fit_tree(const TreeDataset& ds, const TreeConfig& cfg = {}) {
  if (ds.size() == 0) throw std::invalid_argument("fit_tree: empty dataset");
  std::vector<std::size_t> row_idx(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) row_idx[i] = i;
  std::vector<std::size_t> candidates(ds.feature_space.size());
  for (std::size_t j = 0; j < candidates.size(); ++j) candidates[j] = j;

  DecisionTree tree;
  tree.nodes.reserve(2 * ds.size());
  tree.root = detail::fit_node(ds, tree, std::move(row_idx), std::move(candidates), 0, cfg);
  return tree;
}

}  // namespace shopgen
