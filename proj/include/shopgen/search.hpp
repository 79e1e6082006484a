#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "shopgen/catalog.hpp"
#include "shopgen/common.hpp"

namespace shopgen {

enum class Interest { Wanted, Unwanted, Optional };

inline std::string to_string(Interest i) {
  switch (i) {
    case Interest::Wanted: return "wanted";
    case Interest::Unwanted: return "unwanted";
    case Interest::Optional: return "optional";
  }
  return "optional";
}

inline Interest interest_from_string(std::string_view s) {
  if (s == "wanted") return Interest::Wanted;
  if (s == "unwanted") return Interest::Unwanted;
  if (s == "optional") return Interest::Optional;
  throw std::invalid_argument("unknown interest: " + std::string(s));
}

/// One (aspect, value, interest) element. Optional entries carry an empty
/// value. The same shape serves preferences, revealed prefixes and plan steps.
struct PreferenceEntry {
  std::string aspect;
  std::string value;  // empty for Optional
  Interest interest = Interest::Optional;

  friend bool operator==(const PreferenceEntry&, const PreferenceEntry&) = default;
};

/// The prefix of the customer preference disclosed so far. Starts with the
/// product category only and grows append-only during planning.
struct RevealedPreference {
  std::string category;
  std::vector<PreferenceEntry> entries;

  bool has_aspect(std::string_view aspect) const {
    const std::string needle = fold_collapse(aspect);
    for (const auto& e : entries) {
      if (e.aspect == needle) return true;
    }
    return false;
  }

  void append(PreferenceEntry e) {
    if (has_aspect(e.aspect)) {
      throw std::invalid_argument("revealed preference already has aspect: " + e.aspect);
    }
    if (e.interest == Interest::Optional) e.value.clear();
    entries.push_back(std::move(e));
  }
};

/// Candidate products in catalog order (indices into Catalog::products).
using ProductSet = std::vector<std::uint32_t>;

inline std::vector<std::string> product_ids(const Catalog& catalog, const ProductSet& set) {
  std::vector<std::string> ids;
  ids.reserve(set.size());
  for (auto idx : set) ids.push_back(catalog.product(idx).id);
  return ids;
}

namespace detail {

inline bool entry_admits(const Product& p, const PreferenceEntry& e) {
  switch (e.interest) {
    case Interest::Wanted: {
      const std::string* v = p.find_aspect(e.aspect);
      return v != nullptr && fold_collapse(*v) == fold_collapse(e.value);
    }
    case Interest::Unwanted: {
      const std::string* v = p.find_aspect(e.aspect);
      // A product that lacks the aspect entirely passes: the customer
      // rejected a value, not demanded the aspect's presence.
      return v == nullptr || fold_collapse(*v) != fold_collapse(e.value);
    }
    case Interest::Optional:
      return true;
  }
  return true;
}

}  // namespace detail

/// Rule-based candidate retrieval: the products of the revealed category that
/// admit every revealed entry. Order follows the catalog.
inline ProductSet filter(const Catalog& catalog, const RevealedPreference& rev_pref) {
  ProductSet out;
  for (std::uint32_t idx : catalog.category_products(rev_pref.category)) {
    const Product& p = catalog.product(idx);
    bool ok = true;
    for (const auto& e : rev_pref.entries) {
      if (!detail::entry_admits(p, e)) { ok = false; break; }
    }
    if (ok) out.push_back(idx);
  }
  return out;
}

/// Up to k most frequent values of `aspect` among the candidate set,
/// ordered by descending count then lexicographically.
inline std::vector<std::string> top_values(const ProductSet& set, const Catalog& catalog,
                                           std::string_view aspect, std::size_t k = 3) {
  std::map<std::string, int> counts;
  for (std::uint32_t idx : set) {
    if (const std::string* v = catalog.product(idx).find_aspect(aspect)) ++counts[*v];
  }
  std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  std::vector<std::string> out;
  for (const auto& [value, _] : ranked) {
    if (out.size() == k) break;
    out.push_back(value);
  }
  return out;
}

/// True iff the product meets every Wanted entry exactly and violates no
/// Unwanted entry. Optional entries never constrain.
inline bool satisfies(const Product& p, std::span<const PreferenceEntry> entries) {
  for (const auto& e : entries) {
    if (!detail::entry_admits(p, e)) return false;
  }
  return true;
}

template <typename PreferenceLike>
bool satisfies(const Product& p, const PreferenceLike& pref) {
  return satisfies(p, std::span<const PreferenceEntry>(pref.entries));
}

/// Search loop exit predicate: a non-empty candidate set whose members all
/// satisfy the full preference.
template <typename PreferenceLike>
bool converged(const ProductSet& set, const PreferenceLike& pref, const Catalog& catalog) {
  if (set.empty()) return false;
  for (std::uint32_t idx : set) {
    if (!satisfies(catalog.product(idx), pref)) return false;
  }
  return true;
}

}  // namespace shopgen
