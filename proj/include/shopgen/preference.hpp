#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "shopgen/catalog.hpp"
#include "shopgen/common.hpp"
#include "shopgen/search.hpp"

namespace shopgen {

/// The sampled customer profile: category plus one entry per target aspect.
/// Wanted values are the target's own, Unwanted values are corrupted
/// catalog values, Optional entries are blank.
struct Preference {
  std::string category;
  std::vector<PreferenceEntry> entries;
  std::string target_id;

  const PreferenceEntry* find(std::string_view aspect) const {
    const std::string needle = fold_collapse(aspect);
    for (const auto& e : entries) {
      if (e.aspect == needle) return &e;
    }
    return nullptr;
  }
};

struct InterestWeights {
  double wanted = 1.0 / 3.0;
  double unwanted = 1.0 / 3.0;
  double optional_ = 1.0 / 3.0;
};

inline const Product& sample_target(const Catalog& catalog, Rng& rng) {
  if (catalog.empty()) throw std::runtime_error("sample_target: empty catalog");
  return catalog.products[rng.uniform_index(catalog.products.size())];
}

inline const Product& sample_target(const Catalog& catalog, std::uint64_t seed) {
  Rng rng(seed);
  return sample_target(catalog, rng);
}

/// Uniform draw over the aspect's other in-category values. nullopt when the
/// aspect has a single value domain (uncorruptable).
inline std::optional<std::string> corrupt_value(const Catalog& catalog,
                                                const std::string& category,
                                                const std::string& aspect,
                                                const std::string& true_value, Rng& rng) {
  const auto& stats = aspect_value_stats(catalog, category);
  auto it = stats.find(fold_collapse(aspect));
  if (it == stats.end()) return std::nullopt;
  const std::string truth = fold_collapse(true_value);
  std::vector<std::string> others;  // map order: sorted, deterministic
  for (const auto& [value, _] : it->second) {
    if (fold_collapse(value) != truth) others.push_back(value);
  }
  if (others.empty()) return std::nullopt;
  return others[rng.uniform_index(others.size())];
}

/// Assign an interest to every target aspect. Guarantees at least one Wanted
/// entry by resampling the assignment; aspects whose value cannot be
/// corrupted are re-assigned Optional instead of Unwanted.
inline Preference sample_preference(const Product& target, const Catalog& catalog, Rng& rng,
                                    const InterestWeights& weights = {}) {
  if (target.aspects.empty()) {
    throw std::invalid_argument("sample_preference: target has no aspects");
  }
  const std::array<double, 3> w{weights.wanted, weights.unwanted, weights.optional_};

  Preference pref;
  pref.category = target.category;
  pref.target_id = target.id;

  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    pref.entries.clear();
    bool any_wanted = false;
    for (const auto& [aspect, value] : target.aspects) {
      PreferenceEntry e;
      e.aspect = aspect;
      switch (rng.pick_weighted(w)) {
        case 0:
          e.interest = Interest::Wanted;
          e.value = value;
          any_wanted = true;
          break;
        case 1: {
          auto corrupted = corrupt_value(catalog, target.category, aspect, value, rng);
          if (corrupted) {
            e.interest = Interest::Unwanted;
            e.value = std::move(*corrupted);
          } else {
            e.interest = Interest::Optional;
          }
          break;
        }
        default:
          e.interest = Interest::Optional;
          break;
      }
      pref.entries.push_back(std::move(e));
    }
    if (any_wanted) return pref;
  }

  // Degenerate weights kept resampling all-Optional; promote one aspect.
  auto& forced = pref.entries[rng.uniform_index(pref.entries.size())];
  forced.interest = Interest::Wanted;
  forced.value = *target.find_aspect(forced.aspect);
  return pref;
}

}  // namespace shopgen
