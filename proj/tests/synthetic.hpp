#pragma once

// Seeded synthetic catalogs for tests and the acceptance suite. Products are
// drawn from fixed word pools so values stay plausible, distinct across
// aspects, and reproducible from the seed alone.

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "shopgen/catalog.hpp"
#include "shopgen/common.hpp"

namespace synthetic {

struct Spec {
  std::size_t categories = 5;
  std::size_t per_category = 200;
  std::uint64_t seed = 20240601;
  double missing_rate = 0.0;  // chance an aspect is absent from a product
  bool include_price_review = true;
};

inline const std::vector<std::string>& category_pool() {
  static const std::vector<std::string> pool = {
      "tablet case", "lipstick", "countertop blender", "headphones",
      "desk lamp",   "fitted sheet", "cooling pad", "cable organizer"};
  return pool;
}

struct AspectPool {
  std::string key;
  std::vector<std::string> values;
};

inline const std::vector<AspectPool>& aspect_pools() {
  static const std::vector<AspectPool> pools = {
      {"brand",
       {"acmeline", "bravia", "corelight", "dynapro", "evergreen", "fluxon", "glintware",
        "halcyon", "ironpeak", "jadecraft", "kestrel", "luminar", "mistvale", "northbay",
        "orchid", "pinefield", "quartzon", "riverton", "sablecraft", "tidewell", "umberly",
        "vantora", "westbrook", "yarrowing"}},
      {"color",
       {"black", "blue", "crimson", "green", "ivory", "navy", "olive", "pink", "silver",
        "teal", "amber", "beige", "charcoal", "coral", "emerald", "lavender", "maroon",
        "mustard", "sage", "turquoise"}},
      {"material",
       {"aluminum", "bamboo", "canvas", "leather", "nylon", "plastic", "steel", "wool",
        "ceramic", "cork", "denim", "felt", "granite", "rattan", "silicone", "walnut"}},
      {"size",
       {"compact", "large", "medium", "mini", "small", "extra large", "oversized",
        "pocket", "standard", "travel"}},
      {"style",
       {"classic", "modern", "retro", "sport", "vintage", "minimal", "industrial",
        "rustic", "scandinavian", "ornate"}},
      {"line",
       {"aurora", "breeze", "cascade", "drift", "ember", "frost", "gale", "horizon",
        "indigo", "jubilee", "koda", "lumen", "meridian", "nimbus", "onyx", "prism",
        "quasar", "ridge", "solstice", "tundra", "umbra", "vertex", "willow", "zephyr"}},
  };
  return pools;
}

inline std::vector<shopgen::Product> make_products(const Spec& spec) {
  shopgen::Rng rng(spec.seed);
  const auto& categories = category_pool();
  const auto& pools = aspect_pools();
  shopgen::CatalogOptions opt;

  std::vector<shopgen::Product> products;
  std::size_t serial = 0;
  for (std::size_t c = 0; c < spec.categories; ++c) {
    const std::string& category = categories[c % categories.size()];
    for (std::size_t i = 0; i < spec.per_category; ++i, ++serial) {
      shopgen::Product p;
      char buf[16];
      std::snprintf(buf, sizeof buf, "p%05zu", serial);
      p.id = buf;
      p.category = category;
      for (const auto& pool : pools) {
        if (spec.missing_rate > 0.0 && rng.uniform01() < spec.missing_rate) continue;
        p.aspects.emplace_back(pool.key, pool.values[rng.uniform_index(pool.values.size())]);
      }
      if (p.aspects.size() < 2) {  // keep every synthetic product loadable
        p.aspects.emplace_back(pools[0].key, pools[0].values[0]);
        p.aspects.emplace_back(pools[1].key, pools[1].values[0]);
      }
      if (spec.include_price_review) {
        const double price = 5.0 + rng.uniform01() * 1495.0;
        const double stars = 2.0 + rng.uniform01() * 3.0;
        p.aspects.emplace_back("price", shopgen::bucket_price(price, opt));
        p.aspects.emplace_back("customer review", shopgen::bucket_review(stars, opt));
      }
      // terse listing titles; the aspect tokens carry the signal
      p.title = category;
      products.push_back(std::move(p));
    }
  }
  return products;
}

inline shopgen::Catalog make_catalog(const Spec& spec) {
  return shopgen::make_catalog("synthetic", make_products(spec));
}

// Raw ingestible form of the same catalog (numeric price/review fields).
inline void write_raw_records(const std::string& path, const Spec& spec) {
  std::ofstream out(path);
  for (const shopgen::Product& p : make_products(spec)) {
    nlohmann::ordered_json rec;
    rec["id"] = p.id;
    rec["category"] = p.category;
    rec["title"] = p.title;
    nlohmann::ordered_json aspects = nlohmann::ordered_json::object();
    for (const auto& [k, v] : p.aspects) aspects[k] = v;
    rec["aspects"] = std::move(aspects);
    out << rec.dump() << '\n';
  }
}

}  // namespace synthetic
