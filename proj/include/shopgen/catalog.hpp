#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "shopgen/common.hpp"

namespace shopgen {

// Aspect keys that never count toward the minimum-feature rule.
inline constexpr std::string_view kPriceKey = "price";
inline constexpr std::string_view kReviewKey = "customer review";

/// One catalog item. Aspect order is the input order of the source record;
/// keys are normalized (lowercased, whitespace collapsed) at load, values
/// keep their display casing.
struct Product {
  std::string id;
  std::string category;
  std::string title;
  std::vector<std::pair<std::string, std::string>> aspects;

  const std::string* find_aspect(std::string_view key) const {
    const std::string needle = fold_collapse(key);
    for (const auto& [k, v] : aspects) {
      if (k == needle) return &v;
    }
    return nullptr;
  }
  bool has_aspect(std::string_view key) const { return find_aspect(key) != nullptr; }

  // Aspect count excluding price and customer review buckets.
  std::size_t feature_count() const {
    std::size_t n = 0;
    for (const auto& [k, _] : aspects) {
      if (k != kPriceKey && k != kReviewKey) ++n;
    }
    return n;
  }
};

struct CatalogOptions {
  // Raw-key match is case-insensitive; canonical keys come out folded.
  std::map<std::string, std::string> rename_map;  // folded raw -> replacement
  std::set<std::string> drop_keys;                // folded raw keys to remove
  std::vector<double> price_edges{0, 10, 20, 50, 100, 200, 500, 1000};
  std::vector<double> review_ladder{3.0, 3.5, 4.0, 4.5};
  std::size_t min_features = 2;
};

inline CatalogOptions default_catalog_options() {
  CatalogOptions opt;
  opt.rename_map = {{"brand name", "Brand"}, {"colour", "Color"}};
  opt.drop_keys = {"asin", "date first available", "is discontinued by manufacturer"};
  return opt;
}

/// Canonical aspect key, or nullopt when the key is on the drop list.
inline std::optional<std::string> normalize_aspect_key(std::string_view raw,
                                                       const CatalogOptions& opt) {
  std::string key = fold_collapse(raw);
  if (key.empty()) return std::nullopt;
  if (auto it = opt.rename_map.find(key); it != opt.rename_map.end()) {
    key = fold_collapse(it->second);
  }
  if (opt.drop_keys.count(key)) return std::nullopt;
  return key;
}

/// Price in currency units -> half-open bucket string, e.g. "between $10 and $20".
/// Amounts at or past the last edge render as "higher than $<last>".
inline std::string bucket_price(double price, const CatalogOptions& opt = {}) {
  if (price < 0.0) throw std::invalid_argument("bucket_price: negative price");
  const auto& edges = opt.price_edges;
  if (edges.size() < 2) throw std::invalid_argument("bucket_price: need at least two edges");
  if (price >= edges.back()) {
    return "higher than $" + format_number(edges.back());
  }
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (price >= edges[i] && price < edges[i + 1]) {
      return "between $" + format_number(edges[i]) + " and $" + format_number(edges[i + 1]);
    }
  }
  // price below the first edge; clamp into the first bucket
  return "between $" + format_number(edges[0]) + " and $" + format_number(edges[1]);
}

/// Star rating -> threshold bucket, e.g. "higher than 4.5 stars".
inline std::string bucket_review(double stars, const CatalogOptions& opt = {}) {
  if (stars < 0.0 || stars > 5.0) throw std::invalid_argument("bucket_review: stars out of [0,5]");
  const auto& ladder = opt.review_ladder;
  if (ladder.empty()) throw std::invalid_argument("bucket_review: empty ladder");
  std::optional<double> best;
  for (double t : ladder) {
    if (t <= stars) best = t;
  }
  if (!best) return "lower than " + format_number(ladder.front()) + " stars";
  return "higher than " + format_number(*best) + " stars";
}

namespace detail {

inline bool consume_prefix(std::string_view& s, std::string_view prefix) {
  if (s.substr(0, prefix.size()) != prefix) return false;
  s.remove_prefix(prefix.size());
  return true;
}

inline bool consume_number(std::string_view& s) {
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == 0) return false;
  if (i < s.size() && s[i] == '.') {
    std::size_t j = i + 1;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    if (j == i + 1) return false;
    i = j;
  }
  s.remove_prefix(i);
  return true;
}

inline bool is_price_bucket(std::string_view s) {
  std::string_view t = s;
  if (consume_prefix(t, "between $")) {
    return consume_number(t) && consume_prefix(t, " and $") && consume_number(t) && t.empty();
  }
  t = s;
  return consume_prefix(t, "higher than $") && consume_number(t) && t.empty();
}

inline bool is_review_bucket(std::string_view s) {
  std::string_view t = s;
  if (!consume_prefix(t, "higher than ") && !consume_prefix(t, "lower than ")) return false;
  return consume_number(t) && consume_prefix(t, " stars") && t.empty();
}

}  // namespace detail

struct LoadReport {
  std::size_t lines_read = 0;
  std::size_t malformed = 0;
  std::size_t filtered = 0;   // well-formed but under the min-feature rule
  std::size_t loaded = 0;
  std::size_t aspects_dropped = 0;
  std::vector<std::string> messages;  // first few malformed-line diagnostics

  void note(std::size_t line_no, const std::string& what) {
    ++malformed;
    if (messages.size() < 20) {
      messages.push_back("line " + std::to_string(line_no) + ": " + what);
    }
  }
};

struct Catalog {
  std::string domain;
  std::vector<Product> products;
  std::map<std::string, std::uint32_t> id_index;
  std::map<std::string, std::vector<std::uint32_t>> category_index;  // load order
  // category -> aspect -> value -> count
  std::map<std::string, std::map<std::string, std::map<std::string, int>>> aspect_value_index;

  const Product& product(std::uint32_t idx) const { return products.at(idx); }
  const Product* by_id(std::string_view id) const {
    auto it = id_index.find(std::string(id));
    return it == id_index.end() ? nullptr : &products[it->second];
  }
  const std::vector<std::uint32_t>& category_products(const std::string& category) const {
    auto it = category_index.find(category);
    if (it == category_index.end()) {
      throw std::runtime_error("unknown category: " + category);
    }
    return it->second;
  }
  bool empty() const { return products.empty(); }
};

/// Build index structures from a product list. The indexes are pure
/// derivations; rebuilding them from `products` is always bit-identical.
inline Catalog make_catalog(std::string domain, std::vector<Product> products) {
  Catalog cat;
  cat.domain = std::move(domain);
  cat.products = std::move(products);
  for (std::uint32_t i = 0; i < cat.products.size(); ++i) {
    const Product& p = cat.products[i];
    auto [it, fresh] = cat.id_index.emplace(p.id, i);
    if (!fresh) throw std::runtime_error("duplicate product id: " + p.id);
    cat.category_index[p.category].push_back(i);
    auto& per_aspect = cat.aspect_value_index[p.category];
    for (const auto& [k, v] : p.aspects) ++per_aspect[k][v];
  }
  return cat;
}

/// Per-category value counts; the input for hint retrieval and value corruption.
inline const std::map<std::string, std::map<std::string, int>>& aspect_value_stats(
    const Catalog& catalog, const std::string& category) {
  auto it = catalog.aspect_value_index.find(category);
  if (it == catalog.aspect_value_index.end()) {
    throw std::runtime_error("unknown category: " + category);
  }
  return it->second;
}

/// Normalize one raw record. Returns nullopt with `error` set when the record
/// is malformed; a well-formed product that fails the min-feature rule comes
/// back with `filtered` set instead.
inline std::optional<Product> normalize_record(const nlohmann::ordered_json& rec,
                                               const CatalogOptions& opt,
                                               std::string& error, bool& filtered,
                                               std::size_t& aspects_dropped) {
  filtered = false;
  if (!rec.is_object()) { error = "record is not an object"; return std::nullopt; }

  Product p;
  if (!rec.contains("id") || !rec["id"].is_string() || trim(rec["id"].get<std::string>()).empty()) {
    error = "missing or empty id"; return std::nullopt;
  }
  p.id = trim(rec["id"].get<std::string>());
  if (!rec.contains("category") || !rec["category"].is_string()) {
    error = "missing category"; return std::nullopt;
  }
  p.category = fold_collapse(rec["category"].get<std::string>());
  if (p.category.empty()) { error = "empty category"; return std::nullopt; }
  if (!rec.contains("title") || !rec["title"].is_string()) {
    error = "missing title"; return std::nullopt;
  }
  p.title = collapse_ws(rec["title"].get<std::string>());
  if (p.title.empty()) { error = "empty title"; return std::nullopt; }

  if (rec.contains("aspects")) {
    if (!rec["aspects"].is_object()) { error = "aspects is not an object"; return std::nullopt; }
    for (const auto& [raw_key, raw_val] : rec["aspects"].items()) {
      auto key = normalize_aspect_key(raw_key, opt);
      if (!key) { ++aspects_dropped; continue; }
      if (!raw_val.is_string()) { error = "aspect '" + *key + "' has a non-string value"; return std::nullopt; }
      std::string value = collapse_ws(raw_val.get<std::string>());
      if (value.empty()) { ++aspects_dropped; continue; }
      if (p.has_aspect(*key)) { error = "duplicate aspect key after normalization: " + *key; return std::nullopt; }
      p.aspects.emplace_back(std::move(*key), std::move(value));
    }
  }

  if (rec.contains("price") && !rec["price"].is_null()) {
    if (!rec["price"].is_number()) { error = "price is not a number"; return std::nullopt; }
    if (p.has_aspect(kPriceKey)) { error = "both numeric price and a price aspect present"; return std::nullopt; }
    double price = rec["price"].get<double>();
    if (price < 0.0) { error = "negative price"; return std::nullopt; }
    p.aspects.emplace_back(std::string(kPriceKey), bucket_price(price, opt));
  }
  if (rec.contains("review") && !rec["review"].is_null()) {
    if (!rec["review"].is_number()) { error = "review is not a number"; return std::nullopt; }
    if (p.has_aspect(kReviewKey)) { error = "both numeric review and a customer review aspect present"; return std::nullopt; }
    double stars = rec["review"].get<double>();
    if (stars < 0.0 || stars > 5.0) { error = "review out of [0,5]"; return std::nullopt; }
    p.aspects.emplace_back(std::string(kReviewKey), bucket_review(stars, opt));
  }

  // Pre-bucketed strings (e.g. from a previous export) must match the grammar.
  if (const std::string* v = p.find_aspect(kPriceKey); v && !detail::is_price_bucket(*v)) {
    error = "price value does not match bucket grammar: " + *v; return std::nullopt;
  }
  if (const std::string* v = p.find_aspect(kReviewKey); v && !detail::is_review_bucket(*v)) {
    error = "customer review value does not match bucket grammar: " + *v; return std::nullopt;
  }

  if (p.feature_count() < opt.min_features) { filtered = true; return std::nullopt; }
  return p;
}

struct LoadResult {
  Catalog catalog;
  LoadReport report;
};

/// Read a line-delimited record file into a Catalog. Malformed lines are
/// skipped and counted; an empty result is fatal.
inline LoadResult load_catalog(const std::string& path, const std::string& domain,
                               const CatalogOptions& opt = default_catalog_options()) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read catalog file: " + path);

  LoadResult out;
  std::vector<Product> products;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++out.report.lines_read;
    nlohmann::ordered_json rec = nlohmann::ordered_json::parse(line, nullptr, false);
    if (rec.is_discarded()) { out.report.note(line_no, "invalid record"); continue; }
    std::string error;
    bool filtered = false;
    auto p = normalize_record(rec, opt, error, filtered, out.report.aspects_dropped);
    if (!p) {
      if (filtered) ++out.report.filtered;
      else out.report.note(line_no, error);
      continue;
    }
    if (!seen_ids.insert(p->id).second) {
      out.report.note(line_no, "duplicate product id: " + p->id);
      continue;
    }
    products.push_back(std::move(*p));
  }
  if (products.empty()) {
    throw std::runtime_error("no products after filtering: " + path);
  }
  out.report.loaded = products.size();
  out.catalog = make_catalog(domain, std::move(products));
  return out;
}

inline std::string serialize_product_line(const Product& p) {
  nlohmann::ordered_json rec;
  rec["id"] = p.id;
  rec["category"] = p.category;
  rec["title"] = p.title;
  nlohmann::ordered_json aspects = nlohmann::ordered_json::object();
  for (const auto& [k, v] : p.aspects) aspects[k] = v;
  rec["aspects"] = std::move(aspects);
  return rec.dump();
}

inline void export_catalog(const Catalog& catalog, std::ostream& out) {
  for (const Product& p : catalog.products) out << serialize_product_line(p) << '\n';
}

}  // namespace shopgen
