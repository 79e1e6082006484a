#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "shopgen/bm25.hpp"
#include "shopgen/eval.hpp"
#include "synthetic.hpp"

using namespace shopgen;

namespace {

Product doc(const char* id, const char* title,
            std::vector<std::pair<std::string, std::string>> aspects = {}) {
  Product p;
  p.id = id;
  p.category = "c";
  p.title = title;
  p.aspects = std::move(aspects);
  return p;
}

std::vector<oracle::NaiveBm25Doc> oracle_docs(const Catalog& catalog) {
  std::vector<oracle::NaiveBm25Doc> docs;
  for (const auto& p : catalog.products) {
    docs.push_back({p.id, Bm25Index::document_tokens(p)});
  }
  return docs;
}

}  // namespace

TEST_CASE("a one-product index ranks its own title first") {
  Catalog catalog = make_catalog("toy", {doc("p1", "Lumen desk lamp", {{"color", "ivory"}})});
  Bm25Index index(catalog);
  auto result = index.rank("Lumen desk lamp", 10);
  REQUIRE(result.items.size() == 1);
  CHECK(result.items[0].id == "p1");
  CHECK(result.rank_of("p1") == 1);
}

TEST_CASE("rarer terms score higher on otherwise-identical docs") {
  Catalog catalog = make_catalog(
      "toy", {doc("d1", "common rare"), doc("d2", "common"), doc("d3", "common")});
  Bm25Index index(catalog);
  auto rare = index.rank("rare", 3);
  auto common = index.rank("common", 3);
  REQUIRE(rare.items.size() == 1);
  REQUIRE(common.items.size() == 3);
  // same doc (d1), same tf, same length; only idf differs
  double common_score_d1 = 0.0;
  for (const auto& item : common.items) {
    if (item.id == "d1") common_score_d1 = item.score;
  }
  CHECK(rare.items[0].score > common_score_d1);
}

TEST_CASE("length normalization favors the shorter of two matching docs") {
  Catalog catalog = make_catalog("toy", {doc("short", "query"), doc("long", "query padding words")});
  Bm25Index index(catalog);
  auto result = index.rank("query", 2);
  REQUIRE(result.items.size() == 2);
  CHECK(result.items[0].id == "short");
  CHECK(result.items[0].score > result.items[1].score);
}

TEST_CASE("scores are invariant under query-term reordering") {
  synthetic::Spec spec;
  spec.categories = 1;
  spec.per_category = 40;
  Catalog catalog = synthetic::make_catalog(spec);
  Bm25Index index(catalog);
  auto a = index.rank("navy leather tablet case compact", 20);
  auto b = index.rank("compact case tablet leather navy", 20);
  REQUIRE(a.items.size() == b.items.size());
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    CHECK(a.items[i].id == b.items[i].id);
    CHECK(a.items[i].score == Catch::Approx(b.items[i].score).margin(1e-12));
  }
}

TEST_CASE("queries with no catalog terms return an empty result") {
  Catalog catalog = make_catalog("toy", {doc("p1", "alpha beta", {{"x", "y"}})});
  Bm25Index index(catalog);
  CHECK(index.rank("zq jx vw", 5).items.empty());
  CHECK_THROWS_AS(index.rank("alpha", 0), std::invalid_argument);
}

TEST_CASE("empty catalogs cannot be indexed") {
  Catalog catalog;
  CHECK_THROWS(Bm25Index(catalog));
}

TEST_CASE("ranking agrees with the naive per-document scorer") {
  synthetic::Spec spec;
  spec.categories = 2;
  spec.per_category = 50;
  spec.missing_rate = 0.2;
  Catalog catalog = synthetic::make_catalog(spec);
  Bm25Index index(catalog);
  const auto docs = oracle_docs(catalog);
  Rng rng(888);

  const auto& pools = synthetic::aspect_pools();
  for (int round = 0; round < 60; ++round) {
    std::vector<std::string> query_tokens;
    const std::size_t len = 1 + rng.uniform_index(6);
    for (std::size_t i = 0; i < len; ++i) {
      const auto& pool = pools[rng.uniform_index(pools.size())];
      for (auto& t : tokenize(pool.values[rng.uniform_index(pool.values.size())])) {
        query_tokens.push_back(std::move(t));
      }
    }
    auto expected = oracle::naive_bm25_rank(docs, query_tokens, 1.2, 0.75, 30);
    auto got = index.rank(join(query_tokens, " "), 30);
    REQUIRE(got.items.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      CHECK(got.items[i].id == expected[i].first);
      CHECK(got.items[i].score == Catch::Approx(expected[i].second).margin(1e-9));
    }
  }
}

TEST_CASE("structured ranking demotes documents matching an unwanted pair") {
  Catalog catalog = make_catalog(
      "toy", {doc("want", "blue case", {{"color", "blue"}, {"brand", "Bagsmart"}}),
              doc("avoid", "blue case deluxe", {{"color", "blue"}, {"brand", "Gocheaper"}}),
              doc("other", "red case", {{"color", "red"}, {"brand", "Bagsmart"}})});
  Bm25Index index(catalog);

  StructuredQuery q;
  q.category = "case";
  q.wanted = {{"color", "blue"}};
  q.unwanted = {{"brand", "Gocheaper"}};
  auto ranked = rank_structured(index, catalog, q, 10);

  REQUIRE(ranked.items.size() >= 2);
  int rank_avoid = ranked.rank_of("avoid");
  REQUIRE(rank_avoid > 0);
  // every non-matching scored doc outranks the unwanted match
  for (const auto& item : ranked.items) {
    if (item.id == "avoid") continue;
    CHECK(ranked.rank_of(item.id) < rank_avoid);
  }

  SECTION("the unwanted value itself is excluded from the positive query text") {
    CHECK(flatten_query(q).find("Gocheaper") == std::string::npos);
  }
}
