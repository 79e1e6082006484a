#include <catch2/catch_amalgamated.hpp>

#include "shopgen/eval.hpp"
#include "shopgen/metrics.hpp"

using namespace shopgen;

namespace {

RankedResult ranking_with_gold_at(int rank, int length = 10) {
  RankedResult r;
  for (int i = 1; i <= length; ++i) {
    r.items.push_back({i == rank ? "gold" : "filler-" + std::to_string(i), 1.0 / i});
  }
  return r;
}

}  // namespace

TEST_CASE("MRR over ranks 1, 2, 4") {
  std::vector<std::pair<RankedResult, std::string>> rankings = {
      {ranking_with_gold_at(1), "gold"},
      {ranking_with_gold_at(2), "gold"},
      {ranking_with_gold_at(4), "gold"}};
  auto [mrr, hits] = ranking_metrics(rankings, {1, 2, 4, 10});
  CHECK(mrr == Catch::Approx((1.0 + 0.5 + 0.25) / 3.0).margin(1e-9));
  CHECK(mrr == Catch::Approx(0.58333333333).margin(1e-9));
  CHECK(hits[1] == Catch::Approx(1.0 / 3.0).margin(1e-9));
  CHECK(hits[2] == Catch::Approx(2.0 / 3.0).margin(1e-9));
  CHECK(hits[4] == Catch::Approx(1.0).margin(1e-9));
  CHECK(hits[10] == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("absent gold contributes zero everywhere") {
  std::vector<std::pair<RankedResult, std::string>> rankings = {
      {ranking_with_gold_at(999), "gold"}, {RankedResult{}, "gold"}};
  auto [mrr, hits] = ranking_metrics(rankings, {1, 10, 100});
  CHECK(mrr == 0.0);
  for (const auto& [_, v] : hits) CHECK(v == 0.0);
}

TEST_CASE("Hit@k is non-decreasing in k and MRR dominates Hit@1") {
  Rng rng(555);
  std::vector<std::pair<RankedResult, std::string>> rankings;
  for (int i = 0; i < 50; ++i) {
    rankings.emplace_back(ranking_with_gold_at(1 + static_cast<int>(rng.uniform_index(15)), 10),
                          "gold");
  }
  std::vector<int> ks = {1, 2, 3, 5, 8, 10};
  auto [mrr, hits] = ranking_metrics(rankings, ks);
  for (std::size_t i = 1; i < ks.size(); ++i) CHECK(hits[ks[i]] >= hits[ks[i - 1]]);
  CHECK(mrr >= hits[1]);
}

TEST_CASE("ROUGE hand cases") {
  const std::vector<std::string> pred = {"a", "b", "c"};
  const std::vector<std::string> gold = {"a", "b", "d"};
  CHECK(rouge_n(pred, gold, 1) == Catch::Approx(2.0 / 3.0).margin(1e-9));
  CHECK(rouge_n(pred, gold, 2) == Catch::Approx(0.5).margin(1e-9));
  CHECK(rouge_l(pred, gold) == Catch::Approx(2.0 / 3.0).margin(1e-9));

  SECTION("identical sequences score 1 everywhere") {
    CHECK(rouge_n(pred, pred, 1) == 1.0);
    CHECK(rouge_n(pred, pred, 2) == 1.0);
    CHECK(rouge_l(pred, pred) == 1.0);
  }

  SECTION("disjoint sequences score 0") {
    const std::vector<std::string> other = {"x", "y"};
    CHECK(rouge_n(pred, other, 1) == 0.0);
    CHECK(rouge_l(pred, other) == 0.0);
  }

  SECTION("clipping: repeated tokens only count up to the gold count") {
    const std::vector<std::string> repeat = {"a", "a", "a"};
    CHECK(rouge_n(repeat, gold, 1) == Catch::Approx(2.0 * (1.0 / 3.0) * (1.0 / 3.0) /
                                                    (1.0 / 3.0 + 1.0 / 3.0))
                                          .margin(1e-9));
  }
}

TEST_CASE("exact-F1 over canonical query items") {
  const std::string gold = "category: lipstick | wanted color: dynamite red | optional skin type";
  SECTION("identical strings reach 1.0") {
    CHECK(exact_f1_items(query_items(gold), query_items(gold)) == 1.0);
  }
  SECTION("partial overlap") {
    const std::string pred = "category: lipstick | wanted color: dynamite red";
    // 2 shared items, |pred|=2, |gold|=3 -> P=1, R=2/3, F1=0.8
    CHECK(exact_f1_items(query_items(pred), query_items(gold)) ==
          Catch::Approx(0.8).margin(1e-9));
  }
  SECTION("free text only matches by being identical") {
    const std::string transcript = "hi i want a lipstick in dynamite red thanks";
    CHECK(exact_f1_items(query_items(transcript), query_items(gold)) == 0.0);
    CHECK(exact_f1_items(query_items(transcript), query_items(transcript)) == 1.0);
  }
}

TEST_CASE("compute_metrics combines ranking and query scores") {
  std::vector<std::pair<RankedResult, std::string>> rankings = {{ranking_with_gold_at(1), "gold"}};
  std::vector<std::pair<std::string, std::string>> pairs = {
      {"category: a | wanted b: c", "category: a | wanted b: c"}};
  MetricReport report = compute_metrics(rankings, {1, 10}, pairs);
  CHECK(report.mrr == 1.0);
  CHECK(report.exact_f1 == 1.0);
  CHECK(report.rouge_1 == 1.0);
  CHECK(report.rouge_2 == 1.0);
  CHECK(report.rouge_l == 1.0);
  CHECK(report.n_examples == 1);

  CHECK_THROWS_AS(compute_metrics({}, {1}, {}), std::invalid_argument);
}
