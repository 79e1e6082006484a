#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "oracles.hpp"
#include "shopgen/planner.hpp"
#include "synthetic.hpp"

using namespace shopgen;

namespace {

Product make_product(std::string id, std::string category,
                     std::vector<std::pair<std::string, std::string>> aspects) {
  Product p;
  p.id = std::move(id);
  p.category = std::move(category);
  p.title = p.id;
  p.aspects = std::move(aspects);
  return p;
}

Catalog four_product_catalog() {
  return make_catalog("toy", {make_product("p1", "case", {{"color", "blue"}, {"brand", "x"}}),
                              make_product("p2", "case", {{"color", "blue"}, {"brand", "x"}}),
                              make_product("p3", "case", {{"color", "red"}, {"brand", "x"}}),
                              make_product("p4", "case", {{"color", "red"}, {"brand", "y"}})});
}

Preference preference_of(const Catalog& catalog, const std::string& target_id,
                         std::vector<PreferenceEntry> entries) {
  Preference pref;
  pref.category = catalog.by_id(target_id)->category;
  pref.target_id = target_id;
  pref.entries = std::move(entries);
  return pref;
}

}  // namespace

TEST_CASE("traverse emits one step per node on the target path") {
  Catalog catalog = four_product_catalog();
  RevealedPreference rev;
  rev.category = "case";
  TreeDataset ds = make_dataset(filter(catalog, rev), catalog, rev);
  DecisionTree tree = fit_tree(ds);

  SECTION("wanted aspect carries the preference value and descends its branch") {
    Preference pref = preference_of(catalog, "p1", {{"color", "blue", Interest::Wanted}});
    auto plan = traverse(tree, pref, *catalog.by_id("p1"));
    REQUIRE(plan.size() == 1);
    CHECK(plan[0] == PlanStep{"color", "blue", Interest::Wanted});
  }

  SECTION("aspects absent from the preference become optional steps") {
    Preference pref = preference_of(catalog, "p4", {{"brand", "y", Interest::Wanted}});
    auto plan = traverse(tree, pref, *catalog.by_id("p4"));
    REQUIRE(plan.size() == 2);
    CHECK(plan[0] == PlanStep{"color", "", Interest::Optional});
    CHECK(plan[1] == PlanStep{"brand", "y", Interest::Wanted});
  }

  SECTION("a pure root yields an empty plan") {
    Catalog tiny = make_catalog(
        "toy", {make_product("s1", "case", {{"color", "blue"}, {"brand", "x"}}),
                make_product("s2", "case", {{"color", "blue"}, {"brand", "x"}})});
    RevealedPreference r2;
    r2.category = "case";
    TreeDataset ds2 = make_dataset(filter(tiny, r2), tiny, r2);
    DecisionTree tree2 = fit_tree(ds2);
    Preference pref = preference_of(tiny, "s1", {{"color", "blue", Interest::Wanted}});
    CHECK(traverse(tree2, pref, *tiny.by_id("s1")).empty());
  }
}

TEST_CASE("plan_dialogue converges immediately for a single-product category") {
  Catalog catalog = make_catalog(
      "toy", {make_product("solo", "lamp", {{"color", "ivory"}, {"style", "retro"}}),
              make_product("other", "case", {{"color", "blue"}, {"brand", "x"}})});
  Preference pref = preference_of(catalog, "solo", {{"color", "ivory", Interest::Wanted}});

  PlanResult result = plan_dialogue(catalog, pref);
  CHECK(result.plan_history.empty());
  CHECK(result.trace.empty());
  CHECK(result.converged);
  CHECK(result.stop_reason == "converged");
  CHECK(product_ids(catalog, result.final_set) == std::vector<std::string>{"solo"});
}

TEST_CASE("plan_dialogue hand-traced on the four-product toy catalog") {
  Catalog catalog = four_product_catalog();
  Preference pref = preference_of(catalog, "p1", {{"color", "blue", Interest::Wanted}});

  PlanResult result = plan_dialogue(catalog, pref);
  REQUIRE(result.plan_history.size() == 1);
  CHECK(result.plan_history[0] == PlanStep{"color", "blue", Interest::Wanted});
  CHECK(result.converged);
  REQUIRE(result.trace.size() == 1);
  CHECK(result.trace[0].candidate_count == 4);
  CHECK(result.trace[0].aspects == std::vector<std::string>{"color"});
  CHECK(result.trace[0].hints.at("color") == std::vector<std::string>{"blue", "red"});
  CHECK(product_ids(catalog, result.final_set) == std::vector<std::string>{"p1", "p2"});
}

TEST_CASE("sixteen products over four binary aspects") {
  std::vector<Product> products;
  for (int i = 0; i < 16; ++i) {
    products.push_back(make_product("h" + std::to_string(i), "case",
                                    {{"a", i & 1 ? "1" : "0"},
                                     {"b", i & 2 ? "1" : "0"},
                                     {"c", i & 4 ? "1" : "0"},
                                     {"d", i & 8 ? "1" : "0"}}));
  }
  Catalog catalog = make_catalog("toy", products);
  Preference pref = preference_of(
      catalog, "h5", {{"a", "1", Interest::Wanted}, {"c", "1", Interest::Wanted}});

  PlanResult result = plan_dialogue(catalog, pref);
  CHECK(result.plan_history.size() <= 4);
  CHECK(result.converged);
  const std::uint32_t target_idx = catalog.id_index.at("h5");
  CHECK(std::find(result.final_set.begin(), result.final_set.end(), target_idx) !=
        result.final_set.end());
  // Converged family: everything satisfying the preference (a=1, c=1).
  for (std::uint32_t idx : result.final_set) {
    CHECK(oracle::naive_satisfies(catalog.product(idx), pref.entries));
  }
}

TEST_CASE("planner episode invariants hold on random synthetic episodes") {
  synthetic::Spec spec;
  spec.categories = 3;
  spec.per_category = 100;
  spec.missing_rate = 0.15;
  Catalog catalog = synthetic::make_catalog(spec);

  for (int round = 0; round < 80; ++round) {
    Rng rng(5000 + round);
    const Product& target = sample_target(catalog, rng);
    Preference pref = sample_preference(target, catalog, rng);
    const std::uint32_t target_idx = catalog.id_index.at(target.id);

    PlanSession session(catalog, pref);
    const std::size_t max_iterations = aspect_value_stats(catalog, pref.category).size();
    std::size_t prev_count = catalog.category_products(pref.category).size();
    std::size_t iterations = 0;
    std::set<std::string> aspects_seen;
    while (auto iter = session.next()) {
      ++iterations;
      REQUIRE(iterations <= max_iterations);
      // shrinkage
      CHECK(iter->candidate_count <= prev_count);
      prev_count = iter->candidate_count;
      // plan steps never reuse aspects
      for (const auto& step : iter->steps) {
        CHECK(aspects_seen.insert(step.aspect).second);
        CHECK(iter->hints.at(step.aspect).size() <= 3);
      }
    }
    const PlanResult& result = session.result();
    // target retention: the target is in the final set, and the filter path
    // would have thrown on an empty set at any iteration
    CHECK(std::find(result.final_set.begin(), result.final_set.end(), target_idx) !=
          result.final_set.end());
    if (result.converged) {
      for (std::uint32_t idx : result.final_set) {
        CHECK(oracle::naive_satisfies(catalog.product(idx), pref.entries));
      }
    }
  }
}

TEST_CASE("the fitted root maximally divides the candidate set") {
  synthetic::Spec spec;
  spec.categories = 2;
  spec.per_category = 80;
  spec.missing_rate = 0.1;
  Catalog catalog = synthetic::make_catalog(spec);

  for (const auto& [category, _] : catalog.category_index) {
    RevealedPreference rev;
    rev.category = category;
    TreeDataset ds = make_dataset(filter(catalog, rev), catalog, rev);
    DecisionTree tree = fit_tree(ds);
    if (tree.node(tree.root).is_leaf()) continue;

    std::vector<std::size_t> rows(ds.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    std::size_t root_feature = 0;
    for (std::size_t j = 0; j < ds.feature_space.size(); ++j) {
      if (ds.feature_space[j] == tree.node(tree.root).aspect) root_feature = j;
    }
    const double root_entropy = oracle::partition_entropy(ds, rows, root_feature);
    for (std::size_t j = 0; j < ds.feature_space.size(); ++j) {
      CHECK(root_entropy <= oracle::partition_entropy(ds, rows, j) + 1e-9);
    }
  }
}

TEST_CASE("per-iteration step caps produce more, shorter iterations") {
  synthetic::Spec spec;
  spec.categories = 1;
  spec.per_category = 120;
  Catalog catalog = synthetic::make_catalog(spec);
  Rng rng(77);
  const Product& target = sample_target(catalog, rng);
  Preference pref = sample_preference(target, catalog, rng);

  PlannerConfig capped;
  capped.max_steps_per_iteration = 1;
  PlanResult one_step = plan_dialogue(catalog, pref, capped);
  for (const auto& t : one_step.trace) CHECK(t.aspects.size() == 1);

  PlannerConfig refit;
  refit.refit_per_step = true;
  PlanResult refit_result = plan_dialogue(catalog, pref, refit);
  CHECK(one_step.plan_history == refit_result.plan_history);

  PlanResult uncapped = plan_dialogue(catalog, pref);
  CHECK(uncapped.trace.size() <= one_step.trace.size());
  // same convergence either way
  CHECK(uncapped.converged == one_step.converged);
}

TEST_CASE("majority branch policy still plans valid episodes") {
  synthetic::Spec spec;
  spec.categories = 1;
  spec.per_category = 60;
  Catalog catalog = synthetic::make_catalog(spec);
  Rng rng(31);
  const Product& target = sample_target(catalog, rng);
  Preference pref = sample_preference(target, catalog, rng);

  PlannerConfig cfg;
  cfg.branch_policy = BranchPolicy::Majority;
  PlanResult result = plan_dialogue(catalog, pref, cfg);

  const std::uint32_t target_idx = catalog.id_index.at(target.id);
  CHECK(std::find(result.final_set.begin(), result.final_set.end(), target_idx) !=
        result.final_set.end());
  std::set<std::string> seen;
  for (const auto& step : result.plan_history) CHECK(seen.insert(step.aspect).second);
}

TEST_CASE("plan determinism") {
  synthetic::Spec spec;
  spec.categories = 2;
  spec.per_category = 60;
  Catalog catalog = synthetic::make_catalog(spec);
  Rng a(9), b(9);
  const Product& ta = sample_target(catalog, a);
  const Product& tb = sample_target(catalog, b);
  REQUIRE(ta.id == tb.id);
  Preference pa = sample_preference(ta, catalog, a);
  Preference pb = sample_preference(tb, catalog, b);
  PlanResult ra = plan_dialogue(catalog, pa);
  PlanResult rb = plan_dialogue(catalog, pb);
  CHECK(ra.plan_history == rb.plan_history);
  CHECK(ra.final_set == rb.final_set);
  CHECK(ra.stop_reason == rb.stop_reason);
}
