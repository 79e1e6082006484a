#include <catch2/catch_amalgamated.hpp>

#include "shopgen/prompt.hpp"
#include "toy_episode.hpp"

using namespace shopgen;

TEST_CASE("render_prompt substitutes placeholders deterministically") {
  PromptTemplate tmpl{"t", "Hello {{Name}}, buy {{Thing}}. Bye {{Name}}."};
  PromptSlots slots{{"Name", "Ann"}, {"Thing", "a lamp"}};
  CHECK(render_prompt(tmpl, slots) == "Hello Ann, buy a lamp. Bye Ann.");
}

TEST_CASE("missing placeholders are errors naming the placeholder") {
  PromptTemplate tmpl{"t", "Hello {{Name}}."};
  CHECK_THROWS_WITH(render_prompt(tmpl, {}), Catch::Matchers::ContainsSubstring("Name"));
}

TEST_CASE("sections render only when their slot is non-empty") {
  PromptTemplate tmpl{"t", "head\n{{#Block}}\nvalue: {{Block}}\n{{/Block}}\ntail\n"};
  CHECK(render_prompt(tmpl, {{"Block", "X"}}) == "head\nvalue: X\ntail\n");
  CHECK(render_prompt(tmpl, {{"Block", ""}}) == "head\ntail\n");

  SECTION("nested sections resolve inner markers too") {
    PromptTemplate nested{"t", "{{#A}}\na\n{{#B}}\nb={{B}}\n{{/B}}\n{{/A}}\nz\n"};
    CHECK(render_prompt(nested, {{"A", "1"}, {"B", "2"}}) == "a\nb=2\nz\n");
    CHECK(render_prompt(nested, {{"A", "1"}, {"B", ""}}) == "a\nz\n");
    CHECK(render_prompt(nested, {{"A", ""}, {"B", "2"}}) == "z\n");
  }
}

TEST_CASE("feature lines carry values only for non-optional entries") {
  std::vector<PlanStep> script = {{"color", "blue", Interest::Wanted},
                                  {"material", "", Interest::Optional},
                                  {"brand", "Gocheaper", Interest::Unwanted}};
  CHECK(feature_lines(script, Interest::Wanted) == "Aspect: color, Value: blue;");
  CHECK(feature_lines(script, Interest::Optional) == "Aspect: material;");
  CHECK(feature_lines(script, Interest::Unwanted) == "Aspect: brand, Value: Gocheaper;");
}

TEST_CASE("hint lines follow script order and skip hintless aspects") {
  std::vector<PlanStep> script = {{"brand", "", Interest::Optional},
                                  {"color", "blue", Interest::Wanted},
                                  {"size", "", Interest::Optional}};
  std::map<std::string, std::vector<std::string>> hints = {
      {"color", {"blue", "red", "green"}}, {"brand", {"Bagsmart"}}};
  CHECK(hint_lines(script, hints) ==
        "Aspect: brand, Typical Values: Bagsmart;\n"
        "Aspect: color, Typical Values: blue, red, green;");

  SECTION("ssd sizes render as one line with all three values") {
    std::vector<PlanStep> s2 = {{"ssd size", "", Interest::Optional}};
    std::map<std::string, std::vector<std::string>> h2 = {
        {"ssd size", {"256GB", "512GB", "1TB"}}};
    CHECK(hint_lines(s2, h2) == "Aspect: ssd size, Typical Values: 256GB, 512GB, 1TB;");
  }

  SECTION("no hints, no block") {
    CHECK(hint_lines(script, {}).empty());
  }
}

TEST_CASE("history lines tag each speaker") {
  std::vector<Utterance> utterances = {{Speaker::Customer, "hi", 0}, {Speaker::Seller, "hello", 1}};
  CHECK(history_lines(utterances) == "customer: hi\nseller: hello");
}

TEST_CASE("the single-pass prompt renders the structured feature blocks") {
  Preference pref;
  pref.category = "lipstick";
  pref.target_id = "x";
  std::vector<PlanStep> script = {{"color", "dynamite red", Interest::Wanted},
                                  {"brand", "Gocheaper", Interest::Unwanted},
                                  {"skin type", "", Interest::Optional}};
  PromptSlots slots;
  slots["ProductCategory"] = pref.category;
  slots["MaxAspectsPerQuestion"] = "2";
  slots["MaxClosingTurns"] = "3";
  slots["RecommendedProduct"] = "Glossia Dynamite Red";
  slots["WantedFeatures"] = feature_lines(script, Interest::Wanted);
  slots["OptionalFeatures"] = feature_lines(script, Interest::Optional);
  slots["UnwantedFeatures"] = feature_lines(script, Interest::Unwanted);
  slots["TypicalValues"] = "";
  const std::string prompt = render_prompt(toy::templates().single_pass, slots);

  CHECK(prompt.find("wants to buy lipstick") != std::string::npos);
  CHECK(prompt.find("Aspect: brand, Value: Gocheaper;") != std::string::npos);
  CHECK(prompt.find("Aspect: color, Value: dynamite red;") != std::string::npos);
  CHECK(prompt.find("Typical Values") == std::string::npos);  // empty hints, no block
}
