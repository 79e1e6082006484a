#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "shopgen/conversation.hpp"
#include "shopgen/dialogue.hpp"
#include "shopgen/planner.hpp"
#include "shopgen/preference.hpp"
#include "shopgen/version.hpp"

namespace shopgen {

using Json = nlohmann::ordered_json;

/// Everything needed to reproduce a run; embedded into every output file.
struct RunConfig {
  std::string catalog_path;
  std::string domain;
  std::size_t episodes = 10;
  std::uint64_t seed = 0;
  InterestWeights weights;
  PlannerConfig planner;
  std::string strategy = "single-pass";  // "single-pass" | "interactive"
  std::string backend = "template";      // "template" | "remote"
  std::string prompt_dir = "prompts";
  DialogueConfig dialogue;
  std::size_t workers = 1;
};

/// One generated episode; failures are first-class records.
struct EpisodeRecord {
  std::size_t index = 0;
  std::string status = "ok";  // "ok" | "failed"
  std::string failure;
  Conversation conversation;
  std::vector<IterationTrace> trace;
  std::vector<std::string> final_candidates;
  bool converged = false;
  std::string stop_reason;
};

// --- JSON conversions -------------------------------------------------------

inline Json to_json(const PreferenceEntry& e) {
  return Json{{"aspect", e.aspect}, {"value", e.value}, {"interest", to_string(e.interest)}};
}

inline PreferenceEntry entry_from_json(const Json& j) {
  return PreferenceEntry{j.at("aspect").get<std::string>(), j.at("value").get<std::string>(),
                         interest_from_string(j.at("interest").get<std::string>())};
}

inline Json to_json(const std::vector<PreferenceEntry>& entries) {
  Json arr = Json::array();
  for (const auto& e : entries) arr.push_back(to_json(e));
  return arr;
}

inline std::vector<PreferenceEntry> entries_from_json(const Json& j) {
  std::vector<PreferenceEntry> entries;
  for (const auto& e : j) entries.push_back(entry_from_json(e));
  return entries;
}

inline Json to_json(const Preference& p) {
  return Json{{"category", p.category}, {"target_id", p.target_id}, {"entries", to_json(p.entries)}};
}

inline Preference preference_from_json(const Json& j) {
  Preference p;
  p.category = j.at("category").get<std::string>();
  p.target_id = j.at("target_id").get<std::string>();
  p.entries = entries_from_json(j.at("entries"));
  return p;
}

inline Json to_json(const IterationTrace& t) {
  Json hints = Json::object();
  for (const auto& [aspect, values] : t.hints) hints[aspect] = values;
  return Json{{"candidates", t.candidate_count}, {"aspects", t.aspects}, {"hints", hints}};
}

inline IterationTrace trace_from_json(const Json& j) {
  IterationTrace t;
  t.candidate_count = j.at("candidates").get<std::size_t>();
  t.aspects = j.at("aspects").get<std::vector<std::string>>();
  for (const auto& [aspect, values] : j.at("hints").items()) {
    t.hints[aspect] = values.get<std::vector<std::string>>();
  }
  return t;
}

inline Json to_json(const Utterance& u) {
  return Json{{"speaker", to_string(u.speaker)}, {"text", u.text}, {"turn", u.turn_index}};
}

inline Utterance utterance_from_json(const Json& j) {
  Utterance u;
  u.speaker = speaker_from_string(j.at("speaker").get<std::string>());
  u.text = j.at("text").get<std::string>();
  u.turn_index = j.at("turn").get<int>();
  return u;
}

inline Json to_json(const GenerationMeta& m) {
  Json j{{"strategy", m.strategy},
         {"backend", m.backend},
         {"model", m.model},
         {"seed", m.seed},
         {"latency_ms", m.latency_ms},
         {"backend_calls", m.backend_calls},
         {"attempts", m.attempts},
         {"recommendation_turn", m.recommendation_turn},
         {"coverage_complete", m.coverage_complete}};
  if (!m.raw_output.empty()) j["raw_output"] = m.raw_output;
  return j;
}

inline GenerationMeta meta_from_json(const Json& j) {
  GenerationMeta m;
  m.strategy = j.at("strategy").get<std::string>();
  m.backend = j.at("backend").get<std::string>();
  m.model = j.at("model").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.latency_ms = j.at("latency_ms").get<long long>();
  m.backend_calls = j.at("backend_calls").get<int>();
  m.attempts = j.at("attempts").get<int>();
  m.recommendation_turn = j.at("recommendation_turn").get<int>();
  m.coverage_complete = j.at("coverage_complete").get<bool>();
  if (j.contains("raw_output")) m.raw_output = j.at("raw_output").get<std::string>();
  return m;
}

inline Json to_json(const Conversation& c) {
  Json utterances = Json::array();
  for (const auto& u : c.utterances) utterances.push_back(to_json(u));
  return Json{{"id", c.id},
              {"domain", c.domain},
              {"preference", to_json(c.preference)},
              {"plan_history", to_json(c.plan_history)},
              {"recommended_product_id", c.recommended_product_id},
              {"utterances", utterances},
              {"meta", to_json(c.meta)}};
}

inline Conversation conversation_from_json(const Json& j) {
  Conversation c;
  c.id = j.at("id").get<std::string>();
  c.domain = j.at("domain").get<std::string>();
  c.preference = preference_from_json(j.at("preference"));
  c.plan_history = entries_from_json(j.at("plan_history"));
  c.recommended_product_id = j.at("recommended_product_id").get<std::string>();
  for (const auto& u : j.at("utterances")) c.utterances.push_back(utterance_from_json(u));
  c.meta = meta_from_json(j.at("meta"));
  return c;
}

inline Json to_json(const RunConfig& cfg) {
  return Json{
      {"catalog", cfg.catalog_path},
      {"domain", cfg.domain},
      {"episodes", cfg.episodes},
      {"seed", cfg.seed},
      {"weights",
       Json{{"wanted", cfg.weights.wanted},
            {"unwanted", cfg.weights.unwanted},
            {"optional", cfg.weights.optional_}}},
      {"planner",
       Json{{"criterion", to_string(cfg.planner.tree.criterion)},
            {"max_depth", cfg.planner.tree.max_depth},
            {"min_leaf", cfg.planner.tree.min_leaf},
            {"max_steps_per_turn", cfg.planner.max_steps_per_iteration},
            {"refit_per_step", cfg.planner.refit_per_step},
            {"branch_policy",
             cfg.planner.branch_policy == BranchPolicy::TargetConsistent ? "target" : "majority"},
            {"hint_count", cfg.planner.hint_count}}},
      {"strategy", cfg.strategy},
      {"backend", cfg.backend},
      {"prompt_dir", cfg.prompt_dir},
      {"dialogue",
       Json{{"aspects_per_question", cfg.dialogue.aspects_per_question},
            {"max_closing_turns", cfg.dialogue.max_closing_turns},
            {"deadlock_turns", cfg.dialogue.deadlock_turns}}},
      {"workers", cfg.workers}};
}

inline RunConfig run_config_from_json(const Json& j) {
  RunConfig cfg;
  cfg.catalog_path = j.at("catalog").get<std::string>();
  cfg.domain = j.at("domain").get<std::string>();
  cfg.episodes = j.at("episodes").get<std::size_t>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.weights.wanted = j.at("weights").at("wanted").get<double>();
  cfg.weights.unwanted = j.at("weights").at("unwanted").get<double>();
  cfg.weights.optional_ = j.at("weights").at("optional").get<double>();
  const Json& p = j.at("planner");
  cfg.planner.tree.criterion = criterion_from_string(p.at("criterion").get<std::string>());
  cfg.planner.tree.max_depth = p.at("max_depth").get<std::size_t>();
  cfg.planner.tree.min_leaf = p.at("min_leaf").get<std::size_t>();
  cfg.planner.max_steps_per_iteration = p.at("max_steps_per_turn").get<std::size_t>();
  cfg.planner.refit_per_step = p.at("refit_per_step").get<bool>();
  cfg.planner.branch_policy = p.at("branch_policy").get<std::string>() == "majority"
                                  ? BranchPolicy::Majority
                                  : BranchPolicy::TargetConsistent;
  cfg.planner.hint_count = p.at("hint_count").get<std::size_t>();
  cfg.strategy = j.at("strategy").get<std::string>();
  cfg.backend = j.at("backend").get<std::string>();
  cfg.prompt_dir = j.at("prompt_dir").get<std::string>();
  const Json& d = j.at("dialogue");
  cfg.dialogue.aspects_per_question = d.at("aspects_per_question").get<int>();
  cfg.dialogue.max_closing_turns = d.at("max_closing_turns").get<int>();
  cfg.dialogue.deadlock_turns = d.at("deadlock_turns").get<int>();
  cfg.workers = j.at("workers").get<std::size_t>();
  return cfg;
}

inline Json to_json(const EpisodeRecord& r) {
  Json traces = Json::array();
  for (const auto& t : r.trace) traces.push_back(to_json(t));
  return Json{{"kind", "episode"},
              {"index", r.index},
              {"status", r.status},
              {"failure", r.failure},
              {"converged", r.converged},
              {"stop_reason", r.stop_reason},
              {"final_candidates", r.final_candidates},
              {"trace", traces},
              {"conversation", to_json(r.conversation)}};
}

inline EpisodeRecord episode_from_json(const Json& j) {
  EpisodeRecord r;
  r.index = j.at("index").get<std::size_t>();
  r.status = j.at("status").get<std::string>();
  r.failure = j.at("failure").get<std::string>();
  r.converged = j.at("converged").get<bool>();
  r.stop_reason = j.at("stop_reason").get<std::string>();
  r.final_candidates = j.at("final_candidates").get<std::vector<std::string>>();
  for (const auto& t : j.at("trace")) r.trace.push_back(trace_from_json(t));
  r.conversation = conversation_from_json(j.at("conversation"));
  return r;
}

// --- Record files ------------------------------------------------------------
// Line-delimited: a header object first, then one episode object per line.

inline void write_records(std::ostream& out, const RunConfig& cfg,
                          const std::vector<EpisodeRecord>& records) {
  Json header{{"kind", "header"},
              {"schema_version", kSchemaVersion},
              {"tool_version", std::string(kToolVersion)},
              {"config", to_json(cfg)}};
  out << header.dump() << '\n';
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

struct RecordFile {
  RunConfig config;
  bool has_header = false;
  std::vector<EpisodeRecord> records;
};

inline RecordFile read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read record file: " + path);
  RecordFile file;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": invalid record");
    }
    const std::string kind = j.value("kind", "episode");
    if (kind == "header") {
      const int version = j.at("schema_version").get<int>();
      if (version != kSchemaVersion) {
        throw std::runtime_error(path + ": unsupported schema_version " + std::to_string(version));
      }
      file.config = run_config_from_json(j.at("config"));
      file.has_header = true;
      continue;
    }
    file.records.push_back(episode_from_json(j));
  }
  return file;
}

}  // namespace shopgen
