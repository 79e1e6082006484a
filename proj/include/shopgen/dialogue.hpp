#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shopgen/backend.hpp"
#include "shopgen/catalog.hpp"
#include "shopgen/conversation.hpp"
#include "shopgen/planner.hpp"
#include "shopgen/prompt.hpp"
#include "shopgen/tracker.hpp"

namespace shopgen {

struct DialogueConfig {
  int aspects_per_question = 2;  // seller covers at most this many per turn
  int max_closing_turns = 3;     // turns allowed after the recommendation
  int deadlock_turns = 4;        // consecutive turns without tracker progress
  int max_backend_tokens = 4096;
  TrackerConfig tracker;
};

struct DialogueResult {
  Conversation conversation;
  bool ok = false;
  std::string failure;
};

/// The verbalization script: the planned steps first, then the preference
/// entries the search never needed to reveal. A dialogue covers the whole
/// preference this way, which is what makes query extraction its exact
/// reverse. An episode that converged before any question stays bare
/// (category request, recommendation, closing) and gets no appendix.
inline std::vector<PlanStep> build_script(const Preference& pref,
                                          const std::vector<PlanStep>& plan_history) {
  std::vector<PlanStep> script = plan_history;
  if (plan_history.empty()) return script;
  for (const auto& e : pref.entries) {
    bool planned = false;
    for (const auto& s : plan_history) {
      if (s.aspect == e.aspect) { planned = true; break; }
    }
    if (!planned) script.push_back(e);
  }
  return script;
}

/// Frequent-value hints per script aspect: planned aspects use the values
/// captured at their search iteration, appended aspects fall back to the
/// converged candidate set.
inline std::map<std::string, std::vector<std::string>> hints_for_script(
    const std::vector<PlanStep>& script, const PlanResult& plan, const Catalog& catalog,
    std::size_t k = 3) {
  std::map<std::string, std::vector<std::string>> hints;
  for (const auto& iter : plan.trace) {
    for (const auto& [aspect, values] : iter.hints) hints[aspect] = values;
  }
  for (const auto& step : script) {
    if (hints.count(step.aspect)) continue;
    auto values = top_values(plan.final_set, catalog, step.aspect, k);
    if (!values.empty()) hints[step.aspect] = std::move(values);
  }
  return hints;
}

struct ParsedTranscript {
  std::vector<Utterance> utterances;
  std::string error;  // empty on success
};

/// Parse `customer: ... / seller: ...` line output. Speaker tags are matched
/// case-insensitively and blank lines are skipped; any other line fails the
/// transcript rather than being repaired silently.
inline ParsedTranscript parse_transcript(const std::string& text) {
  ParsedTranscript out;
  int turn = 0;
  for (const std::string& raw : detail::split_lines(text)) {
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto colon = line.find(':');
    std::string tag = colon == std::string::npos ? "" : fold_collapse(line.substr(0, colon));
    if (tag != "customer" && tag != "seller") {
      out.error = "unrecognized transcript line: " + line.substr(0, 60);
      return out;
    }
    Utterance u;
    u.speaker = tag == "customer" ? Speaker::Customer : Speaker::Seller;
    u.text = trim(line.substr(colon + 1));
    u.turn_index = turn++;
    out.utterances.push_back(std::move(u));
  }
  if (out.utterances.empty()) out.error = "empty transcript";
  return out;
}

/// Structural checks every emitted conversation must pass.
inline std::optional<std::string> validate_conversation(const Conversation& conv,
                                                        int max_closing_turns) {
  if (conv.utterances.empty()) return "empty conversation";
  if (conv.utterances.front().speaker != Speaker::Customer) return "customer must speak first";
  for (std::size_t i = 0; i < conv.utterances.size(); ++i) {
    if (conv.utterances[i].turn_index != static_cast<int>(i)) return "turn indices out of order";
    if (i > 0 && conv.utterances[i].speaker == conv.utterances[i - 1].speaker) {
      return "speakers must alternate at turn " + std::to_string(i);
    }
  }
  if (conv.meta.recommendation_turn >= 0) {
    const int after = static_cast<int>(conv.utterances.size()) - 1 - conv.meta.recommendation_turn;
    if (after > max_closing_turns) {
      return "conversation continues " + std::to_string(after) +
             " turns after the recommendation (limit " + std::to_string(max_closing_turns) + ")";
    }
  }
  return std::nullopt;
}

inline int find_recommendation_turn(std::span<const Utterance> utterances,
                                    const std::string& title) {
  const std::string needle = fold_collapse(title);
  int found = -1;
  for (const auto& u : utterances) {
    if (u.speaker == Speaker::Seller && fold_collapse(u.text).find(needle) != std::string::npos) {
      found = u.turn_index;
    }
  }
  return found;
}

namespace detail {

inline const Product& pick_recommendation(const Catalog& catalog, const ProductSet& final_set,
                                          std::uint64_t seed) {
  if (final_set.empty()) throw std::logic_error("recommendation from an empty candidate set");
  Rng rng(mix_seed(seed, 0x7ec0));
  return catalog.product(final_set[rng.uniform_index(final_set.size())]);
}

inline DialogueResult fail_result(Conversation conv, std::string reason) {
  DialogueResult r;
  r.conversation = std::move(conv);
  r.ok = false;
  r.failure = std::move(reason);
  return r;
}

}  // namespace detail

/// One backend call renders the whole conversation from the script.
inline DialogueResult generate_single_pass(const Catalog& catalog, const Preference& pref,
                                           const PlanResult& plan, TextBackend& backend,
                                           const TemplateSet& templates,
                                           const DialogueConfig& cfg, std::uint64_t seed,
                                           std::string conversation_id, std::string domain) {
  Conversation conv;
  conv.id = std::move(conversation_id);
  conv.domain = std::move(domain);
  conv.preference = pref;
  conv.plan_history = plan.plan_history;
  conv.meta.strategy = "single-pass";
  conv.meta.backend = backend.name();
  conv.meta.seed = seed;

  const std::vector<PlanStep> script = build_script(pref, plan.plan_history);
  const auto hints = hints_for_script(script, plan, catalog);
  const Product& recommended = detail::pick_recommendation(catalog, plan.final_set, seed);
  conv.recommended_product_id = recommended.id;

  PromptSlots slots;
  slots["ProductCategory"] = pref.category;
  slots["MaxAspectsPerQuestion"] = std::to_string(cfg.aspects_per_question);
  slots["MaxClosingTurns"] = std::to_string(cfg.max_closing_turns);
  slots["RecommendedProduct"] = recommended.title;
  slots["WantedFeatures"] = feature_lines(script, Interest::Wanted);
  slots["OptionalFeatures"] = feature_lines(script, Interest::Optional);
  slots["UnwantedFeatures"] = feature_lines(script, Interest::Unwanted);
  slots["TypicalValues"] = hint_lines(script, hints);
  const std::string prompt = render_prompt(templates.single_pass, slots);

  BackendReply reply;
  try {
    GenParams params;
    params.seed = seed;
    params.max_tokens = cfg.max_backend_tokens;
    reply = backend.generate(std::array<ChatMessage, 1>{ChatMessage{"user", prompt}}, params);
  } catch (const std::exception& e) {
    return detail::fail_result(std::move(conv), std::string("backend error: ") + e.what());
  }
  conv.meta.model = reply.model;
  conv.meta.backend_calls = 1;
  conv.meta.attempts = reply.attempts;
  conv.meta.latency_ms = reply.latency_ms;

  ParsedTranscript parsed = parse_transcript(reply.text);
  if (!parsed.error.empty()) {
    conv.meta.raw_output = reply.text;
    return detail::fail_result(std::move(conv), "unparseable output: " + parsed.error);
  }
  conv.utterances = std::move(parsed.utterances);

  conv.meta.recommendation_turn = find_recommendation_turn(conv.utterances, recommended.title);
  if (conv.meta.recommendation_turn < 0) {
    conv.meta.raw_output = reply.text;
    return detail::fail_result(std::move(conv), "recommended product not mentioned");
  }
  if (auto error = validate_conversation(conv, cfg.max_closing_turns)) {
    conv.meta.raw_output = reply.text;
    return detail::fail_result(std::move(conv), *error);
  }

  const DialogueState state = track_conversation(script, conv.utterances, cfg.tracker);
  conv.meta.coverage_complete = state.complete();
  if (backend.name() == "template" && !state.complete()) {
    return detail::fail_result(std::move(conv), "coverage incomplete under the template backend");
  }

  DialogueResult result;
  result.conversation = std::move(conv);
  result.ok = true;
  return result;
}

/// Utterance-by-utterance generation: seller and customer agents alternate,
/// paced by the plan session and policed by the state tracker.
inline DialogueResult generate_interactive(const Catalog& catalog, const Preference& pref,
                                           PlanSession& session, TextBackend& backend,
                                           const TemplateSet& templates,
                                           const DialogueConfig& cfg, std::uint64_t seed,
                                           std::string conversation_id, std::string domain) {
  Conversation conv;
  conv.id = std::move(conversation_id);
  conv.domain = std::move(domain);
  conv.preference = pref;
  conv.meta.strategy = "interactive";
  conv.meta.backend = backend.name();
  conv.meta.seed = seed;

  DialogueTracker tracker({}, cfg.tracker);
  std::map<std::string, std::vector<std::string>> hints;
  std::uint64_t call_counter = 0;
  std::string failure;

  // One backend call -> one appended utterance; returns false on failure.
  auto say = [&](Speaker speaker, const PromptTemplate& tmpl, PromptSlots slots,
                 bool* moved = nullptr) {
    slots["ProductCategory"] = pref.category;
    slots["ConversationHistory"] = history_lines(conv.utterances);
    for (const char* always : {"AskFeatures", "TypicalValues", "RecommendProduct",
                               "CloseConversation", "OpenConversation", "StateWanted",
                               "StateOptional", "StateUnwanted", "AcceptRecommendation",
                               "MaxAspectsPerQuestion"}) {
      slots.emplace(always, "");
    }
    slots["MaxAspectsPerQuestion"] = std::to_string(cfg.aspects_per_question);
    BackendReply reply;
    try {
      GenParams params;
      params.seed = mix_seed(seed, ++call_counter);
      params.max_tokens = cfg.max_backend_tokens;
      const std::string prompt = render_prompt(tmpl, slots);
      reply = backend.generate(std::array<ChatMessage, 1>{ChatMessage{"user", prompt}}, params);
    } catch (const std::exception& e) {
      failure = std::string("backend error: ") + e.what();
      return false;
    }
    conv.meta.model = reply.model;
    conv.meta.backend_calls += 1;
    conv.meta.attempts += reply.attempts;
    conv.meta.latency_ms += reply.latency_ms;

    std::string text = trim(reply.text);
    // tolerate an echoed speaker tag in single-utterance replies
    const std::string tag = to_string(speaker) + ":";
    if (fold_collapse(text.substr(0, tag.size())) == tag) text = trim(text.substr(tag.size()));
    if (text.empty() || text.find('\n') != std::string::npos) {
      conv.meta.raw_output = reply.text;
      failure = "backend did not reply with a single utterance";
      return false;
    }
    Utterance u;
    u.speaker = speaker;
    u.text = std::move(text);
    u.turn_index = static_cast<int>(conv.utterances.size());
    conv.utterances.push_back(std::move(u));
    const bool did_move = tracker.observe(conv.utterances.back());
    if (moved) *moved = did_move;
    return true;
  };

  // Ask-and-answer until the tracker has no remaining entries, aborting when
  // several turns in a row consume nothing.
  auto drain = [&]() {
    int stalled_turns = 0;
    while (!tracker.state().remaining.empty()) {
      std::vector<PlanStep> chunk;
      for (const auto& e : tracker.state().remaining) {
        if (static_cast<int>(chunk.size()) == cfg.aspects_per_question) break;
        chunk.push_back(e);
      }
      PromptSlots ask;
      std::string ask_lines;
      for (const auto& e : chunk) {
        if (!ask_lines.empty()) ask_lines += '\n';
        ask_lines += "Aspect: " + e.aspect + ";";
      }
      ask["AskFeatures"] = ask_lines;
      ask["TypicalValues"] = hint_lines(chunk, hints);
      bool moved = false;
      if (!say(Speaker::Seller, templates.seller, ask, &moved)) return false;
      stalled_turns = moved ? 0 : stalled_turns + 1;

      PromptSlots state;
      state["StateWanted"] = feature_lines(chunk, Interest::Wanted);
      state["StateOptional"] = feature_lines(chunk, Interest::Optional);
      state["StateUnwanted"] = feature_lines(chunk, Interest::Unwanted);
      if (!say(Speaker::Customer, templates.customer, state, &moved)) return false;
      stalled_turns = moved ? 0 : stalled_turns + 1;
      if (stalled_turns >= cfg.deadlock_turns) {
        failure = "dialogue state deadlock: no feature consumed for " +
                  std::to_string(stalled_turns) + " turns";
        return false;
      }
    }
    return true;
  };

  // Stage 1: the customer opens with the product category.
  {
    PromptSlots open;
    open["OpenConversation"] = "1";
    if (!say(Speaker::Customer, templates.customer, open)) {
      return detail::fail_result(std::move(conv), failure);
    }
  }

  // Stage 2: search, plan, verbalize, repeat.
  bool planned_any = false;
  while (auto iter = session.next()) {
    planned_any = true;
    tracker.extend(iter->steps);
    for (const auto& [aspect, values] : iter->hints) hints[aspect] = values;
    if (!drain()) {
      conv.plan_history = session.finished() ? session.result().plan_history
                                             : std::vector<PlanStep>{};
      return detail::fail_result(std::move(conv), failure);
    }
  }
  const PlanResult& plan = session.result();
  conv.plan_history = plan.plan_history;

  // Preference entries the search never revealed are asked before closing.
  if (planned_any) {
    const std::vector<PlanStep> script = build_script(pref, plan.plan_history);
    std::vector<PlanStep> leftovers(script.begin() + static_cast<std::ptrdiff_t>(
                                                         plan.plan_history.size()),
                                    script.end());
    if (!leftovers.empty()) {
      for (const auto& step : leftovers) {
        auto values = top_values(plan.final_set, catalog, step.aspect, 3);
        if (!values.empty()) hints[step.aspect] = std::move(values);
      }
      tracker.extend(leftovers);
      if (!drain()) return detail::fail_result(std::move(conv), failure);
    }
  }

  // Stage 3: recommend a uniform-random member of the converged set, close.
  const Product& recommended = detail::pick_recommendation(catalog, plan.final_set, seed);
  conv.recommended_product_id = recommended.id;
  {
    PromptSlots rec;
    rec["RecommendProduct"] = recommended.title;
    if (!say(Speaker::Seller, templates.seller, rec)) {
      return detail::fail_result(std::move(conv), failure);
    }
    PromptSlots accept;
    accept["AcceptRecommendation"] = "1";
    if (!say(Speaker::Customer, templates.customer, accept)) {
      return detail::fail_result(std::move(conv), failure);
    }
    PromptSlots close;
    close["CloseConversation"] = "1";
    if (!say(Speaker::Seller, templates.seller, close)) {
      return detail::fail_result(std::move(conv), failure);
    }
  }

  conv.meta.recommendation_turn = find_recommendation_turn(conv.utterances, recommended.title);
  if (conv.meta.recommendation_turn < 0) {
    return detail::fail_result(std::move(conv), "recommended product not mentioned");
  }
  if (auto error = validate_conversation(conv, cfg.max_closing_turns)) {
    return detail::fail_result(std::move(conv), *error);
  }
  conv.meta.coverage_complete = tracker.state().complete();

  DialogueResult result;
  result.conversation = std::move(conv);
  result.ok = true;
  return result;
}

}  // namespace shopgen
