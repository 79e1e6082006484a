#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "shopgen/common.hpp"
#include "shopgen/conversation.hpp"
#include "shopgen/planner.hpp"

namespace shopgen {

struct TrackerConfig {
  // Alternative surface forms per aspect key, matched like the key itself.
  std::map<std::string, std::vector<std::string>> aspect_aliases;
  // Phrases that signal indifference; an Optional entry needs its aspect
  // plus one of these in the same utterance.
  std::vector<std::string> hedge_phrases = {
      "don't care",    "do not care",    "no preference", "no specific preference",
      "optional",      "flexible",       "doesn't matter", "does not matter",
      "not important", "any is fine",    "open to",        "not mandatory",
      "no problem either way"};
};

struct DialogueState {
  std::vector<PlanStep> remaining;
  std::vector<PlanStep> mentioned_wanted;
  std::vector<PlanStep> mentioned_optional;
  std::vector<PlanStep> mentioned_unwanted;
  std::vector<std::string> ambiguity_log;

  bool complete() const { return remaining.empty(); }
  std::size_t mentioned_total() const {
    return mentioned_wanted.size() + mentioned_optional.size() + mentioned_unwanted.size();
  }
};

/// Tracks which plan entries the customer has voiced. Moves are rule-based
/// keyword matches over customer utterances and are strictly one-way:
/// remaining -> mentioned. Seller turns never move entries (hint values in a
/// seller question must not count as the customer's disclosure). Ambiguous
/// matches are skipped and logged rather than guessed.
class DialogueTracker {
 public:
  explicit DialogueTracker(std::vector<PlanStep> script, TrackerConfig config = {})
      : config_(std::move(config)) {
    state_.remaining = std::move(script);
  }

  void extend(std::span<const PlanStep> steps) {
    state_.remaining.insert(state_.remaining.end(), steps.begin(), steps.end());
  }

  /// Feed one utterance; returns true when at least one entry moved.
  bool observe(const Utterance& utterance) {
    if (utterance.speaker != Speaker::Customer) return false;
    const std::vector<std::string> tokens = tokenize(utterance.text);
    if (tokens.empty()) return false;

    struct Match {
      std::size_t index;
      bool aspect_hit;
      bool value_hit;
    };
    std::vector<Match> value_hits;  // non-optional entries whose value appears
    std::vector<std::size_t> moves;

    const bool hedge = hedge_hit(tokens);
    for (std::size_t i = 0; i < state_.remaining.size(); ++i) {
      const PlanStep& e = state_.remaining[i];
      const bool a_hit = aspect_hit(tokens, e.aspect);
      if (e.interest == Interest::Optional) {
        if (a_hit && hedge) moves.push_back(i);
        continue;
      }
      const bool v_hit = contains_token_seq(tokens, tokenize(e.value));
      if (a_hit && v_hit) {
        moves.push_back(i);
      } else if (v_hit) {
        value_hits.push_back({i, a_hit, v_hit});
      }
    }

    // Value-only fallback: a bare value identifies an entry only when it is
    // the single remaining non-optional entry whose value occurs in the text.
    if (value_hits.size() == 1) {
      bool already = false;
      for (std::size_t m : moves) {
        if (m == value_hits[0].index) already = true;
      }
      if (!already && moves.empty()) moves.push_back(value_hits[0].index);
      else if (!already) {
        state_.ambiguity_log.push_back("value-only match shadowed by explicit move: " +
                                       state_.remaining[value_hits[0].index].aspect);
      }
    } else if (value_hits.size() > 1) {
      std::string aspects;
      for (const Match& m : value_hits) {
        if (!aspects.empty()) aspects += ", ";
        aspects += state_.remaining[m.index].aspect;
      }
      state_.ambiguity_log.push_back("ambiguous value mention across aspects: " + aspects);
    }

    if (moves.empty()) return false;
    std::sort(moves.begin(), moves.end());
    for (auto it = moves.rbegin(); it != moves.rend(); ++it) {
      PlanStep moved = state_.remaining[*it];
      state_.remaining.erase(state_.remaining.begin() + static_cast<std::ptrdiff_t>(*it));
      switch (moved.interest) {
        case Interest::Wanted: state_.mentioned_wanted.push_back(std::move(moved)); break;
        case Interest::Optional: state_.mentioned_optional.push_back(std::move(moved)); break;
        case Interest::Unwanted: state_.mentioned_unwanted.push_back(std::move(moved)); break;
      }
    }
    return true;
  }

  const DialogueState& state() const { return state_; }

 private:
  bool aspect_hit(std::span<const std::string> tokens, const std::string& aspect) const {
    if (contains_token_seq(tokens, tokenize(aspect))) return true;
    auto it = config_.aspect_aliases.find(aspect);
    if (it == config_.aspect_aliases.end()) return false;
    for (const std::string& alias : it->second) {
      if (contains_token_seq(tokens, tokenize(alias))) return true;
    }
    return false;
  }

  bool hedge_hit(std::span<const std::string> tokens) const {
    for (const std::string& phrase : config_.hedge_phrases) {
      if (contains_token_seq(tokens, tokenize(phrase))) return true;
    }
    return false;
  }

  TrackerConfig config_;
  DialogueState state_;
};

/// Run the tracker over a whole transcript; the reference route for turning
/// a conversation back into mentioned-feature partitions.
inline DialogueState track_conversation(std::vector<PlanStep> script,
                                        std::span<const Utterance> utterances,
                                        const TrackerConfig& config = {}) {
  DialogueTracker tracker(std::move(script), config);
  for (const auto& u : utterances) tracker.observe(u);
  return tracker.state();
}

}  // namespace shopgen
