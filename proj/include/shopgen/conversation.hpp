#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shopgen/planner.hpp"
#include "shopgen/preference.hpp"

namespace shopgen {

enum class Speaker { Customer, Seller };

inline std::string to_string(Speaker s) {
  return s == Speaker::Customer ? "customer" : "seller";
}

inline Speaker speaker_from_string(std::string_view s) {
  if (s == "customer") return Speaker::Customer;
  if (s == "seller") return Speaker::Seller;
  throw std::invalid_argument("unknown speaker: " + std::string(s));
}

struct Utterance {
  Speaker speaker = Speaker::Customer;
  std::string text;
  int turn_index = 0;
};

struct GenerationMeta {
  std::string strategy;  // "single-pass" | "interactive"
  std::string backend;
  std::string model;
  std::uint64_t seed = 0;
  long long latency_ms = 0;
  int backend_calls = 0;
  int attempts = 0;            // transport attempts across all calls
  int recommendation_turn = -1;
  bool coverage_complete = false;
  std::string raw_output;      // preserved when the output could not be parsed
};

/// A finished dialogue plus its provenance: the preference it realizes, the
/// plan that paced it, and the recommended product.
struct Conversation {
  std::string id;
  std::string domain;
  Preference preference;
  std::vector<PlanStep> plan_history;
  std::string recommended_product_id;
  std::vector<Utterance> utterances;
  GenerationMeta meta;
};

}  // namespace shopgen
