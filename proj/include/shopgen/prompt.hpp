#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>

#include "shopgen/common.hpp"
#include "shopgen/conversation.hpp"
#include "shopgen/search.hpp"

namespace shopgen {

struct PromptTemplate {
  std::string name;
  std::string body;
};

inline PromptTemplate load_template(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read prompt template: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return PromptTemplate{path.stem().string(), buf.str()};
}

using PromptSlots = std::map<std::string, std::string>;

namespace detail {

// Conditional sections: {{#Name}}...{{/Name}} is kept when the slot exists
// and is non-empty, dropped otherwise. Different names may nest.
inline std::string resolve_sections(const std::string& body, const PromptSlots& slots) {
  std::string out = body;
  while (true) {
    const auto open = out.find("{{#");
    if (open == std::string::npos) return out;
    const auto name_end = out.find("}}", open);
    if (name_end == std::string::npos) throw std::runtime_error("unterminated section marker");
    const std::string name = out.substr(open + 3, name_end - open - 3);
    const std::string close = "{{/" + name + "}}";
    const auto close_at = out.find(close, name_end);
    if (close_at == std::string::npos) {
      throw std::runtime_error("missing section close: " + name);
    }
    std::string content = out.substr(name_end + 2, close_at - name_end - 2);
    // strip one newline hugging each marker so dropped sections leave no gap
    if (!content.empty() && content.front() == '\n') content.erase(0, 1);
    if (!content.empty() && content.back() == '\n') content.pop_back();
    auto it = slots.find(name);
    const bool keep = it != slots.end() && !it->second.empty();
    std::string replacement = keep ? content + "\n" : "";
    // also drop the trailing newline after the close marker when empty
    std::size_t erase_end = close_at + close.size();
    if (erase_end < out.size() && out[erase_end] == '\n') ++erase_end;
    out.replace(open, erase_end - open, replacement);
  }
}

}  // namespace detail

/// Deterministic text substitution. Every {{Placeholder}} must have a slot;
/// an unresolved placeholder is an error naming it.
inline std::string render_prompt(const PromptTemplate& tmpl, const PromptSlots& slots) {
  std::string out = detail::resolve_sections(tmpl.body, slots);
  std::string rendered;
  rendered.reserve(out.size());
  std::size_t at = 0;
  while (true) {
    const auto open = out.find("{{", at);
    if (open == std::string::npos) {
      rendered.append(out, at, std::string::npos);
      break;
    }
    rendered.append(out, at, open - at);
    const auto close = out.find("}}", open);
    if (close == std::string::npos) throw std::runtime_error("unterminated placeholder");
    const std::string name = out.substr(open + 2, close - open - 2);
    auto it = slots.find(name);
    if (it == slots.end()) {
      throw std::runtime_error("missing placeholder: " + name + " (template " + tmpl.name + ")");
    }
    rendered += it->second;
    at = close + 2;
  }
  return rendered;
}

// --- Feature block formats -------------------------------------------------
// These line shapes are the contract between the prompt files, the template
// backend and the prompt parser; changing them breaks offline generation.

inline std::string feature_line(const PlanStep& step) {
  if (step.interest == Interest::Optional || step.value.empty()) {
    return "Aspect: " + step.aspect + ";";
  }
  return "Aspect: " + step.aspect + ", Value: " + step.value + ";";
}

template <typename Pred>
std::string feature_lines(std::span<const PlanStep> script, Pred&& keep) {
  std::string out;
  for (const auto& step : script) {
    if (!keep(step)) continue;
    if (!out.empty()) out += '\n';
    out += feature_line(step);
  }
  return out;
}

inline std::string feature_lines(std::span<const PlanStep> script, Interest interest) {
  return feature_lines(script, [interest](const PlanStep& s) { return s.interest == interest; });
}

inline std::string hint_lines(std::span<const PlanStep> script,
                              const std::map<std::string, std::vector<std::string>>& hints) {
  std::string out;
  for (const auto& step : script) {
    auto it = hints.find(step.aspect);
    if (it == hints.end() || it->second.empty()) continue;
    if (!out.empty()) out += '\n';
    out += "Aspect: " + step.aspect + ", Typical Values: " + join(it->second, ", ") + ";";
  }
  return out;
}

inline std::string history_lines(std::span<const Utterance> utterances) {
  std::string out;
  for (const auto& u : utterances) {
    if (!out.empty()) out += '\n';
    out += to_string(u.speaker) + ": " + u.text;
  }
  return out;
}

struct TemplateSet {
  PromptTemplate single_pass;
  PromptTemplate seller;
  PromptTemplate customer;
};

inline TemplateSet load_templates(const std::filesystem::path& dir) {
  return TemplateSet{load_template(dir / "single_pass.txt"), load_template(dir / "seller.txt"),
                     load_template(dir / "customer.txt")};
}

}  // namespace shopgen
