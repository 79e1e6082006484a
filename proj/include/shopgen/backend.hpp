#pragma once

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "shopgen/common.hpp"
#include "shopgen/planner.hpp"
#include "shopgen/search.hpp"

namespace shopgen {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};

struct GenParams {
  std::uint64_t seed = 0;
  int max_tokens = 2048;
  double temperature = 0.0;
};

struct BackendReply {
  std::string text;
  std::string model;
  int attempts = 1;
  long long latency_ms = 0;
};

class TextBackend {
 public:
  virtual ~TextBackend() = default;
  virtual BackendReply generate(std::span<const ChatMessage> messages, const GenParams& params) = 0;
  virtual std::string name() const = 0;
};

// ---------------------------------------------------------------------------
// Template backend: a deterministic rule engine standing in for an LLM so the
// whole pipeline runs offline. It reads the structured blocks of the stock
// prompt files and realizes the requested contribution with fixed phrasing.
// ---------------------------------------------------------------------------

namespace detail {

struct ParsedPrompt {
  enum class Kind { SinglePass, Seller, Customer, Unknown } kind = Kind::Unknown;
  std::string category;
  std::vector<PlanStep> wanted, optionals, unwanted;
  std::vector<std::string> ask;  // aspects the seller must ask about now
  std::map<std::string, std::vector<std::string>> hints;
  std::string recommended;     // single-pass: product to weave in at the end
  std::string recommend_now;   // seller: recommend this product immediately
  bool open_conversation = false;
  bool accept_recommendation = false;
  bool close_conversation = false;
  int max_aspects_per_question = 2;
};

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  lines.push_back(cur);
  return lines;
}

inline bool starts_with(const std::string& s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

inline bool take_prefix(const std::string& line, std::string_view prefix, std::string& rest) {
  if (!starts_with(line, prefix)) return false;
  rest = line.substr(prefix.size());
  return true;
}

inline ParsedPrompt parse_prompt(const std::string& text) {
  ParsedPrompt parsed;
  enum class Bucket { None, Wanted, Optional, Unwanted, Ask } bucket = Bucket::None;

  const auto lines = split_lines(text);
  if (!lines.empty()) {
    if (starts_with(lines[0], "You are a scriptwriter")) parsed.kind = ParsedPrompt::Kind::SinglePass;
    else if (starts_with(lines[0], "You are the seller")) parsed.kind = ParsedPrompt::Kind::Seller;
    else if (starts_with(lines[0], "You are the customer")) parsed.kind = ParsedPrompt::Kind::Customer;
  }

  for (const std::string& raw : lines) {
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (take_prefix(line, "Product category: ", parsed.category)) continue;
    if (take_prefix(line, "Recommended product (mention it by name): ", parsed.recommended)) continue;
    if (take_prefix(line, "Recommend exactly this product to the customer now: ",
                    parsed.recommend_now)) {
      continue;
    }
    if (starts_with(line, "Open the conversation")) { parsed.open_conversation = true; continue; }
    if (starts_with(line, "The seller has recommended a product")) {
      parsed.accept_recommendation = true;
      continue;
    }
    if (starts_with(line, "The customer has accepted the recommendation")) {
      parsed.close_conversation = true;
      continue;
    }
    if (auto at = line.find("at most "); at != std::string::npos) {
      int n = std::atoi(line.c_str() + at + 8);
      if (n > 0) parsed.max_aspects_per_question = n;
    }

    if (starts_with(line, "Aspect: ")) {
      std::string rest = line.substr(8);
      if (!rest.empty() && rest.back() == ';') rest.pop_back();
      if (auto tv = rest.find(", Typical Values: "); tv != std::string::npos) {
        const std::string aspect = rest.substr(0, tv);
        std::vector<std::string> values;
        std::string v = rest.substr(tv + 18);
        std::size_t at = 0;
        while (true) {
          auto comma = v.find(", ", at);
          if (comma == std::string::npos) {
            values.push_back(v.substr(at));
            break;
          }
          values.push_back(v.substr(at, comma - at));
          at = comma + 2;
        }
        parsed.hints[aspect] = std::move(values);
        continue;
      }
      PlanStep step;
      if (auto val = rest.find(", Value: "); val != std::string::npos) {
        step.aspect = rest.substr(0, val);
        step.value = rest.substr(val + 9);
      } else {
        step.aspect = rest;
      }
      switch (bucket) {
        case Bucket::Wanted: step.interest = Interest::Wanted; parsed.wanted.push_back(step); break;
        case Bucket::Optional: step.interest = Interest::Optional; parsed.optionals.push_back(step); break;
        case Bucket::Unwanted: step.interest = Interest::Unwanted; parsed.unwanted.push_back(step); break;
        case Bucket::Ask: parsed.ask.push_back(step.aspect); break;
        case Bucket::None: break;
      }
      continue;
    }

    // header lines open a bucket; any other prose closes it
    if (line.find("must state they want") != std::string::npos ||
        line.find("must state you want") != std::string::npos) {
      bucket = Bucket::Wanted;
    } else if (line.find("must call optional") != std::string::npos) {
      bucket = Bucket::Optional;
    } else if (line.find("must state they do not want") != std::string::npos ||
               line.find("must state you do not want") != std::string::npos) {
      bucket = Bucket::Unwanted;
    } else if (line.find("Ask the customer about the following aspects") != std::string::npos) {
      bucket = Bucket::Ask;
    } else {
      bucket = Bucket::None;
    }
  }
  return parsed;
}

inline std::string hint_sentence(const std::vector<std::string>& values) {
  if (values.empty()) return "";
  if (values.size() == 1) return " A popular one is " + values[0] + ".";
  if (values.size() == 2) return " Popular ones are " + values[0] + " or " + values[1] + ".";
  return " Popular ones are " + values[0] + ", " + values[1] + " or " + values[2] + ".";
}

inline std::string seller_question(const std::vector<std::string>& aspects,
                                   const std::map<std::string, std::vector<std::string>>& hints) {
  std::string out;
  for (std::size_t i = 0; i < aspects.size(); ++i) {
    if (i == 0) {
      out += "Do you have a preference for " + aspects[i] + "?";
    } else {
      out += " And how about " + aspects[i] + "?";
    }
    if (auto it = hints.find(aspects[i]); it != hints.end()) out += hint_sentence(it->second);
  }
  return out;
}

inline std::string customer_statement(const PlanStep& step) {
  switch (step.interest) {
    case Interest::Wanted: return "I want " + step.aspect + " to be " + step.value + ".";
    case Interest::Unwanted: return "I do not want " + step.aspect + " " + step.value + ".";
    case Interest::Optional: return "I have no preference on " + step.aspect + ".";
  }
  return "";
}

}  // namespace detail

class TemplateBackend : public TextBackend {
 public:
  std::string name() const override { return "template"; }

  BackendReply generate(std::span<const ChatMessage> messages, const GenParams&) override {
    if (messages.empty()) throw std::invalid_argument("backend: empty message list");
    const detail::ParsedPrompt p = detail::parse_prompt(messages.back().content);

    BackendReply reply;
    reply.model = "template-rules";
    switch (p.kind) {
      case detail::ParsedPrompt::Kind::SinglePass: reply.text = single_pass(p); break;
      case detail::ParsedPrompt::Kind::Seller: reply.text = seller_turn(p); break;
      case detail::ParsedPrompt::Kind::Customer: reply.text = customer_turn(p); break;
      case detail::ParsedPrompt::Kind::Unknown:
        throw std::runtime_error("template backend: unrecognized prompt shape");
    }
    return reply;
  }

 private:
  static std::string seller_turn(const detail::ParsedPrompt& p) {
    if (!p.recommend_now.empty()) {
      return "Based on your preferences, I recommend " + p.recommend_now + ".";
    }
    if (p.close_conversation) return "You are welcome! Enjoy your purchase.";
    std::vector<std::string> chunk;
    for (const auto& a : p.ask) {
      if (static_cast<int>(chunk.size()) == p.max_aspects_per_question) break;
      chunk.push_back(a);
    }
    return detail::seller_question(chunk, p.hints);
  }

  static std::string customer_turn(const detail::ParsedPrompt& p) {
    if (p.open_conversation) return "Hi, I am looking to buy " + p.category + ".";
    if (p.accept_recommendation) return "That sounds perfect, I will take it. Thank you!";
    std::string out;
    auto add = [&out](const std::vector<PlanStep>& steps) {
      for (const auto& s : steps) {
        if (!out.empty()) out += ' ';
        out += detail::customer_statement(s);
      }
    };
    add(p.wanted);
    add(p.optionals);
    add(p.unwanted);
    return out;
  }

  static std::string single_pass(const detail::ParsedPrompt& p) {
    std::vector<PlanStep> script;
    script.insert(script.end(), p.wanted.begin(), p.wanted.end());
    script.insert(script.end(), p.optionals.begin(), p.optionals.end());
    script.insert(script.end(), p.unwanted.begin(), p.unwanted.end());

    std::string out = "customer: Hi, I am looking to buy " + p.category + ".";
    for (std::size_t at = 0; at < script.size();
         at += static_cast<std::size_t>(p.max_aspects_per_question)) {
      std::vector<std::string> aspects;
      std::string answers;
      for (std::size_t i = at;
           i < script.size() && i < at + static_cast<std::size_t>(p.max_aspects_per_question);
           ++i) {
        aspects.push_back(script[i].aspect);
        if (!answers.empty()) answers += ' ';
        answers += detail::customer_statement(script[i]);
      }
      out += "\nseller: " + detail::seller_question(aspects, p.hints);
      out += "\ncustomer: " + answers;
    }
    out += "\nseller: Based on your preferences, I recommend " + p.recommended + ".";
    out += "\ncustomer: That sounds perfect, I will take it. Thank you!";
    out += "\nseller: You are welcome! Enjoy your purchase.";
    return out;
  }
};

// ---------------------------------------------------------------------------
// Remote backend: one chat-completion request per call over HTTP with
// exponential backoff on transient failures and a global in-flight cap.
// ---------------------------------------------------------------------------

struct HttpResponse {
  int status = 0;  // 0 = transport failure
  std::string body;
  std::string error;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;
using HttpTransport =
    std::function<HttpResponse(const std::string& url, const std::string& body,
                               const HttpHeaders& headers)>;
using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct RemoteConfig {
  std::string endpoint;  // full URL of the chat-completion route
  std::string api_key;
  std::string model = "default";
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_factor = 2.0;
  int max_in_flight = 4;
  int timeout_seconds = 120;
};

inline constexpr const char* kEndpointEnvVar = "SHOPGEN_ENDPOINT";
inline constexpr const char* kApiKeyEnvVar = "SHOPGEN_API_KEY";
inline constexpr const char* kModelEnvVar = "SHOPGEN_MODEL";

inline RemoteConfig remote_config_from_env() {
  RemoteConfig cfg;
  const char* endpoint = std::getenv(kEndpointEnvVar);
  const char* key = std::getenv(kApiKeyEnvVar);
  if (!endpoint || !*endpoint || !key || !*key) {
    throw std::runtime_error(std::string("remote backend needs ") + kEndpointEnvVar + " and " +
                             kApiKeyEnvVar + " set");
  }
  cfg.endpoint = endpoint;
  cfg.api_key = key;
  if (const char* model = std::getenv(kModelEnvVar); model && *model) cfg.model = model;
  return cfg;
}

HttpTransport default_http_transport(const RemoteConfig& cfg);  // defined below

class RemoteBackend : public TextBackend {
 public:
  explicit RemoteBackend(RemoteConfig cfg, HttpTransport transport = {}, Sleeper sleeper = {})
      : cfg_(std::move(cfg)),
        transport_(transport ? std::move(transport) : default_http_transport(cfg_)),
        sleeper_(sleeper ? std::move(sleeper)
                         : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }),
        slots_(cfg_.max_in_flight) {
    if (cfg_.endpoint.empty() || cfg_.api_key.empty()) {
      throw std::runtime_error("remote backend: endpoint and credential are required");
    }
  }

  std::string name() const override { return "remote"; }

  BackendReply generate(std::span<const ChatMessage> messages, const GenParams& params) override {
    if (messages.empty()) throw std::invalid_argument("backend: empty message list");

    nlohmann::json body;
    body["model"] = cfg_.model;
    body["temperature"] = params.temperature;
    body["max_tokens"] = params.max_tokens;
    body["seed"] = params.seed;
    auto& msgs = body["messages"] = nlohmann::json::array();
    for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    const std::string payload = body.dump();

    const HttpHeaders headers = {{"Authorization", "Bearer " + cfg_.api_key},
                                 {"Content-Type", "application/json"}};
    const auto start = std::chrono::steady_clock::now();
    std::string last_error;
    for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
      HttpResponse resp;
      {
        InFlightSlot slot(*this);
        resp = transport_(cfg_.endpoint, payload, headers);
      }
      if (resp.status == 200) {
        BackendReply reply;
        reply.text = extract_content(resp.body);
        reply.model = cfg_.model;
        reply.attempts = attempt;
        reply.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - start)
                               .count();
        return reply;
      }
      if (resp.status == 0) {
        last_error = "transport error: " + resp.error;
      } else if (resp.status == 429) {
        last_error = "rate limited (HTTP 429)";
      } else if (resp.status >= 500) {
        last_error = "server error (HTTP " + std::to_string(resp.status) + ")";
      } else {
        throw std::runtime_error("backend request rejected: HTTP " +
                                 std::to_string(resp.status) + ": " + resp.body.substr(0, 200));
      }
      if (attempt < cfg_.max_attempts) {
        const double scale = std::pow(cfg_.backoff_factor, attempt - 1);
        sleeper_(std::chrono::milliseconds(
            static_cast<long long>(cfg_.initial_backoff.count() * scale)));
      }
    }
    throw std::runtime_error("backend request failed after " +
                             std::to_string(cfg_.max_attempts) + " attempts: " + last_error);
  }

 private:
  // Global in-flight request cap shared by all episodes using this backend.
  class InFlightSlot {
   public:
    explicit InFlightSlot(RemoteBackend& b) : b_(b) {
      std::unique_lock lock(b_.mutex_);
      b_.cv_.wait(lock, [&] { return b_.slots_ > 0; });
      --b_.slots_;
    }
    ~InFlightSlot() {
      {
        std::lock_guard lock(b_.mutex_);
        ++b_.slots_;
      }
      b_.cv_.notify_one();
    }

   private:
    RemoteBackend& b_;
  };

  static std::string extract_content(const std::string& body) {
    nlohmann::json doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("choices") || doc["choices"].empty() ||
        !doc["choices"][0].contains("message") ||
        !doc["choices"][0]["message"].contains("content") ||
        !doc["choices"][0]["message"]["content"].is_string()) {
      throw std::runtime_error("backend response missing choices[0].message.content");
    }
    return doc["choices"][0]["message"]["content"].get<std::string>();
  }

  RemoteConfig cfg_;
  HttpTransport transport_;
  Sleeper sleeper_;
  std::mutex mutex_;
  std::condition_variable cv_;
  int slots_;
};

}  // namespace shopgen

// httplib is pulled in only for the default transport; tests inject fakes.
#include <httplib.h>

namespace shopgen {

inline HttpTransport default_http_transport(const RemoteConfig& cfg) {
  const auto scheme_end = cfg.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw std::runtime_error("remote backend: endpoint must be a full URL: " + cfg.endpoint);
  }
  const auto path_start = cfg.endpoint.find('/', scheme_end + 3);
  const std::string base =
      path_start == std::string::npos ? cfg.endpoint : cfg.endpoint.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? std::string("/")
                                                           : cfg.endpoint.substr(path_start);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (base.rfind("https://", 0) == 0) {
    throw std::runtime_error("remote backend: https endpoint but TLS support is not compiled in");
  }
#endif
  const int timeout = cfg.timeout_seconds;
  return [base, path, timeout](const std::string&, const std::string& body,
                               const HttpHeaders& headers) {
    httplib::Client client(base);
    client.set_connection_timeout(timeout, 0);
    client.set_read_timeout(timeout, 0);
    httplib::Headers h;
    std::string content_type = "application/json";
    for (const auto& [k, v] : headers) {
      if (fold(k) == "content-type") content_type = v;
      else h.emplace(k, v);
    }
    auto result = client.Post(path, h, body, content_type);
    if (!result) {
      return HttpResponse{0, "", httplib::to_string(result.error())};
    }
    return HttpResponse{result->status, result->body, ""};
  };
}

}  // namespace shopgen
