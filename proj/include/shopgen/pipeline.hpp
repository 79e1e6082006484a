#pragma once

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>
#include <vector>

#include "shopgen/backend.hpp"
#include "shopgen/catalog.hpp"
#include "shopgen/dialogue.hpp"
#include "shopgen/eval.hpp"
#include "shopgen/planner.hpp"
#include "shopgen/record.hpp"

namespace shopgen {

inline std::string episode_id(std::uint64_t seed, std::size_t index) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "ep-%llu-%05zu", static_cast<unsigned long long>(seed), index);
  return buf;
}

namespace detail {

inline void fill_plan(EpisodeRecord& rec, const PlanResult& plan, const Catalog& catalog) {
  rec.trace = plan.trace;
  rec.final_candidates = product_ids(catalog, plan.final_set);
  rec.converged = plan.converged;
  rec.stop_reason = plan.stop_reason;
}

}  // namespace detail

/// Sample, plan and verbalize one seeded episode. All failures end up in the
/// record, never as exceptions.
inline EpisodeRecord run_episode(const Catalog& catalog, const RunConfig& cfg,
                                 const TemplateSet& templates, TextBackend& backend,
                                 std::size_t index) {
  EpisodeRecord rec;
  rec.index = index;
  const std::uint64_t ep_seed = mix_seed(cfg.seed, index);
  try {
    Rng target_rng(mix_seed(ep_seed, 1));
    const Product& target = sample_target(catalog, target_rng);
    Rng pref_rng(mix_seed(ep_seed, 2));
    const Preference pref = sample_preference(target, catalog, pref_rng, cfg.weights);

    DialogueResult result;
    if (cfg.strategy == "interactive") {
      PlanSession session(catalog, pref, cfg.planner);
      result = generate_interactive(catalog, pref, session, backend, templates, cfg.dialogue,
                                    ep_seed, episode_id(cfg.seed, index), catalog.domain);
      if (session.finished()) detail::fill_plan(rec, session.result(), catalog);
    } else {
      const PlanResult plan = plan_dialogue(catalog, pref, cfg.planner);
      detail::fill_plan(rec, plan, catalog);
      result = generate_single_pass(catalog, pref, plan, backend, templates, cfg.dialogue,
                                    ep_seed, episode_id(cfg.seed, index), catalog.domain);
    }
    rec.conversation = std::move(result.conversation);
    rec.status = result.ok ? "ok" : "failed";
    rec.failure = result.failure;
  } catch (const std::exception& e) {
    rec.status = "failed";
    rec.failure = std::string("internal error: ") + e.what();
  }
  return rec;
}

/// Episode fan-out. Records come back ordered by index regardless of the
/// worker count; the backend must be safe for concurrent calls (both built-in
/// backends are).
inline std::vector<EpisodeRecord> generate_records(const Catalog& catalog, const RunConfig& cfg,
                                                   const TemplateSet& templates,
                                                   TextBackend& backend) {
  std::vector<EpisodeRecord> records(cfg.episodes);
  const std::size_t workers = std::min<std::size_t>(std::max<std::size_t>(cfg.workers, 1),
                                                    std::max<std::size_t>(cfg.episodes, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < cfg.episodes; ++i) {
      records[i] = run_episode(catalog, cfg, templates, backend, i);
    }
    return records;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cfg.episodes) return;
        records[i] = run_episode(catalog, cfg, templates, backend, i);
      }
    });
  }
  for (auto& t : pool) t.join();
  return records;
}

struct RunSummary {
  std::size_t ok = 0;
  std::size_t failed = 0;
};

inline RunSummary summarize(const std::vector<EpisodeRecord>& records) {
  RunSummary s;
  for (const auto& r : records) {
    if (r.status == "ok") ++s.ok;
    else ++s.failed;
  }
  return s;
}

/// Full generate run: episodes -> record file. Byte-identical for identical
/// (catalog, config, seed) under the template backend.
inline RunSummary run_generation(const Catalog& catalog, const RunConfig& cfg,
                                 const TemplateSet& templates, TextBackend& backend,
                                 const std::string& out_path) {
  const std::vector<EpisodeRecord> records = generate_records(catalog, cfg, templates, backend);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file: " + out_path);
  write_records(out, cfg, records);
  return summarize(records);
}

// --- Evaluation --------------------------------------------------------------

struct EvalOptions {
  std::string extractor = "reference";  // "reference" | "baseline" | "gold"
  std::vector<int> ks = {1, 10, 100};
  Bm25Params bm25;
  TrackerConfig tracker;
};

struct EvalOutcome {
  MetricReport report;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  // failed episodes excluded from scoring
};

inline EvalOutcome evaluate_records(const Catalog& catalog,
                                    const std::vector<EpisodeRecord>& records,
                                    const EvalOptions& opts = {}) {
  if (opts.extractor != "reference" && opts.extractor != "baseline" && opts.extractor != "gold") {
    throw std::invalid_argument("unknown extractor: " + opts.extractor);
  }
  const Bm25Index index(catalog, opts.bm25);
  const ReferenceExtractor reference(opts.tracker);
  std::size_t max_k = 1;
  for (int k : opts.ks) max_k = std::max<std::size_t>(max_k, static_cast<std::size_t>(k));

  EvalOutcome outcome;
  std::vector<std::pair<RankedResult, std::string>> rankings;
  std::vector<std::pair<std::string, std::string>> query_pairs;
  for (const auto& rec : records) {
    if (rec.status != "ok") {
      ++outcome.skipped;
      continue;
    }
    const Conversation& conv = rec.conversation;
    const std::string gold_str = serialize_query(query_from_preference(conv.preference));
    RankedResult ranked;
    std::string pred_str;
    if (opts.extractor == "baseline") {
      pred_str = baseline_query(conv);
      ranked = index.rank(pred_str, max_k);
    } else {
      const StructuredQuery q = opts.extractor == "gold"
                                    ? query_from_preference(conv.preference)
                                    : reference.extract(conv);
      pred_str = serialize_query(q);
      ranked = rank_structured(index, catalog, q, max_k);
    }
    rankings.emplace_back(std::move(ranked), conv.preference.target_id);
    query_pairs.emplace_back(std::move(pred_str), gold_str);
    ++outcome.evaluated;
  }
  if (outcome.evaluated == 0) throw std::runtime_error("no ok records to evaluate");
  outcome.report = compute_metrics(rankings, opts.ks, query_pairs);
  return outcome;
}

// --- Corpus statistics ---------------------------------------------------------

// Reported corpus statistics, printed as a comparison row next to measured
// values; never asserted.
inline constexpr double kReferenceUtterancesPerConv = 19.7;
inline constexpr double kReferenceSearchesPerConv = 2.2;
inline constexpr double kReferenceSecondsPerConv = 75.6;
inline constexpr std::size_t kReferenceConversations = 3600;

struct DomainStats {
  std::size_t conversations = 0;  // ok episodes
  std::size_t failed = 0;
  double mean_utterances = 0.0;
  double mean_searches = 0.0;
  double mean_seconds = 0.0;
};

struct StatsReport {
  std::map<std::string, DomainStats> domains;
  DomainStats overall;
};

inline StatsReport compute_stats(const std::vector<EpisodeRecord>& records) {
  if (records.empty()) throw std::runtime_error("empty record file");
  StatsReport report;
  auto accumulate = [](DomainStats& s, const EpisodeRecord& rec) {
    if (rec.status != "ok") {
      ++s.failed;
      return;
    }
    ++s.conversations;
    s.mean_utterances += static_cast<double>(rec.conversation.utterances.size());
    // one search per plan iteration plus the final convergence check
    s.mean_searches += static_cast<double>(rec.trace.size() + 1);
    s.mean_seconds += static_cast<double>(rec.conversation.meta.latency_ms) / 1000.0;
  };
  for (const auto& rec : records) {
    accumulate(report.domains[rec.conversation.domain], rec);
    accumulate(report.overall, rec);
  }
  auto finish = [](DomainStats& s) {
    if (s.conversations == 0) return;
    const double n = static_cast<double>(s.conversations);
    s.mean_utterances /= n;
    s.mean_searches /= n;
    s.mean_seconds /= n;
  };
  for (auto& [_, s] : report.domains) finish(s);
  finish(report.overall);
  return report;
}

inline std::string format_stats_table(const StatsReport& report) {
  std::ostringstream out;
  auto row = [&out](const std::string& domain, const std::string& conv, const std::string& failed,
                    const std::string& utterances, const std::string& searches,
                    const std::string& seconds) {
    out << std::left << std::setw(26) << domain << std::right << std::setw(8) << conv
        << std::setw(8) << failed << std::setw(12) << utterances << std::setw(12) << searches
        << std::setw(14) << seconds << '\n';
  };
  auto fmt = [](double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(1) << v;
    return s.str();
  };
  row("domain", "conv", "failed", "avg utter", "avg search", "avg time (s)");
  for (const auto& [domain, s] : report.domains) {
    row(domain, std::to_string(s.conversations), std::to_string(s.failed),
        fmt(s.mean_utterances), fmt(s.mean_searches), fmt(s.mean_seconds));
  }
  const DomainStats& all = report.overall;
  row("all", std::to_string(all.conversations), std::to_string(all.failed),
      fmt(all.mean_utterances), fmt(all.mean_searches), fmt(all.mean_seconds));
  row("reference corpus", std::to_string(kReferenceConversations), "-",
      fmt(kReferenceUtterancesPerConv), fmt(kReferenceSearchesPerConv),
      fmt(kReferenceSecondsPerConv));
  return out.str();
}

}  // namespace shopgen
