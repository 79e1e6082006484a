// Command-line front end: ingest -> sample -> plan -> generate -> evaluate -> stats.

#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shopgen/backend.hpp"
#include "shopgen/catalog.hpp"
#include "shopgen/pipeline.hpp"
#include "shopgen/record.hpp"
#include "shopgen/version.hpp"

namespace {

using namespace shopgen;

CatalogOptions catalog_options_from(const std::vector<std::string>& drop_keys,
                                    const std::vector<std::string>& renames) {
  CatalogOptions opt = default_catalog_options();
  for (const auto& k : drop_keys) opt.drop_keys.insert(fold_collapse(k));
  for (const auto& r : renames) {
    const auto eq = r.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("--rename expects From=To, got: " + r);
    }
    opt.rename_map[fold_collapse(r.substr(0, eq))] = r.substr(eq + 1);
  }
  return opt;
}

std::unique_ptr<TextBackend> make_backend(const std::string& name) {
  if (name == "template") return std::make_unique<TemplateBackend>();
  if (name == "remote") return std::make_unique<RemoteBackend>(remote_config_from_env());
  throw std::runtime_error("unknown backend: " + name);
}

struct CommonGenArgs {
  std::string catalog_path;
  std::string domain = "general";
  std::size_t n = 10;
  std::uint64_t seed = 0;
  std::vector<double> weights;  // wanted unwanted optional
  std::string criterion = "gain-ratio";
  std::size_t max_steps_per_turn = 0;
  bool refit_per_step = false;
  std::string branch_policy = "target";
  std::string out;
};

void add_common_gen(CLI::App* cmd, CommonGenArgs& a, bool with_planner) {
  cmd->add_option("--catalog", a.catalog_path, "catalog record file")->required();
  cmd->add_option("--domain", a.domain, "domain label for the run");
  cmd->add_option("--n", a.n, "number of episodes");
  cmd->add_option("--seed", a.seed, "master seed");
  cmd->add_option("--weights", a.weights,
                  "interest weights: wanted unwanted optional")
      ->expected(3);
  if (with_planner) {
    cmd->add_option("--criterion", a.criterion, "split criterion: gain-ratio|gain|gini");
    cmd->add_option("--max-steps-per-turn", a.max_steps_per_turn,
                    "cap plan steps per search iteration (0 = full path)");
    cmd->add_flag("--refit-per-step", a.refit_per_step, "refit the tree after every step");
    cmd->add_option("--branch-policy", a.branch_policy, "traversal branch policy: target|majority");
  }
  cmd->add_option("--out", a.out, "output record file")->required();
}

RunConfig config_from(const CommonGenArgs& a) {
  RunConfig cfg;
  cfg.catalog_path = a.catalog_path;
  cfg.domain = a.domain;
  cfg.episodes = a.n;
  cfg.seed = a.seed;
  if (!a.weights.empty()) {
    cfg.weights = InterestWeights{a.weights[0], a.weights[1], a.weights[2]};
  }
  cfg.planner.tree.criterion = criterion_from_string(a.criterion);
  cfg.planner.max_steps_per_iteration = a.max_steps_per_turn;
  cfg.planner.refit_per_step = a.refit_per_step;
  if (a.branch_policy == "majority") cfg.planner.branch_policy = BranchPolicy::Majority;
  else if (a.branch_policy != "target") {
    throw std::runtime_error("unknown branch policy: " + a.branch_policy);
  }
  return cfg;
}

int cmd_ingest(const std::string& input, const std::string& domain, const std::string& out,
               const std::vector<std::string>& drop_keys, const std::vector<std::string>& renames) {
  const CatalogOptions opt = catalog_options_from(drop_keys, renames);
  const LoadResult loaded = load_catalog(input, domain, opt);
  std::ofstream os(out, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write output file: " + out);
  export_catalog(loaded.catalog, os);
  std::cout << "lines: " << loaded.report.lines_read << "  loaded: " << loaded.report.loaded
            << "  malformed: " << loaded.report.malformed
            << "  filtered: " << loaded.report.filtered << '\n';
  for (const auto& msg : loaded.report.messages) std::cerr << "  " << msg << '\n';
  return 0;
}

int cmd_sample(const CommonGenArgs& a) {
  const RunConfig cfg = config_from(a);
  const Catalog catalog = load_catalog(a.catalog_path, a.domain).catalog;
  std::ofstream os(a.out, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write output file: " + a.out);
  Json header{{"kind", "header"},
              {"schema_version", kSchemaVersion},
              {"tool_version", std::string(kToolVersion)},
              {"config", to_json(cfg)}};
  os << header.dump() << '\n';
  for (std::size_t i = 0; i < cfg.episodes; ++i) {
    const std::uint64_t ep_seed = mix_seed(cfg.seed, i);
    Rng target_rng(mix_seed(ep_seed, 1));
    const Product& target = sample_target(catalog, target_rng);
    Rng pref_rng(mix_seed(ep_seed, 2));
    const Preference pref = sample_preference(target, catalog, pref_rng, cfg.weights);
    os << Json{{"kind", "preference"}, {"index", i}, {"preference", to_json(pref)}}.dump() << '\n';
  }
  std::cout << "sampled " << cfg.episodes << " preferences -> " << a.out << '\n';
  return 0;
}

int cmd_plan(const CommonGenArgs& a) {
  const RunConfig cfg = config_from(a);
  const Catalog catalog = load_catalog(a.catalog_path, a.domain).catalog;
  std::ofstream os(a.out, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write output file: " + a.out);
  Json header{{"kind", "header"},
              {"schema_version", kSchemaVersion},
              {"tool_version", std::string(kToolVersion)},
              {"config", to_json(cfg)}};
  os << header.dump() << '\n';
  for (std::size_t i = 0; i < cfg.episodes; ++i) {
    const std::uint64_t ep_seed = mix_seed(cfg.seed, i);
    Rng target_rng(mix_seed(ep_seed, 1));
    const Product& target = sample_target(catalog, target_rng);
    Rng pref_rng(mix_seed(ep_seed, 2));
    const Preference pref = sample_preference(target, catalog, pref_rng, cfg.weights);
    const PlanResult plan = plan_dialogue(catalog, pref, cfg.planner);
    Json traces = Json::array();
    for (const auto& t : plan.trace) traces.push_back(to_json(t));
    os << Json{{"kind", "plan"},
               {"index", i},
               {"preference", to_json(pref)},
               {"plan_history", to_json(plan.plan_history)},
               {"trace", traces},
               {"final_candidates", product_ids(catalog, plan.final_set)},
               {"converged", plan.converged},
               {"stop_reason", plan.stop_reason}}
              .dump()
       << '\n';
  }
  std::cout << "planned " << cfg.episodes << " episodes -> " << a.out << '\n';
  return 0;
}

int cmd_generate(CommonGenArgs& a, const std::string& strategy, const std::string& backend_name,
                 const std::string& prompt_dir, int aspects_per_question, std::size_t workers) {
  RunConfig cfg = config_from(a);
  cfg.strategy = strategy;
  cfg.backend = backend_name;
  cfg.prompt_dir = prompt_dir;
  cfg.dialogue.aspects_per_question = aspects_per_question;
  cfg.workers = workers;
  if (strategy != "single-pass" && strategy != "interactive") {
    throw std::runtime_error("unknown strategy: " + strategy);
  }
  // Config problems (credentials, templates, catalog) are fatal before any
  // episode runs.
  const std::unique_ptr<TextBackend> backend = make_backend(backend_name);
  const TemplateSet templates = load_templates(prompt_dir);
  const Catalog catalog = load_catalog(a.catalog_path, a.domain).catalog;

  const RunSummary summary = run_generation(catalog, cfg, templates, *backend, a.out);
  std::cout << "episodes: " << cfg.episodes << "  ok: " << summary.ok
            << "  failed: " << summary.failed << "  -> " << a.out << '\n';
  return 0;
}

int cmd_evaluate(const std::string& records_path, const std::string& catalog_path,
                 const std::string& domain, const std::string& extractor,
                 std::vector<int> ks, const std::string& out) {
  const RecordFile file = read_records(records_path);
  if (file.records.empty()) throw std::runtime_error("empty record file: " + records_path);
  const Catalog catalog = load_catalog(catalog_path, domain).catalog;
  EvalOptions opts;
  opts.extractor = extractor;
  if (!ks.empty()) opts.ks = std::move(ks);
  const EvalOutcome outcome = evaluate_records(catalog, file.records, opts);

  const MetricReport& m = outcome.report;
  std::cout << "extractor: " << extractor << "  evaluated: " << outcome.evaluated
            << "  skipped: " << outcome.skipped << '\n';
  std::cout << "  MRR      " << m.mrr << '\n';
  for (const auto& [k, v] : m.hit_at) std::cout << "  H@" << k << "     " << v << '\n';
  std::cout << "  exact-F1 " << m.exact_f1 << '\n';
  std::cout << "  ROUGE-1  " << m.rouge_1 << '\n';
  std::cout << "  ROUGE-2  " << m.rouge_2 << '\n';
  std::cout << "  ROUGE-L  " << m.rouge_l << '\n';

  if (!out.empty()) {
    Json hit = Json::object();
    for (const auto& [k, v] : m.hit_at) hit[std::to_string(k)] = v;
    Json report{{"kind", "metrics"},
                {"tool_version", std::string(kToolVersion)},
                {"records", records_path},
                {"extractor", extractor},
                {"evaluated", outcome.evaluated},
                {"skipped", outcome.skipped},
                {"mrr", m.mrr},
                {"hit_at", hit},
                {"exact_f1", m.exact_f1},
                {"rouge_1", m.rouge_1},
                {"rouge_2", m.rouge_2},
                {"rouge_l", m.rouge_l},
                {"n_examples", m.n_examples}};
    std::ofstream os(out, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write output file: " + out);
    os << report.dump() << '\n';
  }
  return 0;
}

int cmd_stats(const std::string& records_path) {
  const RecordFile file = read_records(records_path);
  const StatsReport report = compute_stats(file.records);
  std::cout << format_stats_table(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"target-oriented shopping conversation generation and evaluation"};
  app.set_version_flag("--version", std::string(shopgen::kToolVersion));
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "normalize a raw catalog file");
  std::string in_path, in_domain = "general", in_out;
  std::vector<std::string> drop_keys, renames;
  ingest->add_option("--input", in_path, "raw line-delimited records")->required();
  ingest->add_option("--domain", in_domain, "domain label");
  ingest->add_option("--out", in_out, "normalized output file")->required();
  ingest->add_option("--drop-key", drop_keys, "extra aspect key to drop (repeatable)");
  ingest->add_option("--rename", renames, "extra aspect rename From=To (repeatable)");

  // sample
  auto* sample = app.add_subcommand("sample", "sample customer preferences");
  CommonGenArgs sample_args;
  add_common_gen(sample, sample_args, false);

  // plan
  auto* plan = app.add_subcommand("plan", "plan search trajectories");
  CommonGenArgs plan_args;
  add_common_gen(plan, plan_args, true);

  // generate
  auto* generate = app.add_subcommand("generate", "generate conversations end-to-end");
  CommonGenArgs gen_args;
  add_common_gen(generate, gen_args, true);
  std::string strategy = "single-pass", backend_name = "template", prompt_dir = "prompts";
  int aspects_per_question = 2;
  std::size_t workers = 1;
  generate->add_option("--strategy", strategy, "single-pass|interactive");
  generate->add_option("--backend", backend_name, "template|remote");
  generate->add_option("--prompts", prompt_dir, "prompt template directory");
  generate->add_option("--aspects-per-question", aspects_per_question,
                       "max aspects the seller covers per question");
  generate->add_option("--workers", workers, "episode worker threads");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score query generation and product ranking");
  std::string eval_records, eval_catalog, eval_domain = "general",
              eval_extractor = "reference", eval_out;
  std::vector<int> eval_ks;
  evaluate->add_option("--records", eval_records, "conversation record file")->required();
  evaluate->add_option("--catalog", eval_catalog, "catalog record file")->required();
  evaluate->add_option("--domain", eval_domain, "domain label");
  evaluate->add_option("--extractor", eval_extractor, "reference|baseline|gold");
  evaluate->add_option("--ks", eval_ks, "Hit@k cutoffs");
  evaluate->add_option("--out", eval_out, "write the metric report here");

  // stats
  auto* stats = app.add_subcommand("stats", "corpus statistics of a record file");
  std::string stats_records;
  stats->add_option("--records", stats_records, "conversation record file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) return cmd_ingest(in_path, in_domain, in_out, drop_keys, renames);
    if (sample->parsed()) return cmd_sample(sample_args);
    if (plan->parsed()) return cmd_plan(plan_args);
    if (generate->parsed()) {
      return cmd_generate(gen_args, strategy, backend_name, prompt_dir, aspects_per_question,
                          workers);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(eval_records, eval_catalog, eval_domain, eval_extractor, eval_ks,
                          eval_out);
    }
    if (stats->parsed()) return cmd_stats(stats_records);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
