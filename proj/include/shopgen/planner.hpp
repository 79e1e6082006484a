#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shopgen/catalog.hpp"
#include "shopgen/common.hpp"
#include "shopgen/preference.hpp"
#include "shopgen/search.hpp"
#include "shopgen/tree.hpp"

namespace shopgen {

// A plan step is one (aspect, value, interest) element to be voiced in the
// conversation; its shape is identical to a preference entry.
using PlanStep = PreferenceEntry;

enum class BranchPolicy {
  TargetConsistent,  // descend the branch holding the target product
  Majority,          // descend the most populated admissible branch
};

namespace detail {

inline std::size_t majority_branch(const DecisionTree& tree, const TreeNode& node,
                                   const std::string& excluded_value) {
  const std::string excluded = fold_collapse(excluded_value);
  std::optional<std::size_t> best;
  std::size_t best_count = 0;
  for (const auto& [value, child] : node.branches) {
    if (!excluded.empty() && fold_collapse(value) == excluded) continue;
    const std::size_t count = tree.node(child).members.size();
    if (!best || count > best_count) { best = child; best_count = count; }
  }
  if (!best) throw std::logic_error("majority_branch: no admissible branch");
  return *best;
}

}  // namespace detail

/// Walk the fitted tree from the root and emit one step per visited node.
/// Steps take their value and interest from the preference; aspects absent
/// from the preference become Optional with an empty value. Descent follows
/// the target product by default.
inline std::vector<PlanStep> traverse(const DecisionTree& tree, const Preference& pref,
                                      const Product& target,
                                      BranchPolicy policy = BranchPolicy::TargetConsistent) {
  std::vector<PlanStep> steps;
  std::size_t at = tree.root;
  while (!tree.node(at).is_leaf()) {
    const TreeNode& node = tree.node(at);
    const PreferenceEntry* entry = pref.find(node.aspect);
    PlanStep step;
    step.aspect = node.aspect;
    if (entry) {
      step.interest = entry->interest;
      if (entry->interest != Interest::Optional) step.value = entry->value;
    } else {
      step.interest = Interest::Optional;
    }
    steps.push_back(std::move(step));

    if (policy == BranchPolicy::TargetConsistent) {
      const std::string* v = target.find_aspect(node.aspect);
      auto it = node.branches.find(v ? *v : kMissingValue);
      if (it == node.branches.end()) {
        throw std::logic_error("traverse: no branch for the target product at aspect " +
                               node.aspect);
      }
      at = it->second;
    } else {
      if (entry && entry->interest == Interest::Wanted) {
        auto it = node.branches.find(entry->value);
        at = it != node.branches.end()
                 ? it->second
                 : detail::majority_branch(tree, node, kMissingValue);
      } else if (entry && entry->interest == Interest::Unwanted) {
        at = detail::majority_branch(tree, node, entry->value);
      } else {
        at = detail::majority_branch(tree, node, kMissingValue);
      }
    }
  }
  return steps;
}

struct PlannerConfig {
  TreeConfig tree;
  std::size_t max_steps_per_iteration = 0;  // 0 = full root-to-leaf path
  bool refit_per_step = false;              // refit after every single step
  BranchPolicy branch_policy = BranchPolicy::TargetConsistent;
  std::size_t hint_count = 3;
};

struct PlanIteration {
  std::vector<PlanStep> steps;
  std::map<std::string, std::vector<std::string>> hints;  // aspect -> frequent values
  std::size_t candidate_count = 0;
};

struct IterationTrace {
  std::size_t candidate_count = 0;
  std::vector<std::string> aspects;
  std::map<std::string, std::vector<std::string>> hints;
};

struct PlanResult {
  std::vector<PlanStep> plan_history;
  ProductSet final_set;
  std::vector<IterationTrace> trace;
  bool converged = false;
  std::string stop_reason;  // "converged" | "aspects exhausted"

  bool plan_has_aspect(std::string_view aspect) const {
    const std::string needle = fold_collapse(aspect);
    for (const auto& s : plan_history) {
      if (s.aspect == needle) return true;
    }
    return false;
  }
};

/// Iterative search-and-plan driver. Each next() performs one search
/// iteration: filter the catalog by the revealed prefix, stop when every
/// candidate satisfies the preference, otherwise fit a tree and traverse it
/// into the next chunk of plan steps.
class PlanSession {
 public:
  PlanSession(const Catalog& catalog, const Preference& pref, PlannerConfig cfg = {})
      : catalog_(catalog), pref_(pref), cfg_(cfg) {
    const Product* target = catalog.by_id(pref.target_id);
    if (!target) throw std::invalid_argument("plan: target product not in catalog: " + pref.target_id);
    target_ = target;
    rev_.category = pref.category;
    max_iterations_ = aspect_value_stats(catalog, pref.category).size() + 1;
  }

  std::optional<PlanIteration> next() {
    if (finished_) return std::nullopt;
    ProductSet candidates = filter(catalog_, rev_);
    if (candidates.empty()) {
      throw std::logic_error("plan: candidate set became empty (target retention violated)");
    }
    if (shopgen::converged(candidates, pref_, catalog_)) {
      finish(std::move(candidates), true, "converged");
      return std::nullopt;
    }
    TreeDataset ds = make_dataset(candidates, catalog_, rev_);
    if (ds.feature_space.empty()) {
      finish(std::move(candidates), false, "aspects exhausted");
      return std::nullopt;
    }
    DecisionTree tree = fit_tree(ds, cfg_.tree);
    PlanIteration iter;
    iter.steps = traverse(tree, pref_, *target_, cfg_.branch_policy);
    const std::size_t cap = cfg_.refit_per_step ? 1 : cfg_.max_steps_per_iteration;
    if (cap > 0 && iter.steps.size() > cap) iter.steps.resize(cap);
    if (iter.steps.empty()) {
      finish(std::move(candidates), false, "aspects exhausted");
      return std::nullopt;
    }
    iter.candidate_count = candidates.size();
    IterationTrace trace;
    trace.candidate_count = candidates.size();
    for (const PlanStep& s : iter.steps) {
      iter.hints[s.aspect] = top_values(candidates, catalog_, s.aspect, cfg_.hint_count);
      trace.aspects.push_back(s.aspect);
      result_.plan_history.push_back(s);
      rev_.append(s);
    }
    trace.hints = iter.hints;
    result_.trace.push_back(std::move(trace));
    if (++iterations_ > max_iterations_) {
      throw std::logic_error("plan: iteration guard exceeded");
    }
    return iter;
  }

  bool finished() const { return finished_; }

  const PlanResult& result() const {
    if (!finished_) throw std::logic_error("plan: session still running");
    return result_;
  }

  const Catalog& catalog() const { return catalog_; }
  const Preference& preference() const { return pref_; }
  const Product& target() const { return *target_; }

 private:
  void finish(ProductSet final_set, bool did_converge, std::string reason) {
    result_.final_set = std::move(final_set);
    result_.converged = did_converge;
    result_.stop_reason = std::move(reason);
    finished_ = true;
  }

  const Catalog& catalog_;
  const Preference& pref_;
  PlannerConfig cfg_;
  const Product* target_ = nullptr;
  RevealedPreference rev_;
  PlanResult result_;
  std::size_t iterations_ = 0;
  std::size_t max_iterations_ = 0;
  bool finished_ = false;
};

/// Run the search loop to completion.
inline PlanResult plan_dialogue(const Catalog& catalog, const Preference& pref,
                                const PlannerConfig& cfg = {}) {
  PlanSession session(catalog, pref, cfg);
  while (session.next()) {
  }
  return session.result();
}

}  // namespace shopgen
