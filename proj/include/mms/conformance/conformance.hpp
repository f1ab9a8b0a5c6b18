// Relating the actor model to the transition system: the abstraction
// function, per-step simulation checking, and bounded bisimulation.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mms/actor/runtime.hpp"
#include "mms/model/model.hpp"
#include "mms/scenario.hpp"
#include "mms/tss/semantics.hpp"

namespace mms::conformance {

class AlphaError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Defined on stable states only. History is the concatenation of the core
// logs in core order; comparisons rely on the per-core logs.
tss::Configuration alpha(const actor::World& g, const model::Layout& layout);

tss::Options tss_options(const model::Model& m);

struct Classification {
  const model::Annotation* annotation = nullptr;
  const model::Clause* clause = nullptr;
  std::optional<tss::RuleInstance> rule;  // empty for a silent step
};

// Throws std::logic_error when two clauses of one annotation hold at once.
Classification classify(const actor::Segment& seg, std::string_view kind, const model::Model& m,
                        const model::Layout& layout);

struct Verdict {
  enum class Kind { Silent, RuleApplied, Violation };
  Kind kind = Kind::Silent;
  std::optional<tss::RuleInstance> rule;
  std::string clause;  // "condition : rule" that matched
  std::string reason;
  std::string before;    // canonical text of alpha(G)
  std::string after;     // canonical text of alpha(G')
  std::string expected;  // canonical text of the rule's result
};

std::string_view to_string(Verdict::Kind k);

Verdict check_coarse_step(const actor::World& before, const actor::World& after, const actor::Segment& seg,
                          const model::Model& m, const model::Layout& layout);

// No cache outside core c holds n at Mo.
std::optional<tss::CacheId> foreign_modified_holder(const tss::Configuration& cf, tss::CoreId c, tss::Address n);

// First core whose log, read as accesses, differs from its pattern.
std::optional<std::string> program_order_violation(const tss::Configuration& cf, const Scenario& s);

struct StepRecord {
  std::size_t index = 0;
  std::string object;  // subject name, or kind#oid for other objects
  std::string method;
  std::string point;
  actor::SegmentKind kind = actor::SegmentKind::Local;
  std::size_t fine_steps = 0;
  Verdict verdict;
  std::string alpha_before;  // digests
  std::string alpha_after;
  std::string env;  // end environment text
};

struct SimReport {
  std::size_t steps = 0;
  std::size_t silents = 0;
  std::map<tss::RuleName, std::size_t> rule_counts;
  std::vector<Verdict> violations;
  std::size_t fine_steps = 0;
  bool terminated = false;  // every process finished
  std::string stuck;        // diagnostic when no coarse step was possible
  std::size_t stale_accesses = 0;  // reads or writes while another core held the block modified
  tss::Configuration final_alpha;
};

struct SimOptions {
  std::uint64_t seed = 0;
  std::size_t max_steps = 100000;       // coarse steps
  std::size_t max_fine_steps = SIZE_MAX;
  std::function<void(const StepRecord&)> on_step;
};

// Derived per-step scheduler seed.
std::uint64_t step_seed(std::uint64_t seed, std::size_t step);

SimReport check_simulation(const model::Model& m, const Scenario& s, const SimOptions& opts);

// Stable states reachable under every scheduler choice.
struct StableGraph {
  std::vector<actor::World> states;  // BFS order, states[0] is the start
  std::vector<tss::Configuration> alphas;
  std::vector<std::string> alpha_text;
  std::vector<std::vector<std::size_t>> succ;
  std::vector<std::size_t> depth;
  bool truncated = false;
};

StableGraph explore_stable(const actor::World& g0, const model::Layout& layout, std::size_t state_bound,
                           std::size_t depth_bound = SIZE_MAX);

// Alpha images of states from which no path ever changes alpha: the
// actor-side counterpart of terminal TSS configurations.
std::vector<std::string> quiescent_alphas(const StableGraph& g);

struct BisimMiss {
  std::size_t state = 0;
  tss::RuleInstance rule;
  std::string alpha;
  std::string target;
};

struct BisimReport {
  std::size_t states = 0;
  std::size_t obligations = 0;
  std::vector<BisimMiss> missing;
  bool truncated = false;
};

// For every TSS successor of alpha(states[i]), a state with that alpha is
// reachable from states[i] within depth_bound coarse steps.
BisimReport check_bisimulation(const StableGraph& g, const tss::Options& opts, std::size_t depth_bound,
                               const std::vector<std::size_t>& which = {});

// The single-state form: explores from g to depth_bound and checks g alone.
BisimReport check_bisimulation(const actor::World& g, const model::Model& m, const model::Layout& layout,
                               std::size_t depth_bound);

}  // namespace mms::conformance
