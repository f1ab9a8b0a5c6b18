// The multicore memory system as active-object behaviors, with the
// transition-rule annotation attached to every stable point.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mms/actor/runtime.hpp"
#include "mms/scenario.hpp"
#include "mms/tss/semantics.hpp"

namespace mms::model {

// Deliberate defects used to check that conformance checking is not vacuous.
enum class Mutation {
  None,
  DropMainInvalidation,   // sendRdX leaves main memory at Sh
  SkipReadHistoryAppend,  // a completed read is not logged
  EvictWithoutInstall,    // an LC-Hit1 swap evicts the victim but never installs n
};

std::string_view to_string(Mutation m);
std::optional<Mutation> mutation_from_string(std::string_view s);
std::vector<Mutation> all_mutations();

struct ModelOptions {
  // Last-level caches install a block only while main memory holds it at Sh,
  // otherwise they re-issue fetchBl. Mirrors tss::Options::require_shared_main.
  bool require_shared_main = true;
  Mutation mutation = Mutation::None;
};

// One "condition : rule" pair. The rule instance takes its address from
// the local `n` and its auxiliary address from `aux` when present.
struct Clause {
  std::string condition;
  std::function<bool(const actor::EvalContext&)> holds;
  tss::RuleName rule = tss::RuleName::PrRd1;
  std::string rule_text;
  std::function<std::int64_t(const actor::EvalContext&)> aux;
};

inline constexpr std::string_view kEntryPoint = "entry";

// Clauses attached to one stable point, tried in order.
struct Annotation {
  std::string kind;
  std::string method;
  std::string point;  // statement label, or kEntryPoint
  bool reconstructed = false;  // derived from prose rather than a listing
  std::vector<Clause> clauses;
};

struct Model {
  std::shared_ptr<const actor::Registry> registry;
  std::vector<Annotation> annotations;
  ModelOptions options;

  const Annotation* annotation(std::string_view kind, std::string_view method, std::string_view point) const;
};

Model build_model(const ModelOptions& options = {});

struct Layout {
  std::uint32_t levels = 1;
  std::uint32_t address_space = 0;
  std::vector<actor::ObjRef> cores;   // index = core number - 1
  std::vector<actor::ObjRef> caches;  // core-major, then level
  actor::ObjRef bus;
  actor::ObjRef main;

  std::optional<tss::Subject> subject_of(actor::ObjRef r) const;
};

struct Instance {
  actor::World world;
  Layout layout;
};

// One Core per pattern with its chain of caches, a Bus over all caches and
// a MainMemory holding every address at Sh. Each core has one pending run.
Instance build_initial(const Model& model, const Scenario& scenario);

// Value encodings shared with the abstraction function.
actor::Value status_value(tss::Status s);
tss::Status status_from_value(const actor::Value& v);
actor::Value task_value(const tss::Task& t);
tss::Task task_from_value(const actor::Value& v);
tss::EventLog log_from_value(const actor::Value& v);
tss::MemoryMap memory_from_value(const actor::Value& v, std::size_t capacity);

}  // namespace mms::model
