// Cooperative active-object runtime. One process per object runs at a
// time and gives the object up only at await statements or on
// termination. A synchronous call keeps the caller's object held until the
// callee returns.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mms/actor/program.hpp"

namespace mms::actor {

using Pid = std::uint64_t;

struct Frame {
  const Block* block = nullptr;
  std::uint32_t pc = 0;
  bool loop = false;  // ForEach body: rebind loop_var to the next element
  std::string loop_var;
  ValueList loop_rest;
};

struct Activation {
  const Method* method = nullptr;
  Env locals;
  std::vector<Frame> frames;
  std::string result_target;  // caller local receiving an inline call's result
};

struct Process {
  Pid pid = 0;
  std::vector<Activation> stack;  // non-empty while alive
  bool started = false;
  bool has_waiter = false;
  std::optional<Pid> awaiting;  // future of an issued call
  std::uint64_t caller_fields_digest = 0;  // fields at an outstanding sync call

  const Method& method() const { return *stack.front().method; }
  // Statement the process executes next, nullptr when its body is exhausted.
  const Stmt* current() const;
  const Env& locals() const { return stack.back().locals; }
};

struct ObjectState {
  ObjRef oid;
  const Behavior* behavior = nullptr;
  Env fields;
  std::optional<Pid> active;
  std::vector<Process> procs;  // the active process and the suspended pool

  const std::string& kind() const { return behavior->kind; }
  const Process* find(Pid pid) const;
  Process* find(Pid pid);
};

class RuntimeFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The callee returned to a synchronous caller whose object fields changed
// while it was held.
class SyncFrameViolation : public RuntimeFault {
 public:
  using RuntimeFault::RuntimeFault;
};

struct Future {
  Pid pid = 0;
  std::optional<Value> value;
};

struct World {
  std::shared_ptr<const Registry> registry;
  std::vector<ObjectState> objects;  // sorted by oid
  std::vector<Future> futures;       // sorted by pid, only calls with a waiter
  Pid next_pid = 1;
  std::uint32_t next_oid = 0;
  std::uint32_t static_objects = 0;  // oids below this are never collected; add_object raises it

  ObjRef add_object(std::string_view kind, Env fields);
  // Spawn a process without a waiter, as an external async call would.
  Pid spawn(ObjRef target, std::string_view method, std::vector<Value> args);

  const ObjectState& object(ObjRef r) const;
  ObjectState& object(ObjRef r);
  const Future* future(Pid pid) const;
  std::size_t process_count() const;
};

struct StepChoice {
  ObjRef object;
  Pid pid = 0;
  friend bool operator==(const StepChoice&, const StepChoice&) = default;
};

struct StepEffects {
  const Stmt* executed = nullptr;  // nullptr for an exhausted body
  bool terminated = false;
  bool suspended = false;
  Env final_locals;  // bottom activation locals when terminated
  std::vector<Pid> spawned;
};

bool is_schedulable(const World& w, const ObjectState& o, const Process& p);
std::vector<StepChoice> schedulable(const World& w);

// Executes one statement of the chosen process in place.
StepEffects step(World& w, StepChoice choice);

std::vector<std::pair<StepChoice, World>> enumerate_fine_steps(const World& w);

// Canonical text: process ids and dynamically created object ids are
// renamed by traversal order, so states differing only in naming agree.
std::string canonical_key(const World& w);

// Readable multi-line dump for traces and diagnostics.
std::string describe(const World& w);

// No process sits inside a protocol method, every object is idle, and
// every active process is about to issue an external synchronous call.
bool is_stable(const World& w);

enum class SegmentKind { Local, Rendezvous, Broadcast };
std::string_view to_string(SegmentKind k);

// A coarse step: the run of one process from one stable state to the next.
struct Segment {
  ObjRef object;
  Pid pid = 0;
  std::string method;
  std::string from_method;  // method owning the resumption statement
  int from_point = 0;  // statement id the process resumed at, 0 for entry
  std::string from_label;
  Env end_locals;
  Env end_fields;
  SegmentKind kind = SegmentKind::Local;
  std::size_t fine_steps = 0;
  bool terminated = false;
  std::vector<StepChoice> trace;  // fine steps in order
};

struct CoarseOutcome {
  World world;
  Segment segment;
};

// Candidates for the next coarse step, in object then pool order.
std::vector<StepChoice> coarse_candidates(const World& w);

// Runs the candidate to its next stop point; nullopt when it is blocked
// on an object held by a process outside the segment.
std::optional<CoarseOutcome> try_coarse_step(const World& w, StepChoice candidate,
                                             std::size_t fuel = 100000);

std::vector<CoarseOutcome> coarse_successors(const World& w);

class Stuck : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Deadlock : public Stuck {
 public:
  explicit Deadlock(std::vector<ObjRef> cycle);
  const std::vector<ObjRef>& cycle() const { return cycle_; }

 private:
  std::vector<ObjRef> cycle_;
};

// Picks pseudo-randomly among succeeding candidates. Throws Deadlock when
// held objects wait on each other in a cycle, Stuck for any other state
// without a successful candidate.
CoarseOutcome coarse_step(const World& w, std::uint64_t seed);

// Cycle in the graph "held object waits for object", if any.
std::optional<std::vector<ObjRef>> wait_for_cycle(const World& w);

bool all_terminated(const World& w);

struct FineReach {
  std::vector<World> states;  // BFS order
  bool truncated = false;
};

FineReach explore_fine(const World& w0, std::size_t state_bound);

struct DiamondFailure {
  std::size_t state = 0;  // index into the explored states
  StepChoice first;
  StepChoice second;
  std::string detail;
};

struct DiamondReport {
  std::size_t states = 0;
  std::size_t pairs_checked = 0;
  bool truncated = false;
  std::vector<DiamondFailure> failures;
};

// For every reachable state and every pair of steps on distinct objects,
// the two successors have a common successor. Both orders are tried
// first; a step disabled by the other falls back to any common successor.
DiamondReport diamond_check(const World& w0, std::size_t state_bound);

}  // namespace mms::actor
