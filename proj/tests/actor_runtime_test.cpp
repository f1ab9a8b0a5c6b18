#include <doctest.h>

#include <memory>

#include "mms/actor/runtime.hpp"
#include "mms/model/model.hpp"
#include "support.hpp"

using namespace mms;
using namespace mms::actor;

namespace {

Expr int_lit(std::int64_t v) { return lit(Value(v), std::to_string(v)); }
Expr bool_lit(bool v) { return lit(Value(v), v ? "True" : "False"); }
Expr plus(const std::string& name, std::int64_t k) {
  return fn(name + "+" + std::to_string(k), [name, k](const EvalContext& c) { return Value(c[name].as_int() + k); });
}
Expr equals(const std::string& name, std::int64_t k) {
  return fn(name + "==" + std::to_string(k), [name, k](const EvalContext& c) { return Value(c[name].as_int() == k); });
}

Behavior lock_behavior() {
  Behavior b;
  b.kind = "Lock";
  b.initial_fields.set("unlocked", Value(true));
  b.add("take_lock", {}, {await_(var("unlocked")), assign("unlocked", bool_lit(false))});
  b.add("release", {}, {assign("unlocked", bool_lit(true))});
  return b;
}

Behavior barrier_behavior() {
  Behavior b;
  b.kind = "Barrier";
  b.ctor_params = {"participants"};
  b.add("synchronise", {}, {assign("participants", plus("participants", -1)), await_(equals("participants", 0))});
  return b;
}

// Counts how many clients are inside the critical section.
Behavior room_behavior() {
  Behavior b;
  b.kind = "Room";
  b.initial_fields.set("inside", Value(std::int64_t{0}));
  b.initial_fields.set("peak", Value(std::int64_t{0}));
  b.add("enter", {},
        {assign("inside", plus("inside", 1)),
         assign("peak", fn("max(peak,inside)", [](const EvalContext& c) {
                  return Value(std::max(c["peak"].as_int(), c["inside"].as_int()));
                }))});
  b.add("leave", {}, {assign("inside", plus("inside", -1))});
  return b;
}

Behavior client_behavior() {
  Behavior b;
  b.kind = "Client";
  b.add("work", {},
        {await_call("", var("lock"), "take_lock"), sync_call("", var("room"), "enter"),
         sync_call("", var("room"), "leave"), async_call(var("lock"), "release")});
  return b;
}

Behavior worker_behavior() {
  Behavior b;
  b.kind = "Worker";
  b.initial_fields.set("phase", Value(std::int64_t{0}));
  b.add("go", {},
        {assign("phase", int_lit(1)), await_call("", var("barrier"), "synchronise"), assign("phase", int_lit(2))});
  return b;
}

Behavior counter_behavior() {
  Behavior b;
  b.kind = "Counter";
  b.initial_fields.set("x", Value(std::int64_t{0}));
  b.add("bump", {}, {assign("x", plus("x", 1)), assign("x", plus("x", 1))});
  b.add("get", {}, {return_(var("x"))});
  b.add("ask", {"other"}, {assign("x", plus("x", 1)), sync_call("y", var("other"), "get"), assign("x", var("y"))});
  b.add("loop", {}, {assign("x", plus("x", 1)), async_call(self_ref(), "loop")});
  b.add("inline_twice", {}, {sync_call("", self_ref(), "bump"), sync_call("", self_ref(), "bump")});
  b.add("wait_true", {}, {await_(bool_lit(true)), assign("x", int_lit(7))});
  return b;
}

Behavior pinger_behavior() {
  Behavior b;
  b.kind = "Pinger";
  b.initial_fields.set("x", Value(std::int64_t{0}));
  b.add("start", {}, {assign("x", int_lit(1)), sync_call("", var("peer"), "answer")});
  b.add("answer", {}, {skip()});
  return b;
}

std::shared_ptr<Registry> registry() {
  auto r = std::make_shared<Registry>();
  r->add(lock_behavior());
  r->add(barrier_behavior());
  r->add(room_behavior());
  r->add(client_behavior());
  r->add(worker_behavior());
  r->add(counter_behavior());
  r->add(pinger_behavior());
  return r;
}

World empty_world() {
  World w;
  w.registry = registry();
  return w;
}

const Value& field(const World& w, ObjRef r, const char* name) { return w.object(r).fields.get(name); }

}  // namespace

TEST_CASE("a new lock is unlocked with an empty pool") {
  World w = empty_world();
  const ObjRef l = w.add_object("Lock", {});
  CHECK(field(w, l, "unlocked") == Value(true));
  CHECK(w.object(l).procs.empty());
  CHECK_FALSE(w.object(l).active.has_value());
}

TEST_CASE("a barrier keeps its participant count") {
  World w = empty_world();
  const ObjRef b = w.add_object("Barrier", {{"participants", Value(std::int64_t{3})}});
  CHECK(field(w, b, "participants") == Value(std::int64_t{3}));
}

TEST_CASE("registering a behavior twice fails at registration") {
  Registry r;
  r.add(lock_behavior());
  CHECK_THROWS_AS(r.add(lock_behavior()), std::invalid_argument);
}

TEST_CASE("unknown kinds, methods and objects are rejected") {
  World w = empty_world();
  CHECK_THROWS(w.add_object("Nope", {}));
  const ObjRef c = w.add_object("Counter", {});
  CHECK_THROWS(w.spawn(c, "nope", {}));
  CHECK_THROWS(w.spawn(ObjRef{42}, "bump", {}));
}

TEST_CASE("an async self call queues a fresh process") {
  World w = empty_world();
  const ObjRef c = w.add_object("Counter", {});
  const Pid p = w.spawn(c, "loop", {});
  step(w, {c, p});
  auto fx = step(w, {c, p});
  REQUIRE(fx.spawned.size() == 1);
  CHECK(fx.terminated);
  REQUIRE(w.object(c).procs.size() == 1);
  CHECK(w.object(c).procs.front().pid == fx.spawned.front());
  CHECK_FALSE(w.object(c).procs.front().started);
  CHECK(field(w, c, "x") == Value(std::int64_t{1}));
}

TEST_CASE("lock exclusivity over every interleaving") {
  World w = empty_world();
  const ObjRef lock = w.add_object("Lock", {});
  const ObjRef room = w.add_object("Room", {});
  for (int i = 0; i < 3; ++i) {
    const ObjRef c = w.add_object("Client", {{"lock", Value(lock)}, {"room", Value(room)}});
    w.spawn(c, "work", {});
  }
  const auto reach = explore_fine(w, 200000);
  REQUIRE_FALSE(reach.truncated);
  bool finished = false;
  for (const auto& g : reach.states) {
    REQUIRE(field(g, room, "peak").as_int() <= 1);
    if (all_terminated(g)) {
      finished = true;
      CHECK(field(g, lock, "unlocked") == Value(true));
    }
  }
  CHECK(finished);
}

TEST_CASE("no worker passes the barrier before all arrived") {
  World w = empty_world();
  const ObjRef barrier = w.add_object("Barrier", {{"participants", Value(std::int64_t{3})}});
  std::vector<ObjRef> workers;
  for (int i = 0; i < 3; ++i) {
    workers.push_back(w.add_object("Worker", {{"barrier", Value(barrier)}}));
    w.spawn(workers.back(), "go", {});
  }
  const auto reach = explore_fine(w, 200000);
  REQUIRE_FALSE(reach.truncated);
  bool released = false;
  for (const auto& g : reach.states) {
    bool any_past = false;
    bool all_arrived = true;
    for (auto r : workers) {
      const auto phase = field(g, r, "phase").as_int();
      any_past = any_past || phase == 2;
      all_arrived = all_arrived && phase >= 1;
    }
    if (any_past) REQUIRE(all_arrived);
    released = released || any_past;
  }
  CHECK(released);
}

TEST_CASE("a synchronous call returns the callee's value") {
  World w = empty_world();
  const ObjRef a = w.add_object("Counter", {});
  const ObjRef b = w.add_object("Counter", {{"x", Value(std::int64_t{40})}});
  w.spawn(a, "ask", {Value(b)});
  World g = w;
  for (int i = 0; i < 10 && !all_terminated(g); ++i) g = coarse_step(g, 1).world;
  CHECK(all_terminated(g));
  CHECK(field(g, a, "x") == Value(std::int64_t{40}));
}

TEST_CASE("synchronous self calls run inline") {
  World w = empty_world();
  const ObjRef c = w.add_object("Counter", {});
  w.spawn(c, "inline_twice", {});
  const auto out = coarse_step(w, 0);
  CHECK(out.segment.terminated);
  CHECK(out.segment.kind == SegmentKind::Local);
  CHECK(field(out.world, c, "x") == Value(std::int64_t{4}));
  CHECK(out.world.process_count() == 0);
}

TEST_CASE("objects calling each other synchronously deadlock") {
  World w = empty_world();
  const ObjRef a = w.add_object("Pinger", {});
  const ObjRef b = w.add_object("Pinger", {});
  w.object(a).fields.set("peer", Value(b));
  w.object(b).fields.set("peer", Value(a));
  const Pid pa = w.spawn(a, "start", {});
  const Pid pb = w.spawn(b, "start", {});
  auto first = try_coarse_step(w, {a, pa});
  REQUIRE(first);
  auto second = try_coarse_step(first->world, {b, pb});
  REQUIRE(second);
  const World& g = second->world;
  CHECK(is_stable(g));
  try {
    (void)coarse_step(g, 0);
    FAIL("expected a deadlock");
  } catch (const Deadlock& d) {
    CHECK(d.cycle().size() == 2);
  }
}

TEST_CASE("caller fields changed during a synchronous call are reported") {
  World w = empty_world();
  const ObjRef a = w.add_object("Counter", {});
  const ObjRef b = w.add_object("Counter", {});
  const Pid p = w.spawn(a, "ask", {Value(b)});
  step(w, {a, p});
  auto fx = step(w, {a, p});
  REQUIRE(fx.spawned.size() == 1);
  const Pid callee = fx.spawned.front();
  while (w.object(b).find(callee)) step(w, {b, callee});
  w.object(a).fields.set("x", Value(std::int64_t{99}));
  CHECK_THROWS_AS(step(w, {a, p}), SyncFrameViolation);
}

TEST_CASE("stability of empty, mid-statement and parked states") {
  World w = empty_world();
  CHECK(is_stable(w));
  const ObjRef c = w.add_object("Counter", {});
  const Pid p = w.spawn(c, "bump", {});
  step(w, {c, p});
  CHECK_FALSE(is_stable(w));

  World g = empty_world();
  const ObjRef lock = g.add_object("Lock", {{"unlocked", Value(false)}});
  g.spawn(lock, "take_lock", {});
  CHECK(is_stable(g));
  CHECK_FALSE(is_schedulable(g, g.object(lock), g.object(lock).procs.front()));
}

TEST_CASE("an await whose guard already holds stays schedulable") {
  World w = empty_world();
  const ObjRef c = w.add_object("Counter", {});
  const Pid p = w.spawn(c, "wait_true", {});
  step(w, {c, p});
  CHECK(is_schedulable(w, w.object(c), *w.object(c).find(p)));
}

TEST_CASE("fine step enumeration counts one choice per enabled object") {
  World w = empty_world();
  CHECK(enumerate_fine_steps(w).empty());
  const ObjRef a = w.add_object("Counter", {});
  const ObjRef b = w.add_object("Counter", {});
  w.spawn(a, "bump", {});
  w.spawn(b, "bump", {});
  CHECK(enumerate_fine_steps(w).size() == 2);

  const auto m = model::build_model();
  const auto inst = model::build_initial(m, testing::builtin("S0"));
  CHECK(enumerate_fine_steps(inst.world).size() == 1);
}

TEST_CASE("coarse steps are deterministic in the seed and end stable") {
  const auto m = model::build_model();
  const auto inst = model::build_initial(m, testing::builtin("S1"));
  World g1 = inst.world;
  World g2 = inst.world;
  for (std::uint64_t i = 0; i < 30 && !all_terminated(g1); ++i) {
    auto o1 = coarse_step(g1, i * 7919);
    auto o2 = coarse_step(g2, i * 7919);
    REQUIRE(canonical_key(o1.world) == canonical_key(o2.world));
    REQUIRE(o1.segment.method == o2.segment.method);
    REQUIRE(is_stable(o1.world));
    g1 = std::move(o1.world);
    g2 = std::move(o2.world);
  }
}

TEST_CASE("coarse step kinds: local, rendezvous") {
  World w = empty_world();
  const ObjRef a = w.add_object("Counter", {});
  const ObjRef b = w.add_object("Counter", {});
  w.spawn(a, "ask", {Value(b)});
  auto first = coarse_step(w, 0);
  CHECK(first.segment.kind == SegmentKind::Local);
  CHECK_FALSE(first.segment.terminated);
  auto second = coarse_step(first.world, 0);
  CHECK(second.segment.kind == SegmentKind::Rendezvous);
  CHECK(second.segment.terminated);
  CHECK(second.segment.from_point != 0);
}

TEST_CASE("canonical keys ignore process and object naming") {
  World a = empty_world();
  const ObjRef x1 = a.add_object("Counter", {});
  const ObjRef y1 = a.add_object("Counter", {});
  a.spawn(x1, "bump", {});
  a.spawn(y1, "bump", {});
  World b = empty_world();
  const ObjRef x2 = b.add_object("Counter", {});
  const ObjRef y2 = b.add_object("Counter", {});
  b.spawn(y2, "bump", {});
  b.spawn(x2, "bump", {});
  CHECK(canonical_key(a) == canonical_key(b));
  step(b, {x2, b.object(x2).procs.front().pid});
  CHECK(canonical_key(a) != canonical_key(b));
}

TEST_CASE("diamond: independent updates on two objects commute") {
  World w = empty_world();
  const ObjRef a = w.add_object("Counter", {});
  const ObjRef b = w.add_object("Counter", {});
  w.spawn(a, "bump", {});
  w.spawn(b, "bump", {});
  const auto rep = diamond_check(w, 1000);
  CHECK(rep.failures.empty());
  CHECK(rep.pairs_checked > 0);
}

TEST_CASE("diamond: steps of one object are out of scope") {
  World w = empty_world();
  const ObjRef a = w.add_object("Counter", {});
  w.spawn(a, "bump", {});
  w.spawn(a, "bump", {});
  const auto rep = diamond_check(w, 1000);
  CHECK(rep.pairs_checked == 0);
  CHECK(rep.failures.empty());
}

TEST_CASE("diamond holds over every fine state of S0") {
  const auto m = model::build_model();
  const auto inst = model::build_initial(m, testing::builtin("S0"));
  const auto rep = diamond_check(inst.world, 100000);
  CHECK_FALSE(rep.truncated);
  CHECK(rep.failures.empty());
  CHECK(rep.pairs_checked > 0);
}
