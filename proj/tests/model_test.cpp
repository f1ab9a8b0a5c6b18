#include <doctest.h>

#include <set>

#include "mms/actor/runtime.hpp"
#include "mms/model/model.hpp"
#include "support.hpp"

using namespace mms;
using actor::ObjRef;
using actor::Value;
using actor::ValueMap;
using testing::builtin;

namespace {

Value st(tss::Status s) { return model::status_value(s); }

ValueMap mem(std::initializer_list<std::pair<std::int64_t, tss::Status>> es) {
  ValueMap m;
  for (auto [k, s] : es) m = actor::map_put(std::move(m), k, st(s));
  return m;
}

const Value& cache_memory(const actor::World& w, ObjRef r) { return w.object(r).fields.get("cacheMemory"); }

// Drives one process through coarse steps until it terminates.
actor::World finish(actor::World w, ObjRef target, actor::Pid p) {
  while (w.object(target).find(p)) {
    auto out = actor::try_coarse_step(w, {target, p});
    REQUIRE(out.has_value());
    w = std::move(out->world);
  }
  return w;
}

actor::World run(actor::World w, ObjRef target, std::string_view method, std::vector<Value> args) {
  const actor::Pid p = w.spawn(target, method, std::move(args));
  return finish(std::move(w), target, p);
}

actor::World run_core(const model::Instance& inst, actor::World w) {
  const ObjRef core = inst.layout.cores[0];
  return finish(std::move(w), core, w.object(core).procs.front().pid);
}

std::set<std::string> labels(const actor::Method& m) {
  std::set<std::string> out;
  for (std::size_t i = 1; i < m.by_id.size(); ++i) {
    if (!m.by_id[i]->label.empty()) out.insert(m.by_id[i]->label);
  }
  return out;
}

}  // namespace

TEST_CASE("initial instance layout") {
  const auto m = model::build_model();
  for (const auto& name : builtin_scenario_names()) {
    const auto s = builtin(name);
    const auto inst = model::build_initial(m, s);
    CAPTURE(name);
    CHECK(inst.world.objects.size() == s.num_cores + s.num_cores * s.levels + 2);
    CHECK(inst.layout.cores.size() == s.num_cores);
    CHECK(inst.layout.caches.size() == s.num_cores * s.levels);
    CHECK(inst.world.process_count() == s.num_cores);
    const auto& memory = inst.world.object(inst.layout.main).fields.get("memory").as_map();
    CHECK(memory.size() == s.address_space);
    for (const auto& e : memory) CHECK(e.value == st(tss::Status::Sh));
    for (auto c : inst.layout.caches) CHECK(cache_memory(inst.world, c).as_map().empty());
    for (std::uint32_t i = 0; i < s.num_cores; ++i) {
      const auto& f = inst.world.object(inst.layout.cores[i]).fields;
      CHECK(model::task_from_value(f.get("currentTask")) == s.patterns[i]);
      CHECK(f.get("eventLog").as_list().empty());
    }
    CHECK(actor::is_stable(inst.world));
  }
}

TEST_CASE("S1 has eight objects") {
  const auto inst = model::build_initial(model::build_model(), builtin("S1"));
  CHECK(inst.world.objects.size() == 8);
  CHECK(inst.layout.subject_of(inst.layout.caches[3]) == tss::Subject{testing::L(2, 2)});
  CHECK(inst.layout.subject_of(inst.layout.cores[0]) == tss::Subject{testing::C(1)});
  CHECK_FALSE(inst.layout.subject_of(inst.layout.bus).has_value());
}

TEST_CASE("an invalid scenario is rejected") {
  auto s = builtin("S1");
  s.capacities = {1};
  CHECK_THROWS_AS(model::build_initial(model::build_model(), s), std::invalid_argument);
}

TEST_CASE("remove_inv drops only invalid copies") {
  const auto inst = model::build_initial(model::build_model(), builtin("S1"));
  const ObjRef c = inst.layout.caches[0];
  actor::World w = inst.world;
  w.object(c).fields.set("cacheMemory", Value(mem({{0, tss::Status::Inv}, {1, tss::Status::Sh}})));
  w = run(w, c, "remove_inv", {Value(0)});
  CHECK(cache_memory(w, c) == Value(mem({{1, tss::Status::Sh}})));
  w = run(w, c, "remove_inv", {Value(1)});
  CHECK(cache_memory(w, c) == Value(mem({{1, tss::Status::Sh}})));
}

TEST_CASE("swap hands the block out and installs the incoming one") {
  const auto inst = model::build_initial(model::build_model(), builtin("S1"));
  const ObjRef c = inst.layout.caches[1];
  actor::World w = inst.world;
  w.object(c).fields.set("cacheMemory", Value(mem({{0, tss::Status::Sh}})));
  const Value incoming = actor::ctor("Pair", {Value(1), st(tss::Status::Mo)});
  w = run(w, c, "swap", {Value(0), incoming});
  CHECK(cache_memory(w, c) == Value(mem({{1, tss::Status::Mo}})));

  SUBCASE("an invalid copy is never handed out") {
    actor::World g = inst.world;
    g.object(c).fields.set("cacheMemory", Value(mem({{0, tss::Status::Inv}})));
    g = run(g, c, "swap", {Value(0), incoming});
    CHECK(cache_memory(g, c) == Value(mem({{0, tss::Status::Inv}})));
  }
}

TEST_CASE("flush writes a modified block back") {
  const auto inst = model::build_initial(model::build_model(), builtin("S0"));
  const ObjRef c = inst.layout.caches[0];
  actor::World w = inst.world;
  w.object(c).fields.set("cacheMemory", Value(mem({{0, tss::Status::Mo}})));
  w.object(inst.layout.main).fields.set("memory", Value(mem({{0, tss::Status::Inv}})));
  w = run(w, c, "flush", {Value(0)});
  CHECK(cache_memory(w, c) == Value(mem({{0, tss::Status::Sh}})));
  CHECK(w.object(inst.layout.main).fields.get("memory") == Value(mem({{0, tss::Status::Sh}})));
}

TEST_CASE("fetchW waits while the victim is modified") {
  const auto inst = model::build_initial(model::build_model(), builtin("S1"));
  const ObjRef c = inst.layout.caches[1];
  actor::World w = inst.world;
  w.object(c).fields.set("cacheMemory", Value(mem({{1, tss::Status::Mo}})));
  const actor::Pid p = w.spawn(c, "fetchW", {Value(0), Value(1)});
  CHECK_FALSE(actor::is_schedulable(w, w.object(c), *w.object(c).find(p)));
  w.object(c).fields.set("cacheMemory", Value(mem({{1, tss::Status::Sh}})));
  CHECK(actor::is_schedulable(w, w.object(c), *w.object(c).find(p)));
}

TEST_CASE("fetch at the last level broadcasts and queues fetchBl") {
  const auto inst = model::build_initial(model::build_model(), builtin("S0"));
  const ObjRef c = inst.layout.caches[0];
  actor::World w = inst.world;
  const actor::Pid p = w.spawn(c, "fetch", {Value(0)});
  auto out = actor::try_coarse_step(w, {c, p});
  REQUIRE(out);
  CHECK(out->segment.kind == actor::SegmentKind::Broadcast);
  CHECK(out->segment.terminated);
  const auto& procs = out->world.object(c).procs;
  REQUIRE(procs.size() == 1);
  CHECK(procs.front().method().name == "fetchBl");
}

TEST_CASE("fetch below a free slot swaps from the next level") {
  const auto inst = model::build_initial(model::build_model(), builtin("S1"));
  const ObjRef l1 = inst.layout.caches[0];
  const ObjRef l2 = inst.layout.caches[1];
  actor::World w = inst.world;
  w.object(l2).fields.set("cacheMemory", Value(mem({{0, tss::Status::Sh}})));
  w = run(w, l1, "fetch", {Value(0)});
  CHECK(cache_memory(w, l1) == Value(mem({{0, tss::Status::Sh}})));
  CHECK(cache_memory(w, l2).as_map().empty());
}

TEST_CASE("a read hit logs the access and consumes the statement") {
  const auto inst = model::build_initial(model::build_model(), builtin("S0"));
  actor::World w = inst.world;
  w.object(inst.layout.caches[0]).fields.set("cacheMemory", Value(mem({{0, tss::Status::Sh}})));
  const actor::World g = run_core(inst, w);
  const auto& f = g.object(inst.layout.cores[0]).fields;
  CHECK(f.get("currentTask").as_list().empty());
  CHECK(model::log_from_value(f.get("eventLog")).size() == 1);
}

TEST_CASE("a read miss blocks the core on ReadBl") {
  const auto inst = model::build_initial(model::build_model(), builtin("S0"));
  const actor::World g = run_core(inst, inst.world);
  const auto task = model::task_from_value(g.object(inst.layout.cores[0]).fields.get("currentTask"));
  REQUIRE(task.size() == 1);
  CHECK(task.front() == testing::read_bl(0));
  REQUIRE(g.object(inst.layout.caches[0]).procs.size() == 1);
  CHECK(g.object(inst.layout.caches[0]).procs.front().method().name == "fetch");
}

TEST_CASE("method outlines") {
  const auto m = model::build_model();
  const auto& cache = m.registry->behavior("Cache");
  CHECK(actor::outline(cache.method("flush")) ==
        "flush(n)\n"
        "  switch lookup(cacheMemory, n)\n"
        "    case Just(Mo)\n"
        "      mainMemory.setStatus(n, Sh)  [flush.setStatus]\n"
        "      cacheMemory = put(cacheMemory, n, Sh)\n"
        "    case _\n"
        "      skip\n");
  CHECK(actor::outline(cache.method("fetchW")) ==
        "fetchW(n, n_)\n"
        "  await lookupDefault(cacheMemory, n_, In) != Mo\n"
        "  this!fetchBl(n)\n");
  CHECK(actor::outline(m.registry->behavior("Bus").method("sendRdX")).find(") protocol\n") != std::string::npos);
}

TEST_CASE("every annotation names an existing point and every label is annotated") {
  for (bool guard : {true, false}) {
    const auto m = model::build_model({guard, model::Mutation::None});
    std::set<std::pair<std::string, std::string>> annotated;
    for (const auto& a : m.annotations) {
      const auto& method = m.registry->behavior(a.kind).method(a.method);
      if (a.point != model::kEntryPoint) CHECK(labels(method).count(a.point) == 1);
      annotated.insert({a.method, a.point});
      CHECK_FALSE(a.clauses.empty());
    }
    for (const char* kind : {"Core", "Cache"}) {
      for (const auto& [name, method] : m.registry->behavior(kind).methods) {
        for (const auto& l : labels(method)) CHECK(annotated.count({name, l}) == 1);
      }
    }
  }
}

TEST_CASE("annotation table contents") {
  const auto guard = model::build_model();
  const auto paper = model::build_model({false, model::Mutation::None});
  for (const auto& a : guard.annotations) CHECK(a.reconstructed == (a.method == "fetchBl"));

  const auto* read = guard.annotation("Core", "run", "read.remove_inv");
  REQUIRE(read);
  REQUIRE(read->clauses.size() == 2);
  CHECK(read->clauses[0].rule == tss::RuleName::PrRd2);
  CHECK(read->clauses[1].rule == tss::RuleName::PrRd1);

  const auto* g = guard.annotation("Cache", "fetchBl", "fetchBl.main.install");
  const auto* p = paper.annotation("Cache", "fetchBl", "fetchBl.main.install");
  REQUIRE(g);
  REQUIRE(p);
  CHECK(g->clauses.front().condition == "status == Just(Sh)");
  CHECK(p->clauses.front().condition == "true");
  CHECK(guard.annotation("Cache", "fetch", "entry")->clauses.front().rule_text == "LLCMiss/Synch");
  CHECK(guard.annotation("Core", "run", "write.broadcastX")->clauses.front().rule_text == "PrWr2/SynchX");
  CHECK(guard.annotation("Core", "run", "nowhere") == nullptr);
}

TEST_CASE("mutation names round-trip") {
  for (auto mu : model::all_mutations()) CHECK(model::mutation_from_string(model::to_string(mu)) == mu);
  CHECK(model::mutation_from_string("none") == model::Mutation::None);
  CHECK_FALSE(model::mutation_from_string("bogus").has_value());
}

TEST_CASE("value encodings round-trip") {
  for (auto s : {tss::Status::Mo, tss::Status::Sh, tss::Status::Inv}) CHECK(model::status_from_value(st(s)) == s);
  const tss::Task t{testing::read(0), testing::write_bl(3), testing::read_bl(1), testing::write(2)};
  CHECK(model::task_from_value(model::task_value(t)) == t);
  CHECK_THROWS(model::status_from_value(actor::ctor("Xx")));
  const auto mm = model::memory_from_value(Value(mem({{2, tss::Status::Mo}})), 3);
  CHECK(mm == testing::memory(3, {{2, tss::Status::Mo}}));
}

TEST_CASE("zero cores leave only the bus and main memory") {
  const auto inst = model::build_initial(model::build_model(), testing::custom(0, {1}, 1, {}));
  CHECK(inst.world.objects.size() == 2);
  CHECK(actor::all_terminated(inst.world));
}

TEST_CASE("S1 stable states keep main memory at Sh or In and logs as pattern prefixes") {
  const auto m = model::build_model();
  const auto s = builtin("S1");
  const auto inst = model::build_initial(m, s);
  std::vector<actor::World> frontier{inst.world};
  std::set<std::string> seen{actor::canonical_key(inst.world)};
  while (!frontier.empty()) {
    const actor::World g = std::move(frontier.back());
    frontier.pop_back();
    for (const auto& e : g.object(inst.layout.main).fields.get("memory").as_map()) {
      REQUIRE((e.value == st(tss::Status::Sh) || e.value == st(tss::Status::Inv)));
    }
    for (std::size_t c = 0; c < s.num_cores; ++c) {
      const auto log = model::log_from_value(g.object(inst.layout.cores[c]).fields.get("eventLog"));
      REQUIRE(log.size() <= s.patterns[c].size());
      for (std::size_t i = 0; i < log.size(); ++i) {
        REQUIRE(log[i].addr == s.patterns[c][i].addr);
        REQUIRE((log[i].kind == tss::Event::Kind::W) == (s.patterns[c][i].op == tss::RuntimeStmt::Op::Write));
      }
    }
    for (auto& next : actor::coarse_successors(g)) {
      if (seen.insert(actor::canonical_key(next.world)).second) frontier.push_back(std::move(next.world));
    }
  }
  CHECK(seen.size() > 1000);
}
