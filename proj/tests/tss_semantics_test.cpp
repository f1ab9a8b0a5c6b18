#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "mms/scenario.hpp"
#include "mms/tss/semantics.hpp"
#include "support.hpp"

using namespace mms;
using namespace mms::testing;
using tss::DataInstr;
using tss::RuleInstance;
using tss::RuleName;
using tss::Status;

namespace {

// Premises read directly off the rule figures, independent of the engine.
struct PremiseOracle {
  bool require_shared_main = true;

  static std::optional<Status> st(const tss::MemoryMap& m, tss::Address n) { return m.status_of(n); }
  static bool present(const tss::MemoryMap& m, tss::Address n) { return m.status_of(n).has_value(); }
  static bool readable(const tss::MemoryMap& m, tss::Address n) {
    auto s = st(m, n);
    return s == Status::Sh || s == Status::Mo;
  }
  static tss::Address slot_occupant(const tss::MemoryMap& m, tss::Address n) {
    for (const auto& [a, s] : m.entries()) {
      if (a.value % m.capacity() == n.value % m.capacity()) return a;
    }
    return n;
  }

  bool holds(const tss::Configuration& cf, const RuleInstance& ri) const {
    const auto n = ri.addr;
    if (const auto* c = std::get_if<tss::CoreId>(&ri.subject)) {
      if (ri.aux) return false;
      const auto& core = cf.core(*c);
      if (core.task.empty() || core.task.front().addr != n) return false;
      const auto op = core.task.front().op;
      const auto& m = cf.cache(tss::CacheId{*c, 1}).memory;
      using Op = tss::RuntimeStmt::Op;
      switch (ri.rule) {
        case RuleName::PrRd1: return op == Op::Read && readable(m, n);
        case RuleName::PrRd2: return op == Op::Read && !readable(m, n);
        case RuleName::PrRd3: return op == Op::ReadBl && present(m, n);
        case RuleName::PrWr1: return op == Op::Write && st(m, n) == Status::Mo;
        case RuleName::SynchX: return op == Op::Write && st(m, n) == Status::Sh;
        case RuleName::PrWr3: return op == Op::Write && !readable(m, n);
        case RuleName::PrWr4: return op == Op::WriteBl && present(m, n);
        default: return false;
      }
    }
    const auto id = std::get<tss::CacheId>(ri.subject);
    const auto& cache = cf.cache(id);
    const auto& m = cache.memory;
    const bool last = id.level == cf.levels;
    const tss::MemoryMap* next = last ? nullptr : &cf.cache(tss::CacheId{id.core, id.level + 1}).memory;
    const auto has = [&](const DataInstr& d) { return cache.dst.contains(d); };
    const tss::Address victim = slot_occupant(m, n);
    const bool main_ok = !require_shared_main || cf.main.status_of(n) == Status::Sh;
    switch (ri.rule) {
      case RuleName::LCHit1:
        return has(DataInstr::fetch(n)) && next && victim != n && ri.aux == victim && readable(*next, n);
      case RuleName::LCHit2:
        return has(DataInstr::fetch(n)) && next && victim == n && !ri.aux && readable(*next, n);
      case RuleName::LCMiss: return has(DataInstr::fetch(n)) && next && !ri.aux && !readable(*next, n);
      case RuleName::Synch: return has(DataInstr::fetch(n)) && last && !ri.aux;
      case RuleName::FetchBl1:
        return has(DataInstr::fetch_blocked(n)) && last && victim == n && !ri.aux && main_ok;
      case RuleName::FetchBl2:
        return has(DataInstr::fetch_blocked(n)) && last && victim != n && ri.aux == victim &&
               st(m, victim) != Status::Mo && main_ok;
      case RuleName::FetchBl3:
        return has(DataInstr::fetch_blocked(n)) && last && victim != n && ri.aux == victim &&
               st(m, victim) == Status::Mo;
      case RuleName::LCFetchUnblock: return has(DataInstr::fetch_blocked(n)) && next && !ri.aux && present(*next, n);
      case RuleName::FetchW:
        return ri.aux && has(DataInstr::fetch_wait(n, *ri.aux)) && last && st(m, *ri.aux) != Status::Mo;
      case RuleName::Flush1: return has(DataInstr::flush(n)) && !ri.aux && st(m, n) == Status::Mo;
      case RuleName::Flush2: return has(DataInstr::flush(n)) && !ri.aux && st(m, n) != Status::Mo;
      default: return false;
    }
  }

  std::vector<RuleInstance> candidates(const tss::Configuration& cf, std::uint32_t space) const {
    std::vector<RuleInstance> out;
    std::vector<std::optional<tss::Address>> auxes{std::nullopt};
    for (std::uint32_t a = 0; a < space; ++a) auxes.emplace_back(tss::Address{a});
    std::vector<tss::Subject> subjects;
    for (const auto& c : cf.cores) subjects.emplace_back(c.id);
    for (const auto& c : cf.caches) subjects.emplace_back(c.id);
    for (std::size_t r = 0; r < tss::kRuleCount; ++r) {
      for (const auto& s : subjects) {
        for (std::uint32_t a = 0; a < space; ++a) {
          for (const auto& aux : auxes) out.push_back({static_cast<RuleName>(r), s, tss::Address{a}, aux});
        }
      }
    }
    return out;
  }

  std::vector<RuleInstance> enabled(const tss::Configuration& cf, std::uint32_t space) const {
    std::vector<RuleInstance> out;
    for (const auto& ri : candidates(cf, space)) {
      if (holds(cf, ri)) out.push_back(ri);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

tss::Configuration s1_initial() { return initial_configuration(builtin("S1")); }

tss::Configuration single(std::vector<std::uint32_t> caps, std::uint32_t space, tss::Task task) {
  return initial_configuration(custom(1, std::move(caps), space, {std::move(task)}));
}

// Random configuration respecting the slot invariant and the main-memory domain.
tss::Configuration random_configuration(std::mt19937& rng, std::uint32_t space) {
  const std::uint32_t cores = 1 + rng() % 2;
  const std::uint32_t levels = 1 + rng() % 2;
  std::vector<std::uint32_t> caps;
  for (std::uint32_t l = 0; l < levels; ++l) caps.push_back(1 + rng() % 2);
  std::vector<tss::Task> pats(cores);
  auto cf = initial_configuration(custom(cores, caps, space, pats));
  for (auto& c : cf.cores) {
    const auto len = rng() % 3;
    for (std::size_t k = 0; k < len; ++k) {
      c.task.push_back({static_cast<tss::RuntimeStmt::Op>(rng() % 4), tss::Address{static_cast<std::uint32_t>(rng() % space)}});
    }
  }
  for (auto& c : cf.caches) {
    for (std::uint32_t a = 0; a < space; ++a) {
      if (rng() % 3 == 0 && tss::select(c.memory, tss::Address{a}) == tss::Address{a}) {
        c.memory.set(tss::Address{a}, static_cast<Status>(rng() % 3));
      }
    }
    const auto k = rng() % 3;
    for (std::size_t i = 0; i < k; ++i) {
      const tss::Address n{static_cast<std::uint32_t>(rng() % space)};
      switch (rng() % 4) {
        case 0: c.dst.add(DataInstr::fetch(n)); break;
        case 1: c.dst.add(DataInstr::fetch_blocked(n)); break;
        case 2: c.dst.add(DataInstr::flush(n)); break;
        default:
          if (c.id.level == levels) {
            const tss::Address m{(n.value + 1) % space};
            if (m != n) c.dst.add(DataInstr::fetch_wait(n, m));
          }
      }
    }
  }
  for (std::uint32_t a = 0; a < space; ++a) cf.main.set(tss::Address{a}, rng() % 2 ? Status::Sh : Status::Inv);
  return cf;
}

std::set<std::string> changed_components(const tss::Configuration& a, const tss::Configuration& b) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < a.cores.size(); ++i) {
    if (!(a.cores[i] == b.cores[i])) out.insert(tss::to_string(a.cores[i].id));
  }
  for (std::size_t i = 0; i < a.caches.size(); ++i) {
    if (!(a.caches[i] == b.caches[i])) out.insert(tss::to_string(a.caches[i].id));
  }
  if (!(a.main == b.main)) out.insert("main");
  return out;
}

bool is_prefix(const tss::EventLog& p, const tss::EventLog& h) {
  return p.size() <= h.size() && std::equal(p.begin(), p.end(), h.begin());
}

bool log_is_pattern_prefix(const tss::CoreState& c, const tss::Task& pattern) {
  if (c.log.size() > pattern.size()) return false;
  for (std::size_t k = 0; k < c.log.size(); ++k) {
    const bool r = c.log[k].kind == tss::Event::Kind::R;
    if (r != (pattern[k].op == tss::RuntimeStmt::Op::Read) || c.log[k].addr != pattern[k].addr) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("rule names round-trip through text") {
  for (std::size_t r = 0; r < tss::kRuleCount; ++r) {
    const auto name = static_cast<RuleName>(r);
    CHECK(tss::rule_from_string(tss::to_string(name)) == name);
  }
  CHECK_FALSE(tss::rule_from_string("NoSuchRule").has_value());
}

TEST_CASE("enabled: a shared L1 copy enables a read hit") {
  auto cf = single({1}, 1, {read(0)});
  cf.caches[0].memory.set(A(0), Status::Sh);
  const auto en = tss::enabled(cf);
  CHECK(std::find(en.begin(), en.end(), RuleInstance{RuleName::PrRd1, C(1), A(0), {}}) != en.end());
}

TEST_CASE("enabled: nothing to do yields no rules") {
  auto cf = single({1}, 1, {});
  CHECK(tss::enabled(cf).empty());
  CHECK(tss::successors(cf).empty());
}

TEST_CASE("enabled: a last-level fetch is a read broadcast") {
  auto cf = single({1, 2}, 2, {});
  cf.caches[1].dst.add(DataInstr::fetch(A(1)));
  const auto en = tss::enabled(cf);
  REQUIRE(en.size() == 1);
  CHECK(en[0] == RuleInstance{RuleName::Synch, L(1, 2), A(1), {}});
}

TEST_CASE("enabled agrees with the premise oracle on the S1 initial configuration") {
  const auto cf = s1_initial();
  const PremiseOracle oracle;
  const auto want = oracle.enabled(cf, 2);
  CHECK(tss::enabled(cf) == want);
  CHECK(tss::successors(cf).size() == want.size());
  CHECK(want == std::vector<RuleInstance>{{RuleName::PrRd2, C(1), A(0), {}}, {RuleName::PrWr3, C(2), A(0), {}}});
}

TEST_CASE("enabled agrees with the premise oracle on every state reachable from S1") {
  tss::ExploreOptions eo;
  const auto rep = tss::explore(s1_initial(), eo);
  const PremiseOracle oracle;
  for (const auto& cf : rep.states) {
    REQUIRE(tss::enabled(cf) == oracle.enabled(cf, 2));
  }
}

TEST_CASE("enabled agrees with the premise oracle on random configurations in both guard modes") {
  std::mt19937 rng(77);
  for (bool guard : {true, false}) {
    tss::Options opts;
    opts.require_shared_main = guard;
    PremiseOracle oracle;
    oracle.require_shared_main = guard;
    for (int trial = 0; trial < 400; ++trial) {
      const auto cf = random_configuration(rng, 3);
      REQUIRE(tss::enabled(cf, opts) == oracle.enabled(cf, 3));
    }
  }
}

TEST_CASE("apply succeeds exactly on enabled instances") {
  std::mt19937 rng(91);
  const PremiseOracle oracle;
  for (int trial = 0; trial < 150; ++trial) {
    const auto cf = random_configuration(rng, 2);
    const auto en = tss::enabled(cf);
    for (const auto& ri : oracle.candidates(cf, 2)) {
      const bool is_enabled = std::binary_search(en.begin(), en.end(), ri);
      if (is_enabled) {
        CHECK_NOTHROW((void)tss::apply(cf, ri));
        CHECK_FALSE(tss::failing_premise(cf, ri).has_value());
      } else {
        CHECK_THROWS_AS((void)tss::apply(cf, ri), tss::PreconditionError);
        CHECK(tss::failing_premise(cf, ri).has_value());
      }
    }
  }
}

TEST_CASE("PrRd1 consumes the read and logs it") {
  auto cf = single({1}, 1, {read(0)});
  cf.caches[0].memory.set(A(0), Status::Sh);
  const auto next = tss::apply(cf, {RuleName::PrRd1, C(1), A(0), {}});
  CHECK(next.cores[0].task.empty());
  CHECK(tss::to_string(next.cores[0].log) == "[R(c1,0)]");
  CHECK(tss::to_string(next.history) == "[R(c1,0)]");
  CHECK(next.caches[0] == cf.caches[0]);
}

TEST_CASE("PrRd2 blocks the read and issues a fetch") {
  auto cf = single({1}, 1, {read(0)});
  const auto next = tss::apply(cf, {RuleName::PrRd2, C(1), A(0), {}});
  CHECK(next.cores[0].task == tss::Task{read_bl(0)});
  CHECK(next.cores[0].log.empty());
  CHECK(next.caches[0].dst.contains(DataInstr::fetch(A(0))));
  CHECK(next.caches[0].memory == cf.caches[0].memory);
}

TEST_CASE("PrRd2 drops an invalid copy") {
  auto cf = single({1}, 1, {read(0)});
  cf.caches[0].memory.set(A(0), Status::Inv);
  const auto next = tss::apply(cf, {RuleName::PrRd2, C(1), A(0), {}});
  CHECK_FALSE(next.caches[0].memory.contains(A(0)));
}

TEST_CASE("Flush2 discards a flush of a non-modified block") {
  auto cf = single({1}, 1, {});
  cf.caches[0].memory.set(A(0), Status::Sh);
  cf.caches[0].dst.add(DataInstr::flush(A(0)));
  const auto next = tss::apply(cf, {RuleName::Flush2, L(1, 1), A(0), {}});
  CHECK(next.caches[0].dst.empty());
  CHECK(next.caches[0].memory == cf.caches[0].memory);
}

TEST_CASE("Flush1 writes back to main memory") {
  auto cf = single({1}, 1, {});
  cf.caches[0].memory.set(A(0), Status::Mo);
  cf.main.set(A(0), Status::Inv);
  cf.caches[0].dst.add(DataInstr::flush(A(0)));
  const auto next = tss::apply(cf, {RuleName::Flush1, L(1, 1), A(0), {}});
  CHECK(next.caches[0].memory.status_of(A(0)) == Status::Sh);
  CHECK(next.main.status_of(A(0)) == Status::Sh);
}

TEST_CASE("apply names the failing premise") {
  auto cf = single({1}, 1, {read(0)});
  try {
    (void)tss::apply(cf, {RuleName::PrRd1, C(1), A(0), {}});
    FAIL("expected a precondition error");
  } catch (const tss::PreconditionError& e) {
    CHECK(std::string(e.what()).find("PrRd1") != std::string::npos);
  }
}

TEST_CASE("read broadcast queues a flush at the modified holder") {
  auto cf = initial_configuration(custom(2, {1, 2}, 1, {{}, {}}));
  cf.caches[3].memory.set(A(0), Status::Mo);  // c2.L2
  cf.caches[1].dst.add(DataInstr::fetch(A(0)));  // c1.L2
  const auto next = tss::apply_broadcast_rd(cf, L(1, 2), A(0));
  CHECK(next.caches[1].dst.items() == std::vector<DataInstr>{DataInstr::fetch_blocked(A(0))});
  CHECK(next.caches[3].dst.items() == std::vector<DataInstr>{DataInstr::flush(A(0))});
  CHECK(changed_components(cf, next) == std::set<std::string>{"c1.L2", "c2.L2"});
  CHECK(next.main == cf.main);
}

TEST_CASE("read broadcast without a modified holder changes only the emitter") {
  auto cf = initial_configuration(custom(2, {1, 2}, 1, {{}, {}}));
  cf.caches[3].memory.set(A(0), Status::Sh);
  cf.caches[1].dst.add(DataInstr::fetch(A(0)));
  const auto next = tss::apply_broadcast_rd(cf, L(1, 2), A(0));
  CHECK(changed_components(cf, next) == std::set<std::string>{"c1.L2"});
}

TEST_CASE("read broadcast on a single core has no recipients") {
  auto cf = single({1}, 1, {});
  cf.caches[0].dst.add(DataInstr::fetch(A(0)));
  const auto next = tss::apply_broadcast_rd(cf, L(1, 1), A(0));
  CHECK(next.caches[0].dst.items() == std::vector<DataInstr>{DataInstr::fetch_blocked(A(0))});
}

TEST_CASE("exclusive broadcast invalidates every other shared copy") {
  auto cf = initial_configuration(custom(2, {1, 2}, 1, {{write(0)}, {}}));
  cf.caches[0].memory.set(A(0), Status::Sh);
  cf.caches[2].memory.set(A(0), Status::Sh);
  cf.caches[3].memory.set(A(0), Status::Sh);
  const auto next = tss::apply_broadcast_rdx(cf, C(1), A(0));
  CHECK(next.cores[0].task.empty());
  CHECK(tss::to_string(next.cores[0].log) == "[W(c1,0)]");
  CHECK(next.caches[0].memory.status_of(A(0)) == Status::Mo);
  CHECK(next.caches[2].memory.status_of(A(0)) == Status::Inv);
  CHECK(next.caches[3].memory.status_of(A(0)) == Status::Inv);
  CHECK(next.main.status_of(A(0)) == Status::Inv);
}

TEST_CASE("exclusive broadcast leaves invalid copies alone") {
  auto cf = initial_configuration(custom(2, {1, 2}, 1, {{write(0)}, {}}));
  cf.caches[0].memory.set(A(0), Status::Sh);
  cf.caches[2].memory.set(A(0), Status::Inv);
  const auto next = tss::apply_broadcast_rdx(cf, C(1), A(0));
  CHECK(next.caches[2] == cf.caches[2]);
  CHECK(next.caches[3] == cf.caches[3]);
  CHECK(next.main.status_of(A(0)) == Status::Inv);
}

TEST_CASE("exclusive broadcast on a single core") {
  auto cf = single({1}, 1, {write(0)});
  cf.caches[0].memory.set(A(0), Status::Sh);
  const auto next = tss::apply_broadcast_rdx(cf, C(1), A(0));
  CHECK(next.caches[0].memory.status_of(A(0)) == Status::Mo);
  CHECK(next.main.status_of(A(0)) == Status::Inv);
}

TEST_CASE("explore of a terminal configuration is that configuration") {
  const auto cf = single({1}, 1, {});
  const auto rep = tss::explore(cf);
  REQUIRE(rep.states.size() == 1);
  CHECK(rep.terminals == std::vector<std::size_t>{0});
  CHECK_FALSE(rep.truncated);
}

TEST_CASE("S0 terminates with the read logged and nothing pending") {
  const auto rep = tss::explore(initial_configuration(builtin("S0")));
  REQUIRE_FALSE(rep.terminals.empty());
  for (auto i : rep.terminals) {
    const auto& cf = rep.states[i];
    CHECK(cf.cores[0].task.empty());
    for (const auto& c : cf.caches) CHECK(c.dst.empty());
    CHECK(tss::to_string(cf.history) == "[R(c1,0)]");
  }
}

TEST_CASE("explore is deterministic and honours the state bound") {
  tss::ExploreOptions eo;
  const auto a = tss::explore(s1_initial(), eo);
  const auto b = tss::explore(s1_initial(), eo);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) CHECK(tss::canonical_text(a.states[i]) == tss::canonical_text(b.states[i]));
  eo.state_bound = 10;
  const auto c = tss::explore(s1_initial(), eo);
  CHECK(c.truncated);
  CHECK(c.states.size() == 10);
}

TEST_CASE("check_msi flags a doubly modified block and accepts empty caches") {
  auto cf = initial_configuration(custom(2, {1}, 1, {{}, {}}));
  CHECK(tss::check_msi(cf).empty());
  cf.caches[0].memory.set(A(0), Status::Mo);
  cf.caches[1].memory.set(A(0), Status::Mo);
  cf.main.set(A(0), Status::Inv);
  const auto v = tss::check_msi(cf);
  REQUIRE_FALSE(v.empty());
  CHECK(v.front().find('0') != std::string::npos);
}

TEST_CASE("S1 reachable states satisfy MSI, the frame property and history monotonicity") {
  tss::ExploreOptions eo;
  eo.record_edges = true;
  const auto rep = tss::explore(s1_initial(), eo);
  CHECK_FALSE(rep.truncated);
  for (const auto& cf : rep.states) {
    REQUIRE(tss::check_msi(cf).empty());
    REQUIRE(tss::well_formedness_problem(cf).empty());
    for (const auto& c : cf.caches) REQUIRE(tss::slot_invariant_holds(c.memory));
  }
  for (const auto& e : rep.edges) {
    const auto& a = rep.states[e.from];
    const auto& b = rep.states[e.to];
    // Stored states carry the history of their first visit, so recompute.
    const auto direct = tss::apply(a, e.rule);
    CHECK(direct == b);
    CHECK(is_prefix(a.history, direct.history));
    const auto changed = changed_components(a, b);
    std::set<std::string> allowed;
    switch (e.rule.rule) {
      case RuleName::PrRd1:
      case RuleName::PrRd2:
      case RuleName::PrRd3:
      case RuleName::PrWr1:
      case RuleName::PrWr3:
      case RuleName::PrWr4: {
        const auto c = std::get<tss::CoreId>(e.rule.subject);
        allowed = {tss::to_string(c), tss::to_string(tss::CacheId{c, 1})};
        break;
      }
      case RuleName::LCHit1:
      case RuleName::LCHit2:
      case RuleName::LCMiss: {
        const auto j = std::get<tss::CacheId>(e.rule.subject);
        allowed = {tss::to_string(j), tss::to_string(tss::CacheId{j.core, j.level + 1})};
        break;
      }
      case RuleName::Flush1: allowed = {tss::to_string(e.rule.subject), "main"}; break;
      case RuleName::Synch:
      case RuleName::SynchX:
        CHECK(changed.count(tss::to_string(e.rule.subject)) == 1);
        continue;
      default: allowed = {tss::to_string(e.rule.subject)};
    }
    for (const auto& x : changed) CHECK_MESSAGE(allowed.count(x) == 1, tss::to_string(e.rule) << " changed " << x);
  }
}

TEST_CASE("no read or write hit observes a block modified by another core") {
  for (const char* name : {"S1", "S2", "S3"}) {
    tss::ExploreOptions eo;
    eo.record_edges = true;
    const auto rep = tss::explore(initial_configuration(builtin(name)), eo);
    for (const auto& e : rep.edges) {
      if (e.rule.rule != RuleName::PrRd1 && e.rule.rule != RuleName::PrWr1) continue;
      const auto c = std::get<tss::CoreId>(e.rule.subject);
      for (const auto& cache : rep.states[e.from].caches) {
        if (cache.id.core != c) CHECK(cache.memory.status_of(e.rule.addr) != Status::Mo);
      }
    }
  }
}

TEST_CASE("core logs stay prefixes of their patterns") {
  for (const char* name : {"S1", "S2", "S3"}) {
    const Scenario s = builtin(name);
    const auto rep = tss::explore(initial_configuration(s));
    for (const auto& cf : rep.states) {
      for (std::size_t i = 0; i < cf.cores.size(); ++i) REQUIRE(log_is_pattern_prefix(cf.cores[i], s.patterns[i]));
    }
  }
}

TEST_CASE("terminals either complete in program order or wait on main memory held invalid") {
  for (const char* name : {"S0", "S1flat", "S1", "S2", "S3"}) {
    const Scenario s = builtin(name);
    const auto rep = tss::explore(initial_configuration(s));
    for (auto i : rep.terminals) {
      const auto& cf = rep.states[i];
      bool complete = true;
      for (std::size_t c = 0; c < cf.cores.size(); ++c) complete = complete && cf.cores[c].log.size() == s.patterns[c].size();
      if (complete) continue;
      bool waits_on_main = false;
      for (const auto& cache : cf.caches) {
        for (const auto& d : cache.dst.items()) {
          if (d.kind == DataInstr::Kind::FetchB && cache.id.level == s.levels &&
              cf.main.status_of(d.addr) == Status::Inv) {
            waits_on_main = true;
          }
        }
      }
      CAPTURE(name);
      CHECK(waits_on_main);
    }
  }
  const auto s0 = tss::explore(initial_configuration(builtin("S0")));
  CHECK(s0.terminals.size() == 1);
}

TEST_CASE("without the main-memory guard a modified-then-read block can be installed invalid") {
  auto cf = initial_configuration(custom(1, {1}, 1, {{}}));
  cf.main.set(A(0), Status::Inv);
  cf.caches[0].dst.add(DataInstr::fetch_blocked(A(0)));
  CHECK(tss::enabled(cf).empty());
  tss::Options paper;
  paper.require_shared_main = false;
  const auto en = tss::enabled(cf, paper);
  REQUIRE(en.size() == 1);
  const auto next = tss::apply(cf, en[0], paper);
  CHECK(next.caches[0].memory.status_of(A(0)) == Status::Inv);
}
