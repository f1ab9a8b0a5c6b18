#include "mms/tss/semantics.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <unordered_map>

namespace mms::tss {

namespace {

constexpr std::array<std::string_view, kRuleCount> kRuleNames = {
    "PrRd1",     "PrRd2",          "PrRd3",   "PrWr1",
    "PrWr2",     "PrWr3",          "PrWr4",   "LCHit1",
    "LCHit2",    "LCMiss",         "LLCMiss", "FetchBl1",
    "FetchBl2",  "FetchBl3",       "LCFetchUnblock", "FetchW",
    "Flush1",    "Flush2",         "InvalidateOneLine", "IgnoreInvalidateOneLine",
    "FlushOneLine", "IgnoreFlushOneLine", "Synch", "SynchDist",
    "SynchX",    "SynchDistX",
};

std::string addr_text(Address a) { return std::to_string(a.value); }

bool shared_or_modified(std::optional<Status> s) { return s == Status::Sh || s == Status::Mo; }

// Premise failures are returned as text; nullopt means the premise holds.
using Failure = std::optional<std::string>;

struct CoreView {
  const CoreState* core = nullptr;
  const CacheState* l1 = nullptr;
};

Failure resolve_core(const Configuration& cf, const RuleInstance& ri, CoreView& out) {
  const auto* c = std::get_if<CoreId>(&ri.subject);
  if (!c) return std::string(to_string(ri.rule)) + ": subject must be a core";
  auto it = std::find_if(cf.cores.begin(), cf.cores.end(), [&](const CoreState& s) { return s.id == *c; });
  if (it == cf.cores.end()) return std::string(to_string(ri.rule)) + ": no core " + to_string(*c);
  out.core = &*it;
  out.l1 = &cf.cache(CacheId{*c, 1});
  return std::nullopt;
}

Failure head_is(const RuleInstance& ri, const CoreView& v, RuntimeStmt::Op op) {
  const RuntimeStmt want{op, ri.addr};
  if (v.core->task.empty() || v.core->task.front() != want) {
    return std::string(to_string(ri.rule)) + ": task head is not " + to_string(want);
  }
  return std::nullopt;
}

struct CacheView {
  const CacheState* cache = nullptr;
  const CacheState* next = nullptr;  // null at the last level
  bool last = false;
};

Failure resolve_cache(const Configuration& cf, const RuleInstance& ri, CacheView& out) {
  const auto* id = std::get_if<CacheId>(&ri.subject);
  if (!id) return std::string(to_string(ri.rule)) + ": subject must be a cache";
  if (!cf.has_cache(*id)) return std::string(to_string(ri.rule)) + ": no cache " + to_string(*id);
  out.cache = &cf.cache(*id);
  out.last = cache_position(*id, cf.levels).is_last;
  out.next = out.last ? nullptr : &cf.cache(CacheId{id->core, id->level + 1});
  return std::nullopt;
}

Failure needs_instr(const RuleInstance& ri, const CacheView& v, const DataInstr& d) {
  if (!v.cache->dst.contains(d)) {
    return std::string(to_string(ri.rule)) + ": " + to_string(d) + " not in dst of " + to_string(v.cache->id);
  }
  return std::nullopt;
}

Failure needs_level(const RuleInstance& ri, const CacheView& v, bool last) {
  if (v.last != last) {
    return std::string(to_string(ri.rule)) + ": " + to_string(v.cache->id) +
           (last ? " is not the last level" : " is the last level");
  }
  return std::nullopt;
}

Failure needs_aux(const RuleInstance& ri, bool wanted) {
  if (ri.aux.has_value() != wanted) {
    return std::string(to_string(ri.rule)) + (wanted ? ": missing aux address" : ": unexpected aux address");
  }
  return std::nullopt;
}

Failure premise_core(const Configuration& cf, const RuleInstance& ri) {
  CoreView v;
  if (auto f = resolve_core(cf, ri, v)) return f;
  if (auto f = needs_aux(ri, false)) return f;
  const auto status = v.l1->memory.status_of(ri.addr);
  const std::string name(to_string(ri.rule));
  switch (ri.rule) {
    case RuleName::PrRd1:
      if (auto f = head_is(ri, v, RuntimeStmt::Op::Read)) return f;
      if (!shared_or_modified(status)) return name + ": status_of(L1, n) not in {Sh, Mo}";
      return std::nullopt;
    case RuleName::PrRd2:
      if (auto f = head_is(ri, v, RuntimeStmt::Op::Read)) return f;
      if (shared_or_modified(status)) return name + ": status_of(L1, n) not in {In, undefined}";
      return std::nullopt;
    case RuleName::PrRd3:
      if (auto f = head_is(ri, v, RuntimeStmt::Op::ReadBl)) return f;
      if (!status) return name + ": n not in dom(L1)";
      return std::nullopt;
    case RuleName::PrWr1:
      if (auto f = head_is(ri, v, RuntimeStmt::Op::Write)) return f;
      if (status != Status::Mo) return name + ": status_of(L1, n) != Mo";
      return std::nullopt;
    case RuleName::SynchX:
      if (auto f = head_is(ri, v, RuntimeStmt::Op::Write)) return f;
      if (status != Status::Sh) return name + ": status_of(L1, n) != Sh";
      return std::nullopt;
    case RuleName::PrWr3:
      if (auto f = head_is(ri, v, RuntimeStmt::Op::Write)) return f;
      if (shared_or_modified(status)) return name + ": status_of(L1, n) not in {In, undefined}";
      return std::nullopt;
    case RuleName::PrWr4:
      if (auto f = head_is(ri, v, RuntimeStmt::Op::WriteBl)) return f;
      if (!status) return name + ": n not in dom(L1)";
      return std::nullopt;
    default:
      return name + ": not a core rule";
  }
}

Failure premise_cache(const Configuration& cf, const RuleInstance& ri, const Options& opts) {
  CacheView v;
  if (auto f = resolve_cache(cf, ri, v)) return f;
  const std::string name(to_string(ri.rule));
  const Address n = ri.addr;
  const MemoryMap& mem = v.cache->memory;
  switch (ri.rule) {
    case RuleName::LCHit1:
    case RuleName::LCHit2:
    case RuleName::LCMiss: {
      if (auto f = needs_level(ri, v, false)) return f;
      if (auto f = needs_aux(ri, ri.rule == RuleName::LCHit1)) return f;
      if (auto f = needs_instr(ri, v, DataInstr::fetch(n))) return f;
      const auto below = v.next->memory.status_of(n);
      if (ri.rule == RuleName::LCMiss) {
        if (shared_or_modified(below)) return name + ": next level holds n at Sh or Mo";
        return std::nullopt;
      }
      if (!shared_or_modified(below)) return name + ": next level status of n not in {Sh, Mo}";
      const Address sel = select(mem, n, opts.placement);
      if (ri.rule == RuleName::LCHit2) {
        if (sel != n) return name + ": select(M, n) != n";
        return std::nullopt;
      }
      if (sel == n) return name + ": select(M, n) = n";
      if (sel != *ri.aux) return name + ": select(M, n) != " + addr_text(*ri.aux);
      if (!mem.contains(sel)) return name + ": victim not resident";
      return std::nullopt;
    }
    case RuleName::Synch:
      if (auto f = needs_level(ri, v, true)) return f;
      if (auto f = needs_aux(ri, false)) return f;
      return needs_instr(ri, v, DataInstr::fetch(n));
    case RuleName::FetchBl1:
    case RuleName::FetchBl2:
    case RuleName::FetchBl3: {
      if (auto f = needs_level(ri, v, true)) return f;
      if (auto f = needs_aux(ri, ri.rule != RuleName::FetchBl1)) return f;
      if (auto f = needs_instr(ri, v, DataInstr::fetch_blocked(n))) return f;
      const Address sel = select(mem, n, opts.placement);
      if (ri.rule == RuleName::FetchBl1) {
        if (sel != n) return name + ": select(M, n) != n";
      } else {
        if (sel == n) return name + ": select(M, n) = n";
        if (sel != *ri.aux) return name + ": select(M, n) != " + addr_text(*ri.aux);
        const bool victim_modified = mem.status_of(sel) == Status::Mo;
        if (ri.rule == RuleName::FetchBl2 && victim_modified) return name + ": victim is Mo";
        if (ri.rule == RuleName::FetchBl3 && !victim_modified) return name + ": victim is not Mo";
      }
      if (ri.rule != RuleName::FetchBl3 && opts.require_shared_main && cf.main.status_of(n) != Status::Sh) {
        return name + ": main memory does not hold n at Sh";
      }
      return std::nullopt;
    }
    case RuleName::LCFetchUnblock:
      if (auto f = needs_level(ri, v, false)) return f;
      if (auto f = needs_aux(ri, false)) return f;
      if (auto f = needs_instr(ri, v, DataInstr::fetch_blocked(n))) return f;
      if (!v.next->memory.contains(n)) return name + ": n not in dom of next level";
      return std::nullopt;
    case RuleName::FetchW:
      if (auto f = needs_level(ri, v, true)) return f;
      if (auto f = needs_aux(ri, true)) return f;
      if (auto f = needs_instr(ri, v, DataInstr::fetch_wait(n, *ri.aux))) return f;
      if (mem.status_of(*ri.aux) == Status::Mo) return name + ": awaited block still Mo";
      return std::nullopt;
    case RuleName::Flush1:
    case RuleName::Flush2:
      if (auto f = needs_aux(ri, false)) return f;
      if (auto f = needs_instr(ri, v, DataInstr::flush(n))) return f;
      if ((mem.status_of(n) == Status::Mo) != (ri.rule == RuleName::Flush1)) {
        return name + (ri.rule == RuleName::Flush1 ? ": status != Mo" : ": status = Mo");
      }
      return std::nullopt;
    default:
      return name + ": not a cache rule";
  }
}

void append_event(Configuration& cf, CoreState& core, Event::Kind kind, Address n) {
  const Event e{kind, core.id, n};
  core.log.push_back(e);
  cf.history.push_back(e);
}

}  // namespace

std::string_view to_string(RuleName r) { return kRuleNames[static_cast<std::size_t>(r)]; }

std::optional<RuleName> rule_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kRuleNames.size(); ++i) {
    if (kRuleNames[i] == s) return static_cast<RuleName>(i);
  }
  return std::nullopt;
}

std::string to_string(const Subject& s) {
  if (const auto* c = std::get_if<CoreId>(&s)) return to_string(*c);
  return to_string(std::get<CacheId>(s));
}

std::string to_string(const RuleInstance& ri) {
  std::string out(to_string(ri.rule));
  out += "(" + to_string(ri.subject) + "," + addr_text(ri.addr);
  if (ri.aux) out += "," + addr_text(*ri.aux);
  return out + ")";
}

std::optional<std::string> failing_premise(const Configuration& cf, const RuleInstance& ri,
                                           const Options& opts) {
  switch (ri.rule) {
    case RuleName::PrRd1:
    case RuleName::PrRd2:
    case RuleName::PrRd3:
    case RuleName::PrWr1:
    case RuleName::PrWr3:
    case RuleName::PrWr4:
    case RuleName::SynchX:
      return premise_core(cf, ri);
    case RuleName::LCHit1:
    case RuleName::LCHit2:
    case RuleName::LCMiss:
    case RuleName::Synch:
    case RuleName::FetchBl1:
    case RuleName::FetchBl2:
    case RuleName::FetchBl3:
    case RuleName::LCFetchUnblock:
    case RuleName::FetchW:
    case RuleName::Flush1:
    case RuleName::Flush2:
      return premise_cache(cf, ri, opts);
    case RuleName::PrWr2:
      return std::string("PrWr2: only fires inside its SynchX composite");
    case RuleName::LLCMiss:
      return std::string("LLCMiss: only fires inside its Synch composite");
    default:
      return std::string(to_string(ri.rule)) + ": labelled rule, never a standalone step";
  }
}

std::vector<RuleInstance> enabled(const Configuration& cf, const Options& opts) {
  std::vector<RuleInstance> cand;
  for (const auto& core : cf.cores) {
    if (core.task.empty()) continue;
    const Address n = core.task.front().addr;
    for (RuleName r : {RuleName::PrRd1, RuleName::PrRd2, RuleName::PrRd3, RuleName::PrWr1, RuleName::SynchX,
                       RuleName::PrWr3, RuleName::PrWr4}) {
      cand.push_back({r, core.id, n, std::nullopt});
    }
  }
  for (const auto& cache : cf.caches) {
    for (const auto& d : cache.dst.items()) {
      const Address sel = select(cache.memory, d.addr, opts.placement);
      switch (d.kind) {
        case DataInstr::Kind::Fetch:
          cand.push_back({RuleName::LCHit1, cache.id, d.addr, sel});
          cand.push_back({RuleName::LCHit2, cache.id, d.addr, std::nullopt});
          cand.push_back({RuleName::LCMiss, cache.id, d.addr, std::nullopt});
          cand.push_back({RuleName::Synch, cache.id, d.addr, std::nullopt});
          break;
        case DataInstr::Kind::FetchB:
          cand.push_back({RuleName::FetchBl1, cache.id, d.addr, std::nullopt});
          cand.push_back({RuleName::FetchBl2, cache.id, d.addr, sel});
          cand.push_back({RuleName::FetchBl3, cache.id, d.addr, sel});
          cand.push_back({RuleName::LCFetchUnblock, cache.id, d.addr, std::nullopt});
          break;
        case DataInstr::Kind::FetchW:
          cand.push_back({RuleName::FetchW, cache.id, d.addr, d.awaited});
          break;
        case DataInstr::Kind::Flush:
          cand.push_back({RuleName::Flush1, cache.id, d.addr, std::nullopt});
          cand.push_back({RuleName::Flush2, cache.id, d.addr, std::nullopt});
          break;
      }
    }
  }
  std::vector<RuleInstance> out;
  for (auto& ri : cand) {
    if (!failing_premise(cf, ri, opts)) out.push_back(ri);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Configuration apply_broadcast_rd(const Configuration& cf, const CacheId& llc, Address n) {
  if (!cf.has_cache(llc) || !cache_position(llc, cf.levels).is_last) {
    throw PreconditionError("Synch: " + to_string(llc) + " is not a last-level cache");
  }
  Configuration out = cf;
  auto& emitter = out.cache(llc);
  if (!emitter.dst.remove_one(DataInstr::fetch(n))) {
    throw PreconditionError("Synch: Fetch(" + addr_text(n) + ") not in dst of " + to_string(llc));
  }
  emitter.dst.add(DataInstr::fetch_blocked(n));
  for (auto& c : out.caches) {
    if (c.id == llc) continue;
    if (c.memory.status_of(n) == Status::Mo) c.dst.add(DataInstr::flush(n));
  }
  return out;
}

Configuration apply_broadcast_rdx(const Configuration& cf, CoreId c, Address n) {
  if (auto f = premise_core(cf, {RuleName::SynchX, c, n, std::nullopt})) throw PreconditionError(*f);
  Configuration out = cf;
  auto& core = out.core(c);
  core.task.erase(core.task.begin());
  append_event(out, core, Event::Kind::W, n);
  const CacheId l1{c, 1};
  out.cache(l1).memory.set(n, Status::Mo);
  for (auto& cache : out.caches) {
    if (cache.id == l1) continue;
    if (cache.memory.status_of(n) == Status::Sh) cache.memory.set(n, Status::Inv);
  }
  out.main.set(n, Status::Inv);
  return out;
}

Configuration apply(const Configuration& cf, const RuleInstance& ri, const Options& opts) {
  if (auto f = failing_premise(cf, ri, opts)) throw PreconditionError(*f);
  const Address n = ri.addr;
  if (ri.rule == RuleName::SynchX) return apply_broadcast_rdx(cf, std::get<CoreId>(ri.subject), n);
  if (ri.rule == RuleName::Synch) return apply_broadcast_rd(cf, std::get<CacheId>(ri.subject), n);

  Configuration out = cf;
  if (const auto* c = std::get_if<CoreId>(&ri.subject)) {
    auto& core = out.core(*c);
    auto& l1 = out.cache(CacheId{*c, 1});
    switch (ri.rule) {
      case RuleName::PrRd1:
        core.task.erase(core.task.begin());
        append_event(out, core, Event::Kind::R, n);
        break;
      case RuleName::PrRd2:
        core.task.front() = {RuntimeStmt::Op::ReadBl, n};
        l1.memory.erase(n);
        l1.dst.add(DataInstr::fetch(n));
        break;
      case RuleName::PrRd3:
        core.task.front() = {RuntimeStmt::Op::Read, n};
        break;
      case RuleName::PrWr1:
        core.task.erase(core.task.begin());
        append_event(out, core, Event::Kind::W, n);
        break;
      case RuleName::PrWr3:
        core.task.front() = {RuntimeStmt::Op::WriteBl, n};
        l1.memory.erase(n);
        l1.dst.add(DataInstr::fetch(n));
        break;
      case RuleName::PrWr4:
        core.task.front() = {RuntimeStmt::Op::Write, n};
        break;
      default:
        break;
    }
    return out;
  }

  const auto& id = std::get<CacheId>(ri.subject);
  auto& cache = out.cache(id);
  const bool last = cache_position(id, out.levels).is_last;
  CacheState* next = last ? nullptr : &out.cache(CacheId{id.core, id.level + 1});
  switch (ri.rule) {
    case RuleName::LCHit1: {
      const Address m = *ri.aux;
      const Status victim = *cache.memory.status_of(m);
      const Status incoming = *next->memory.status_of(n);
      cache.memory.erase(m);
      cache.memory.set(n, incoming);
      next->memory.erase(n);
      next->memory.set(m, victim);
      cache.dst.remove_one(DataInstr::fetch(n));
      break;
    }
    case RuleName::LCHit2:
      cache.memory.set(n, *next->memory.status_of(n));
      next->memory.erase(n);
      cache.dst.remove_one(DataInstr::fetch(n));
      break;
    case RuleName::LCMiss:
      cache.dst.remove_one(DataInstr::fetch(n));
      cache.dst.add(DataInstr::fetch_blocked(n));
      next->memory.erase(n);
      next->dst.add(DataInstr::fetch(n));
      break;
    case RuleName::FetchBl1:
      cache.memory.set(n, *out.main.status_of(n));
      cache.dst.remove_one(DataInstr::fetch_blocked(n));
      break;
    case RuleName::FetchBl2:
      cache.memory.erase(*ri.aux);
      cache.memory.set(n, *out.main.status_of(n));
      cache.dst.remove_one(DataInstr::fetch_blocked(n));
      break;
    case RuleName::FetchBl3:
      cache.dst.remove_one(DataInstr::fetch_blocked(n));
      cache.dst.add(DataInstr::flush(*ri.aux));
      cache.dst.add(DataInstr::fetch_wait(n, *ri.aux));
      break;
    case RuleName::LCFetchUnblock:
      cache.dst.remove_one(DataInstr::fetch_blocked(n));
      cache.dst.add(DataInstr::fetch(n));
      break;
    case RuleName::FetchW:
      cache.dst.remove_one(DataInstr::fetch_wait(n, *ri.aux));
      cache.dst.add(DataInstr::fetch_blocked(n));
      break;
    case RuleName::Flush1:
      cache.memory.set(n, Status::Sh);
      out.main.set(n, Status::Sh);
      cache.dst.remove_one(DataInstr::flush(n));
      break;
    case RuleName::Flush2:
      cache.dst.remove_one(DataInstr::flush(n));
      break;
    default:
      break;
  }
  return out;
}

std::vector<std::pair<RuleInstance, Configuration>> successors(const Configuration& cf, const Options& opts) {
  std::vector<std::pair<RuleInstance, Configuration>> out;
  for (const auto& ri : enabled(cf, opts)) out.emplace_back(ri, apply(cf, ri, opts));
  return out;
}

ReachReport explore(const Configuration& cf0, const ExploreOptions& opts) {
  ReachReport report;
  std::unordered_map<std::string, std::size_t> index;
  report.states.push_back(cf0);
  index.emplace(canonical_text(cf0), 0);
  for (std::size_t i = 0; i < report.states.size(); ++i) {
    auto succ = successors(report.states[i], opts.rules);
    if (succ.empty()) report.terminals.push_back(i);
    for (auto& [ri, next] : succ) {
      auto key = canonical_text(next);
      auto it = index.find(key);
      std::size_t to = 0;
      if (it != index.end()) {
        to = it->second;
      } else {
        if (report.states.size() >= opts.state_bound) {
          report.truncated = true;
          continue;
        }
        to = report.states.size();
        index.emplace(std::move(key), to);
        report.states.push_back(std::move(next));
      }
      if (opts.record_edges) report.edges.push_back({i, ri, to});
    }
  }
  return report;
}

std::vector<std::string> check_msi(const Configuration& cf) {
  std::vector<std::string> out;
  std::vector<Address> addrs;
  for (const auto& c : cf.caches)
    for (const auto& [a, s] : c.memory.entries()) addrs.push_back(a);
  for (const auto& [a, s] : cf.main.entries()) addrs.push_back(a);
  std::sort(addrs.begin(), addrs.end());
  addrs.erase(std::unique(addrs.begin(), addrs.end()), addrs.end());

  for (Address n : addrs) {
    std::vector<const CacheState*> holders;
    for (const auto& c : cf.caches)
      if (c.memory.status_of(n) == Status::Mo) holders.push_back(&c);
    if (holders.empty()) continue;
    if (holders.size() > 1) {
      std::string who;
      bool same_core = false;
      for (std::size_t i = 0; i < holders.size(); ++i) {
        if (i) who += ", ";
        who += to_string(holders[i]->id);
        for (std::size_t j = 0; j < i; ++j) same_core |= holders[j]->id.core == holders[i]->id.core;
      }
      out.push_back("address " + addr_text(n) + ": Mo held by " + who +
                    (same_core ? " (two levels of one core)" : ""));
      continue;
    }
    for (const auto& c : cf.caches) {
      if (&c == holders.front()) continue;
      if (c.memory.status_of(n) == Status::Sh) {
        out.push_back("address " + addr_text(n) + ": " + to_string(c.id) + " holds Sh while " +
                      to_string(holders.front()->id) + " holds Mo");
      }
    }
    if (cf.main.status_of(n) != Status::Inv) {
      out.push_back("address " + addr_text(n) + ": main memory not In while " + to_string(holders.front()->id) +
                    " holds Mo");
    }
  }
  return out;
}

}  // namespace mms::tss
