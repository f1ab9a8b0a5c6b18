#include "mms/conformance/conformance.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>

namespace mms::conformance {

namespace {

tss::Address address_of(std::int64_t v) { return tss::Address{static_cast<std::uint32_t>(v)}; }

std::string object_label(const actor::World& g, const model::Layout& layout, actor::ObjRef r) {
  if (auto s = layout.subject_of(r)) return tss::to_string(*s);
  for (const auto& o : g.objects) {
    if (o.oid == r) return o.kind() + "#" + std::to_string(r.oid);
  }
  return "#" + std::to_string(r.oid);
}

// First differing component of two configurations.
std::string difference(const tss::Configuration& want, const tss::Configuration& got) {
  for (std::size_t i = 0; i < want.cores.size() && i < got.cores.size(); ++i) {
    const auto& a = want.cores[i];
    const auto& b = got.cores[i];
    if (a.task != b.task) return tss::to_string(a.id) + " task";
    if (a.log != b.log) return tss::to_string(a.id) + " log";
  }
  for (std::size_t i = 0; i < want.caches.size() && i < got.caches.size(); ++i) {
    const auto& a = want.caches[i];
    const auto& b = got.caches[i];
    if (!(a.memory == b.memory)) return tss::to_string(a.id) + " memory";
    if (!(a.dst == b.dst)) return tss::to_string(a.id) + " dst";
  }
  if (!(want.main == got.main)) return "main memory";
  return "shape";
}

}  // namespace

tss::Configuration alpha(const actor::World& g, const model::Layout& layout) {
  if (!actor::is_stable(g)) throw AlphaError("alpha is defined on stable states only");
  tss::Configuration cf;
  cf.levels = layout.levels;
  for (std::size_t i = 0; i < layout.cores.size(); ++i) {
    const auto& f = g.object(layout.cores[i]).fields;
    tss::CoreState c;
    c.id = tss::CoreId{static_cast<std::uint32_t>(i + 1)};
    c.task = model::task_from_value(f.get("currentTask"));
    c.log = model::log_from_value(f.get("eventLog"));
    cf.history.insert(cf.history.end(), c.log.begin(), c.log.end());
    cf.cores.push_back(std::move(c));
  }
  for (std::size_t i = 0; i < layout.caches.size(); ++i) {
    const auto& o = g.object(layout.caches[i]);
    tss::CacheState c;
    c.id = std::get<tss::CacheId>(*layout.subject_of(o.oid));
    c.memory = model::memory_from_value(o.fields.get("cacheMemory"),
                                        static_cast<std::size_t>(o.fields.get("capacity").as_int()));
    for (const auto& p : o.procs) {
      const auto& name = p.method().name;
      const auto& args = p.stack.front().locals;
      if (name == "fetch") {
        c.dst.add(tss::DataInstr::fetch(address_of(args.get("n").as_int())));
      } else if (name == "fetchBl") {
        c.dst.add(tss::DataInstr::fetch_blocked(address_of(args.get("n").as_int())));
      } else if (name == "fetchW") {
        c.dst.add(tss::DataInstr::fetch_wait(address_of(args.get("n").as_int()), address_of(args.get("n_").as_int())));
      } else if (name == "flush") {
        c.dst.add(tss::DataInstr::flush(address_of(args.get("n").as_int())));
      }
    }
    cf.caches.push_back(std::move(c));
  }
  cf.main = model::memory_from_value(g.object(layout.main).fields.get("memory"), layout.address_space);
  return cf;
}

tss::Options tss_options(const model::Model& m) {
  tss::Options o;
  o.require_shared_main = m.options.require_shared_main;
  return o;
}

Classification classify(const actor::Segment& seg, std::string_view kind, const model::Model& m,
                        const model::Layout& layout) {
  Classification out;
  const std::string point = seg.from_point == 0 ? std::string(model::kEntryPoint) : seg.from_label;
  out.annotation = m.annotation(kind, seg.from_method, point);
  if (!out.annotation) return out;
  const actor::EvalContext ctx{seg.end_fields, seg.end_locals, seg.object};
  for (const auto& c : out.annotation->clauses) {
    if (!c.holds(ctx)) continue;
    if (out.clause) {
      throw std::logic_error("clauses '" + out.clause->condition + "' and '" + c.condition + "' both hold at " +
                             seg.from_method + "." + point);
    }
    out.clause = &c;
  }
  if (!out.clause) return out;
  const auto subject = layout.subject_of(seg.object);
  if (!subject) throw std::logic_error("annotated segment on an object without a subject");
  tss::RuleInstance ri;
  ri.rule = out.clause->rule;
  ri.subject = *subject;
  ri.addr = address_of(ctx["n"].as_int());
  if (out.clause->aux) ri.aux = address_of(out.clause->aux(ctx));
  out.rule = ri;
  return out;
}

std::string_view to_string(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Silent: return "silent";
    case Verdict::Kind::RuleApplied: return "rule";
    case Verdict::Kind::Violation: return "violation";
  }
  return "?";
}

Verdict check_coarse_step(const actor::World& before, const actor::World& after, const actor::Segment& seg,
                          const model::Model& m, const model::Layout& layout) {
  Verdict v;
  const tss::Configuration a0 = alpha(before, layout);
  const tss::Configuration a1 = alpha(after, layout);
  v.before = tss::canonical_text(a0);
  v.after = tss::canonical_text(a1);
  Classification cls;
  try {
    cls = classify(seg, before.object(seg.object).kind(), m, layout);
  } catch (const std::exception& e) {
    v.kind = Verdict::Kind::Violation;
    v.reason = e.what();
    return v;
  }
  if (cls.clause) v.clause = cls.clause->condition + " : " + cls.clause->rule_text;
  if (!cls.rule) {
    if (a0 == a1) {
      v.kind = Verdict::Kind::Silent;
    } else {
      v.kind = Verdict::Kind::Violation;
      v.reason = "silent step changed " + difference(a0, a1);
      v.expected = v.before;
    }
    return v;
  }
  v.rule = cls.rule;
  const tss::Options opts = tss_options(m);
  if (auto premise = tss::failing_premise(a0, *cls.rule, opts)) {
    v.kind = Verdict::Kind::Violation;
    v.reason = tss::to_string(*cls.rule) + " not enabled: " + *premise;
    return v;
  }
  const tss::Configuration want = tss::apply(a0, *cls.rule, opts);
  v.expected = tss::canonical_text(want);
  if (want == a1) {
    v.kind = Verdict::Kind::RuleApplied;
  } else {
    v.kind = Verdict::Kind::Violation;
    v.reason = tss::to_string(*cls.rule) + " mismatch in " + difference(want, a1);
  }
  return v;
}

std::optional<tss::CacheId> foreign_modified_holder(const tss::Configuration& cf, tss::CoreId c, tss::Address n) {
  for (const auto& cache : cf.caches) {
    if (cache.id.core != c && cache.memory.status_of(n) == tss::Status::Mo) return cache.id;
  }
  return std::nullopt;
}

std::optional<std::string> program_order_violation(const tss::Configuration& cf, const Scenario& s) {
  for (std::size_t i = 0; i < cf.cores.size() && i < s.patterns.size(); ++i) {
    const auto& log = cf.cores[i].log;
    const auto& pattern = s.patterns[i];
    bool same = log.size() == pattern.size();
    for (std::size_t k = 0; same && k < log.size(); ++k) {
      const bool is_read = log[k].kind == tss::Event::Kind::R;
      same = (is_read == (pattern[k].op == tss::RuntimeStmt::Op::Read)) && log[k].addr == pattern[k].addr &&
             log[k].core == cf.cores[i].id;
    }
    if (!same) return tss::to_string(cf.cores[i].id) + " log " + tss::to_string(log) + " differs from its pattern";
  }
  return std::nullopt;
}

std::uint64_t step_seed(std::uint64_t seed, std::size_t step) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(step) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SimReport check_simulation(const model::Model& m, const Scenario& s, const SimOptions& opts) {
  SimReport rep;
  model::Instance inst = model::build_initial(m, s);
  actor::World g = std::move(inst.world);
  const model::Layout& layout = inst.layout;
  for (std::size_t i = 0; i < opts.max_steps; ++i) {
    if (actor::all_terminated(g)) break;
    if (rep.fine_steps >= opts.max_fine_steps) break;
    actor::CoarseOutcome out;
    try {
      out = actor::coarse_step(g, step_seed(opts.seed, i));
    } catch (const actor::Stuck& e) {
      rep.stuck = e.what();
      break;
    }
    Verdict v = check_coarse_step(g, out.world, out.segment, m, layout);
    ++rep.steps;
    rep.fine_steps += out.segment.fine_steps;
    if (v.rule && v.kind != Verdict::Kind::Violation) {
      const auto r = v.rule->rule;
      if (r == tss::RuleName::PrRd1 || r == tss::RuleName::PrWr1) {
        const tss::Configuration a0 = alpha(g, layout);
        if (foreign_modified_holder(a0, std::get<tss::CoreId>(v.rule->subject), v.rule->addr)) ++rep.stale_accesses;
      }
    }
    if (opts.on_step) {
      StepRecord rec;
      rec.index = i;
      rec.object = object_label(g, layout, out.segment.object);
      rec.method = out.segment.method;
      rec.point = out.segment.from_point == 0 ? std::string(model::kEntryPoint) : out.segment.from_label;
      rec.kind = out.segment.kind;
      rec.fine_steps = out.segment.fine_steps;
      rec.alpha_before = tss::digest(alpha(g, layout));
      rec.alpha_after = tss::digest(alpha(out.world, layout));
      rec.env.clear();
      actor::write_env(rec.env, out.segment.end_locals);
      rec.verdict = v;
      opts.on_step(rec);
    }
    switch (v.kind) {
      case Verdict::Kind::Silent: ++rep.silents; break;
      case Verdict::Kind::RuleApplied: ++rep.rule_counts[v.rule->rule]; break;
      case Verdict::Kind::Violation: rep.violations.push_back(std::move(v)); break;
    }
    g = std::move(out.world);
  }
  rep.terminated = actor::all_terminated(g);
  rep.final_alpha = alpha(g, layout);
  return rep;
}

StableGraph explore_stable(const actor::World& g0, const model::Layout& layout, std::size_t state_bound,
                           std::size_t depth_bound) {
  StableGraph g;
  std::unordered_map<std::string, std::size_t> index;
  index.emplace(actor::canonical_key(g0), 0);
  g.states.push_back(g0);
  g.depth.push_back(0);
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    g.succ.emplace_back();
    if (g.depth[i] >= depth_bound) continue;
    for (auto& out : actor::coarse_successors(g.states[i])) {
      auto key = actor::canonical_key(out.world);
      auto it = index.find(key);
      if (it == index.end()) {
        if (g.states.size() >= state_bound) {
          g.truncated = true;
          continue;
        }
        it = index.emplace(std::move(key), g.states.size()).first;
        g.states.push_back(std::move(out.world));
        g.depth.push_back(g.depth[i] + 1);
      }
      auto& s = g.succ[i];
      if (std::find(s.begin(), s.end(), it->second) == s.end()) s.push_back(it->second);
    }
  }
  for (const auto& st : g.states) {
    g.alphas.push_back(alpha(st, layout));
    g.alpha_text.push_back(tss::canonical_text(g.alphas.back()));
  }
  return g;
}

std::vector<std::string> quiescent_alphas(const StableGraph& g) {
  // Greatest fixpoint: a state is quiescent when all successors are
  // quiescent and share its alpha.
  std::vector<char> q(g.states.size(), 1);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < g.states.size(); ++i) {
      if (!q[i]) continue;
      for (std::size_t j : g.succ[i]) {
        if (!q[j] || g.alpha_text[j] != g.alpha_text[i]) {
          q[i] = 0;
          changed = true;
          break;
        }
      }
    }
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    if (q[i]) out.push_back(g.alpha_text[i]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

BisimReport check_bisimulation(const StableGraph& g, const tss::Options& opts, std::size_t depth_bound,
                               const std::vector<std::size_t>& which) {
  BisimReport rep;
  rep.truncated = g.truncated;
  std::vector<std::size_t> todo = which;
  if (todo.empty()) {
    todo.resize(g.states.size());
    for (std::size_t i = 0; i < todo.size(); ++i) todo[i] = i;
  }
  std::vector<std::size_t> seen_at(g.states.size(), SIZE_MAX);
  for (std::size_t start : todo) {
    ++rep.states;
    const auto succs = tss::successors(g.alphas[start], opts);
    if (succs.empty()) continue;
    std::unordered_set<std::string> reachable;
    std::deque<std::pair<std::size_t, std::size_t>> frontier{{start, 0}};
    seen_at[start] = start;
    while (!frontier.empty()) {
      auto [i, d] = frontier.front();
      frontier.pop_front();
      reachable.insert(g.alpha_text[i]);
      if (d == depth_bound) continue;
      for (std::size_t j : g.succ[i]) {
        if (seen_at[j] == start) continue;
        seen_at[j] = start;
        frontier.emplace_back(j, d + 1);
      }
    }
    for (const auto& [ri, cf] : succs) {
      ++rep.obligations;
      const auto target = tss::canonical_text(cf);
      if (!reachable.count(target)) rep.missing.push_back({start, ri, g.alpha_text[start], target});
    }
  }
  return rep;
}

BisimReport check_bisimulation(const actor::World& g, const model::Model& m, const model::Layout& layout,
                               std::size_t depth_bound) {
  const StableGraph graph = explore_stable(g, layout, SIZE_MAX, depth_bound);
  return check_bisimulation(graph, tss_options(m), depth_bound, {0});
}

}  // namespace mms::conformance
