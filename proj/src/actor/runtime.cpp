#include "mms/actor/runtime.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>
#include <random>
#include <unordered_map>

namespace mms::actor {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t fields_digest(const Env& fields) {
  std::string s;
  write_env(s, fields);
  return fnv1a(s);
}

Process make_process(Pid pid, const Method& m, std::vector<Value> args, bool waiter) {
  if (args.size() != m.params.size()) {
    throw RuntimeFault(m.name + ": expected " + std::to_string(m.params.size()) + " arguments, got " +
                       std::to_string(args.size()));
  }
  Activation a;
  a.method = &m;
  for (std::size_t i = 0; i < args.size(); ++i) a.locals.set(m.params[i], std::move(args[i]));
  a.frames.push_back(Frame{&m.body, 0, false, {}, {}});
  Process p;
  p.pid = pid;
  p.has_waiter = waiter;
  p.stack.push_back(std::move(a));
  return p;
}

const Method& callee_method(const World& w, ObjRef target, const std::string& name) {
  return w.object(target).behavior->method(name);
}

EvalContext context(const ObjectState& o, const Process& p) { return EvalContext{o.fields, p.locals(), o.oid}; }

void assign_var(ObjectState& o, Process& p, const std::string& name, Value v) {
  Activation& a = p.stack.back();
  if (a.locals.contains(name) || !o.fields.contains(name)) {
    a.locals.set(name, std::move(v));
  } else {
    o.fields.set(name, std::move(v));
  }
}

void advance(Process& p) { ++p.stack.back().frames.back().pc; }

void push_block(Process& p, const Block& b) {
  if (!b.stmts.empty()) p.stack.back().frames.push_back(Frame{&b, 0, false, {}, {}});
}

void collect_refs(const Value& v, std::vector<std::uint32_t>& out) {
  switch (v.data.index()) {
    case 3: out.push_back(std::get<ObjRef>(v.data).oid); break;
    case 4:
      for (const auto& a : std::get<Ctor>(v.data).args) collect_refs(a, out);
      break;
    case 5:
      for (const auto& a : std::get<ValueList>(v.data)) collect_refs(a, out);
      break;
    case 6:
      for (const auto& e : std::get<ValueMap>(v.data)) collect_refs(e.value, out);
      break;
    default: break;
  }
}

void collect_env_refs(const Env& env, std::vector<std::uint32_t>& out) {
  for (const auto& [k, v] : env.entries()) collect_refs(v, out);
}

void collect_process_refs(const Process& p, std::vector<std::uint32_t>& out) {
  for (const auto& a : p.stack) {
    collect_env_refs(a.locals, out);
    for (const auto& f : a.frames) {
      for (const auto& v : f.loop_rest) collect_refs(v, out);
    }
  }
}

void collect_garbage(World& w) {
  if (w.objects.size() == w.static_objects) return;
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::uint32_t> refs;
    for (const auto& o : w.objects) {
      collect_env_refs(o.fields, refs);
      for (const auto& p : o.procs) collect_process_refs(p, refs);
    }
    for (const auto& f : w.futures) {
      if (f.value) collect_refs(*f.value, refs);
    }
    std::sort(refs.begin(), refs.end());
    auto dead = [&](const ObjectState& o) {
      return o.oid.oid >= w.static_objects && o.procs.empty() &&
             !std::binary_search(refs.begin(), refs.end(), o.oid.oid);
    };
    const auto before = w.objects.size();
    w.objects.erase(std::remove_if(w.objects.begin(), w.objects.end(), dead), w.objects.end());
    changed = w.objects.size() != before;
  }
}

struct PendingSpawn {
  ObjRef target;
  Process proc;
};

struct PendingObject {
  ObjRef oid;
  const Behavior* behavior;
  std::vector<Value> args;
};

}  // namespace

const Stmt* Process::current() const {
  if (stack.empty()) return nullptr;
  const Activation& a = stack.back();
  if (a.frames.empty()) return nullptr;
  const Frame& f = a.frames.back();
  if (f.pc >= f.block->stmts.size()) return nullptr;
  return &f.block->stmts[f.pc];
}

const Process* ObjectState::find(Pid pid) const {
  for (const auto& p : procs) {
    if (p.pid == pid) return &p;
  }
  return nullptr;
}

Process* ObjectState::find(Pid pid) {
  for (auto& p : procs) {
    if (p.pid == pid) return &p;
  }
  return nullptr;
}

ObjRef World::add_object(std::string_view kind, Env fields) {
  const Behavior& b = registry->behavior(kind);
  ObjectState o;
  o.oid = ObjRef{next_oid++};
  o.behavior = &b;
  o.fields = b.initial_fields;
  for (const auto& [k, v] : fields.entries()) o.fields.set(k, v);
  objects.push_back(std::move(o));
  static_objects = next_oid;
  return objects.back().oid;
}

Pid World::spawn(ObjRef target, std::string_view method, std::vector<Value> args) {
  const Method& m = object(target).behavior->method(method);
  const Pid pid = next_pid++;
  object(target).procs.push_back(make_process(pid, m, std::move(args), false));
  return pid;
}

const ObjectState& World::object(ObjRef r) const {
  auto it = std::lower_bound(objects.begin(), objects.end(), r.oid,
                             [](const ObjectState& o, std::uint32_t id) { return o.oid.oid < id; });
  if (it == objects.end() || it->oid != r) throw RuntimeFault("dangling object reference @" + std::to_string(r.oid));
  return *it;
}

ObjectState& World::object(ObjRef r) {
  return const_cast<ObjectState&>(static_cast<const World&>(*this).object(r));
}

const Future* World::future(Pid pid) const {
  auto it = std::lower_bound(futures.begin(), futures.end(), pid,
                             [](const Future& f, Pid p) { return f.pid < p; });
  if (it == futures.end() || it->pid != pid) return nullptr;
  return &*it;
}

std::size_t World::process_count() const {
  std::size_t n = 0;
  for (const auto& o : objects) n += o.procs.size();
  return n;
}

bool is_schedulable(const World& w, const ObjectState& o, const Process& p) {
  if (o.active && *o.active != p.pid) return false;
  if (p.awaiting) {
    const Future* f = w.future(*p.awaiting);
    return f && f->value.has_value();
  }
  if (!o.active) {
    const Stmt* s = p.current();
    if (s && s->kind == StmtKind::Await) return s->expr(context(o, p)).as_bool();
  }
  return true;
}

std::vector<StepChoice> schedulable(const World& w) {
  std::vector<StepChoice> out;
  for (const auto& o : w.objects) {
    for (const auto& p : o.procs) {
      if (is_schedulable(w, o, p)) out.push_back({o.oid, p.pid});
    }
  }
  return out;
}

StepEffects step(World& w, StepChoice choice) {
  std::vector<PendingSpawn> spawns;
  std::vector<PendingObject> created;
  StepEffects eff;
  std::optional<Value> result;
  {
    ObjectState& o = w.object(choice.object);
    Process* pp = o.find(choice.pid);
    if (!pp || !is_schedulable(w, o, *pp)) {
      throw RuntimeFault("process " + std::to_string(choice.pid) + " is not schedulable");
    }
    Process& p = *pp;
    o.active = p.pid;
    p.started = true;

    auto issue = [&](const Stmt& s, bool waiter) -> std::pair<ObjRef, Pid> {
      const EvalContext ctx = context(o, p);
      const ObjRef target = s.expr(ctx).as_ref();
      std::vector<Value> args;
      for (const auto& a : s.args) args.push_back(a(ctx));
      const Method& m = callee_method(w, target, s.method);
      const Pid pid = w.next_pid++;
      spawns.push_back({target, make_process(pid, m, std::move(args), waiter)});
      eff.spawned.push_back(pid);
      if (waiter) {
        auto it = std::lower_bound(w.futures.begin(), w.futures.end(), pid,
                                   [](const Future& f, Pid q) { return f.pid < q; });
        w.futures.insert(it, Future{pid, std::nullopt});
      }
      return {target, pid};
    };

    auto finish_activation = [&](Value v) {
      if (p.stack.size() > 1) {
        std::string target = p.stack.back().result_target;
        p.stack.pop_back();
        if (!target.empty()) assign_var(o, p, target, std::move(v));
      } else {
        result = std::move(v);
      }
    };

    if (p.awaiting) {
      const Pid callee = *p.awaiting;
      auto it = std::lower_bound(w.futures.begin(), w.futures.end(), callee,
                                 [](const Future& f, Pid q) { return f.pid < q; });
      Value v = std::move(*it->value);
      w.futures.erase(it);
      p.awaiting.reset();
      const Stmt* s = p.current();
      eff.executed = s;
      if (s->kind == StmtKind::SyncCall && fields_digest(o.fields) != p.caller_fields_digest) {
        throw SyncFrameViolation(o.kind() + "#" + std::to_string(o.oid.oid) + "." + p.method().name +
                                 ": fields changed during synchronous call to " + s->method);
      }
      if (!s->target.empty()) assign_var(o, p, s->target, std::move(v));
      advance(p);
    } else if (const Stmt* sp = p.current()) {
      const Stmt& s = *sp;
      eff.executed = sp;
      const EvalContext ctx = context(o, p);
      switch (s.kind) {
        case StmtKind::Assign: {
          Value v = s.expr(ctx);
          assign_var(o, p, s.target, std::move(v));
          advance(p);
          break;
        }
        case StmtKind::If: {
          const bool c = s.expr(ctx).as_bool();
          advance(p);
          push_block(p, s.blocks[c ? 0 : 1]);
          break;
        }
        case StmtKind::Switch: {
          const Value v = s.expr(ctx);
          const Case* hit = nullptr;
          std::vector<Env::Entry> binds;
          for (const auto& c : s.cases) {
            binds.clear();
            if (match(c.pattern, v, binds)) {
              hit = &c;
              break;
            }
          }
          if (!hit) throw RuntimeFault(p.method().name + ": no case matches " + to_text(v));
          advance(p);
          for (auto& [k, bv] : binds) p.stack.back().locals.set(k, std::move(bv));
          push_block(p, hit->body);
          break;
        }
        case StmtKind::ForEach: {
          ValueList l = s.expr(ctx).as_list();
          advance(p);
          if (!l.empty() && !s.blocks[0].stmts.empty()) {
            p.stack.back().locals.set(s.target, l.front());
            l.erase(l.begin());
            p.stack.back().frames.push_back(Frame{&s.blocks[0], 0, true, s.target, std::move(l)});
          }
          break;
        }
        case StmtKind::AsyncCall:
          issue(s, false);
          advance(p);
          break;
        case StmtKind::SyncCall: {
          const ObjRef target = s.expr(ctx).as_ref();
          if (target == o.oid) {
            std::vector<Value> args;
            for (const auto& a : s.args) args.push_back(a(ctx));
            advance(p);
            Process inline_call = make_process(0, o.behavior->method(s.method), std::move(args), false);
            inline_call.stack.front().result_target = s.target;
            p.stack.push_back(std::move(inline_call.stack.front()));
          } else {
            p.caller_fields_digest = fields_digest(o.fields);
            p.awaiting = issue(s, true).second;
          }
          break;
        }
        case StmtKind::AwaitCall:
          p.awaiting = issue(s, true).second;
          o.active.reset();
          eff.suspended = true;
          break;
        case StmtKind::Await:
          if (s.expr(ctx).as_bool()) {
            advance(p);
          } else {
            o.active.reset();
            eff.suspended = true;
          }
          break;
        case StmtKind::Return:
          finish_activation(s.expr(ctx));
          break;
        case StmtKind::Skip: advance(p); break;
        case StmtKind::New: {
          std::vector<Value> args;
          for (const auto& a : s.args) args.push_back(a(ctx));
          const ObjRef oid{w.next_oid++};
          created.push_back({oid, &w.registry->behavior(s.method), std::move(args)});
          assign_var(o, p, s.target, Value(oid));
          advance(p);
          break;
        }
      }
    }

    // Unwind exhausted blocks, loop iterations and finished activations.
    while (!result && !p.awaiting) {
      Activation& a = p.stack.back();
      if (a.frames.empty()) {
        finish_activation(Value());
        continue;
      }
      Frame& f = a.frames.back();
      if (f.pc < f.block->stmts.size()) break;
      if (f.loop && !f.loop_rest.empty()) {
        a.locals.set(f.loop_var, f.loop_rest.front());
        f.loop_rest.erase(f.loop_rest.begin());
        f.pc = 0;
        continue;
      }
      a.frames.pop_back();
    }

    if (result) {
      eff.terminated = true;
      eff.final_locals = p.stack.front().locals;
      if (p.has_waiter) {
        auto it = std::lower_bound(w.futures.begin(), w.futures.end(), p.pid,
                                   [](const Future& f, Pid q) { return f.pid < q; });
        it->value = std::move(*result);
      }
      o.active.reset();
      const Pid done = p.pid;
      o.procs.erase(std::remove_if(o.procs.begin(), o.procs.end(), [&](const Process& q) { return q.pid == done; }),
                    o.procs.end());
    }
  }

  for (auto& c : created) {
    ObjectState o;
    o.oid = c.oid;
    o.behavior = c.behavior;
    o.fields = c.behavior->initial_fields;
    if (c.args.size() != c.behavior->ctor_params.size()) {
      throw RuntimeFault("new " + c.behavior->kind + ": wrong number of arguments");
    }
    for (std::size_t i = 0; i < c.args.size(); ++i) o.fields.set(c.behavior->ctor_params[i], std::move(c.args[i]));
    w.objects.push_back(std::move(o));
  }
  for (auto& sp : spawns) w.object(sp.target).procs.push_back(std::move(sp.proc));
  collect_garbage(w);
  return eff;
}

std::vector<std::pair<StepChoice, World>> enumerate_fine_steps(const World& w) {
  std::vector<std::pair<StepChoice, World>> out;
  for (const auto& c : schedulable(w)) {
    World next = w;
    step(next, c);
    out.emplace_back(c, std::move(next));
  }
  return out;
}

namespace {

void write_process(std::string& out, const Process& p, const RefRenaming& rn,
                   const std::function<std::string(Pid)>& pid_name, bool with_pid, const World& w) {
  if (with_pid) out += "p" + pid_name(p.pid);
  out += p.has_waiter ? "w" : "-";
  out += p.started ? "s" : "-";
  if (p.awaiting) {
    out += "<";
    const Future* f = w.future(*p.awaiting);
    if (f && f->value) {
      write_value(out, *f->value, rn);
    } else {
      out += with_pid ? pid_name(*p.awaiting) : std::string("?");
    }
    out += ">";
    const Stmt* s = p.current();
    if (s && s->kind == StmtKind::SyncCall) out += std::to_string(p.caller_fields_digest);
  }
  for (const auto& a : p.stack) {
    out += "|";
    out += a.method->name;
    if (!a.result_target.empty()) out += "->" + a.result_target;
    write_env(out, a.locals, rn);
    for (const auto& f : a.frames) {
      out += "[" + std::to_string(f.block->id) + ":" + std::to_string(f.pc);
      if (f.loop) {
        out += ":" + f.loop_var;
        write_value(out, Value(f.loop_rest), rn);
      }
      out += "]";
    }
  }
}

}  // namespace

std::string canonical_key(const World& w) {
  const std::uint32_t dyn = w.static_objects;
  const RefRenaming placeholder{dyn, nullptr, true};
  const auto unnamed = [](Pid) { return std::string(); };

  // Pool order within an object: the active process, then by content.
  std::vector<std::vector<const Process*>> order(w.objects.size());
  for (std::size_t i = 0; i < w.objects.size(); ++i) {
    const auto& o = w.objects[i];
    std::vector<std::pair<std::string, const Process*>> keyed;
    for (const auto& p : o.procs) {
      std::string k = (o.active && *o.active == p.pid) ? "0" : "1";
      write_process(k, p, placeholder, unnamed, false, w);
      keyed.emplace_back(std::move(k), &p);
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [k, p] : keyed) order[i].push_back(p);
  }

  // Dynamic objects are renamed in order of first reference.
  std::vector<std::uint32_t> table(w.next_oid > dyn ? w.next_oid - dyn : 0, UINT32_MAX);
  std::uint32_t next_name = dyn;
  std::vector<std::size_t> visit_order;
  auto note = [&](std::vector<std::uint32_t>& refs) {
    for (auto r : refs) {
      if (r >= dyn && table[r - dyn] == UINT32_MAX) table[r - dyn] = next_name++;
    }
    refs.clear();
  };
  auto index_of = [&](std::uint32_t oid) -> std::size_t {
    for (std::size_t i = 0; i < w.objects.size(); ++i) {
      if (w.objects[i].oid.oid == oid) return i;
    }
    return SIZE_MAX;
  };
  auto visit = [&](std::size_t i) {
    std::vector<std::uint32_t> refs;
    collect_env_refs(w.objects[i].fields, refs);
    note(refs);
    for (const Process* p : order[i]) {
      collect_process_refs(*p, refs);
      note(refs);
    }
    visit_order.push_back(i);
  };
  for (std::size_t i = 0; i < w.objects.size() && w.objects[i].oid.oid < dyn; ++i) visit(i);
  for (std::uint32_t name = dyn;; ++name) {
    if (name == next_name) {
      bool added = false;
      for (std::size_t i = 0; i < w.objects.size(); ++i) {
        const auto oid = w.objects[i].oid.oid;
        if (oid >= dyn && table[oid - dyn] == UINT32_MAX) {
          table[oid - dyn] = next_name++;
          added = true;
          break;
        }
      }
      if (!added) break;
    }
    for (std::uint32_t old = 0; old < table.size(); ++old) {
      if (table[old] == name) {
        const std::size_t i = index_of(old + dyn);
        if (i != SIZE_MAX) visit(i);
        break;
      }
    }
  }

  // Awaited processes are named at their first reference so that
  // content-identical callees are told apart by who waits on them.
  std::unordered_map<Pid, std::size_t> pid_names;
  for (std::size_t i : visit_order) {
    for (const Process* p : order[i]) {
      if (p->awaiting) pid_names.emplace(*p->awaiting, pid_names.size());
    }
  }
  for (std::size_t i : visit_order) {
    for (const Process* p : order[i]) pid_names.emplace(p->pid, pid_names.size());
  }
  for (std::size_t i : visit_order) {
    std::stable_sort(order[i].begin(), order[i].end(), [&](const Process* a, const Process* b) {
      return pid_names.at(a->pid) < pid_names.at(b->pid);
    });
  }
  auto pid_name = [&](Pid pid) -> std::string {
    auto [it, inserted] = pid_names.emplace(pid, pid_names.size());
    return std::to_string(it->second);
  };

  const RefRenaming rn{dyn, &table, false};
  std::string out;
  for (std::size_t i : visit_order) {
    const auto& o = w.objects[i];
    const auto oid = o.oid.oid;
    out += "#" + std::to_string(oid < dyn ? oid : table[oid - dyn]) + o.kind();
    write_env(out, o.fields, rn);
    out += o.active ? "A" : "I";
    for (const Process* p : order[i]) {
      out += (o.active && *o.active == p->pid) ? "(*" : "(";
      write_process(out, *p, rn, pid_name, true, w);
      out += ")";
    }
    out += "\n";
  }
  return out;
}

std::string describe(const World& w) {
  std::string out;
  for (const auto& o : w.objects) {
    out += o.kind() + "#" + std::to_string(o.oid.oid) + " ";
    write_env(out, o.fields);
    out += "\n";
    for (const auto& p : o.procs) {
      out += "  ";
      out += (o.active && *o.active == p.pid) ? "* " : "  ";
      out += "p" + std::to_string(p.pid) + " " + p.method().name;
      if (const Stmt* s = p.current()) {
        out += " @" + std::to_string(s->id);
        if (!s->label.empty()) out += " [" + s->label + "]";
      }
      if (p.awaiting) out += " awaiting p" + std::to_string(*p.awaiting);
      out += " ";
      write_env(out, p.locals());
      out += "\n";
    }
  }
  return out;
}

namespace {

bool in_protocol(const Process& p) {
  return std::any_of(p.stack.begin(), p.stack.end(), [](const Activation& a) { return a.method->protocol; });
}

// An external synchronous call to a non-protocol method, not yet issued.
bool at_sync_point(const World& w, const ObjectState& o, const Process& p) {
  if (p.awaiting) return false;
  const Stmt* s = p.current();
  if (!s || s->kind != StmtKind::SyncCall) return false;
  const ObjRef target = s->expr(context(o, p)).as_ref();
  if (target == o.oid) return false;
  return !callee_method(w, target, s->method).protocol;
}

}  // namespace

bool is_stable(const World& w) {
  for (const auto& o : w.objects) {
    if (o.behavior->idle && !o.behavior->idle(o.fields)) return false;
    for (const auto& p : o.procs) {
      if (in_protocol(p)) return false;
    }
    if (o.active) {
      const Process* p = o.find(*o.active);
      if (!p || !at_sync_point(w, o, *p)) return false;
    }
  }
  return true;
}

std::string_view to_string(SegmentKind k) {
  switch (k) {
    case SegmentKind::Local: return "local";
    case SegmentKind::Rendezvous: return "rendezvous";
    case SegmentKind::Broadcast: return "broadcast";
  }
  return "?";
}

std::vector<StepChoice> coarse_candidates(const World& w) {
  std::vector<StepChoice> out;
  for (const auto& o : w.objects) {
    if (o.active) {
      const Process* p = o.find(*o.active);
      if (p && is_schedulable(w, o, *p)) out.push_back({o.oid, p->pid});
      continue;
    }
    for (const auto& p : o.procs) {
      if (is_schedulable(w, o, p)) out.push_back({o.oid, p.pid});
    }
  }
  return out;
}

namespace {

std::pair<ObjectState*, Process*> locate(World& w, Pid pid) {
  for (auto& o : w.objects) {
    if (Process* p = o.find(pid)) return {&o, p};
  }
  return {nullptr, nullptr};
}

// Stop points of the segment's own process once it has moved.
bool reached_stop(World& w, ObjectState& o, Process& p) {
  const Stmt* s = p.current();
  if (!s) return false;
  if (p.awaiting) {
    if (s->kind != StmtKind::AwaitCall) return false;
    const auto [callee_obj, callee] = locate(w, *p.awaiting);
    if (callee) return !callee->method().protocol;
    return false;
  }
  if (s->kind == StmtKind::Await) {
    if (o.active && *o.active == p.pid) o.active.reset();
    return true;
  }
  return at_sync_point(w, o, p);
}

}  // namespace

std::optional<CoarseOutcome> try_coarse_step(const World& w, StepChoice candidate, std::size_t fuel) {
  CoarseOutcome out{w, {}};
  World& g = out.world;
  Segment& seg = out.segment;
  seg.object = candidate.object;
  seg.pid = candidate.pid;
  {
    const ObjectState& o = g.object(candidate.object);
    const Process* p = o.find(candidate.pid);
    if (!p || !is_schedulable(g, o, *p)) return std::nullopt;
    seg.method = p->method().name;
    seg.from_method = p->stack.back().method->name;
    if (p->started) {
      const Stmt* s = p->current();
      seg.from_point = s ? s->id : 0;
      seg.from_label = s ? s->label : std::string();
    }
  }

  std::vector<Pid> helpers;
  bool own_alive = true;
  bool own_stopped = false;
  bool any_helper = false;
  bool any_protocol = false;
  while (true) {
    if (seg.fine_steps > fuel) {
      throw RuntimeFault("coarse step of " + seg.method + " exceeded " + std::to_string(fuel) + " fine steps");
    }
    std::optional<StepChoice> next;
    if (own_alive && !own_stopped) {
      auto [o, p] = locate(g, seg.pid);
      if (is_schedulable(g, *o, *p)) next = StepChoice{o->oid, p->pid};
    }
    if (!next) {
      std::sort(helpers.begin(), helpers.end());
      for (Pid h : helpers) {
        auto [o, p] = locate(g, h);
        if (p && is_schedulable(g, *o, *p)) {
          next = StepChoice{o->oid, h};
          break;
        }
      }
    }
    if (!next) {
      if ((own_stopped || !own_alive) && helpers.empty()) break;
      return std::nullopt;
    }
    {
      auto [o, p] = locate(g, next->pid);
      if (in_protocol(*p)) any_protocol = true;
    }
    if (next->pid != seg.pid) any_helper = true;
    const StepEffects eff = step(g, *next);
    ++seg.fine_steps;
    seg.trace.push_back(*next);
    // Synchronous callees and protocol processes belong to the segment;
    // other spawned work is left in the pools.
    const bool sync_issue = eff.executed && eff.executed->kind == StmtKind::SyncCall;
    for (Pid s : eff.spawned) {
      const Process* p = locate(g, s).second;
      if (p->method().protocol || (p->has_waiter && sync_issue)) helpers.push_back(s);
    }
    if (next->pid == seg.pid) {
      if (eff.terminated) {
        own_alive = false;
        seg.terminated = true;
        seg.end_locals = eff.final_locals;
        seg.end_fields = g.object(seg.object).fields;
      } else {
        auto [o, p] = locate(g, seg.pid);
        own_stopped = reached_stop(g, *o, *p);
      }
    } else if (eff.terminated) {
      helpers.erase(std::remove(helpers.begin(), helpers.end(), next->pid), helpers.end());
    }
  }

  if (own_alive) {
    auto [o, p] = locate(g, seg.pid);
    seg.end_locals = p->stack.front().locals;
    seg.end_fields = o->fields;
  }
  seg.kind = any_protocol ? SegmentKind::Broadcast : any_helper ? SegmentKind::Rendezvous : SegmentKind::Local;
  if (!is_stable(g)) {
    throw RuntimeFault("coarse step of " + seg.method + " ended outside a stable state:\n" + describe(g));
  }
  return out;
}

std::vector<CoarseOutcome> coarse_successors(const World& w) {
  std::vector<CoarseOutcome> out;
  for (const auto& c : coarse_candidates(w)) {
    if (auto r = try_coarse_step(w, c)) out.push_back(std::move(*r));
  }
  return out;
}

namespace {

std::string cycle_text(const std::vector<ObjRef>& cycle) {
  std::string s = "deadlock:";
  for (const auto& r : cycle) s += " #" + std::to_string(r.oid) + " ->";
  if (!cycle.empty()) s += " #" + std::to_string(cycle.front().oid);
  return s;
}

}  // namespace

Deadlock::Deadlock(std::vector<ObjRef> cycle) : Stuck(cycle_text(cycle)), cycle_(std::move(cycle)) {}

CoarseOutcome coarse_step(const World& w, std::uint64_t seed) {
  auto candidates = coarse_candidates(w);
  std::mt19937_64 rng(seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  for (const auto& c : candidates) {
    if (auto r = try_coarse_step(w, c)) return std::move(*r);
  }
  if (auto cycle = wait_for_cycle(w)) throw Deadlock(std::move(*cycle));
  throw Stuck("no process can reach a stable state (" + std::to_string(w.process_count()) + " processes left)");
}

std::optional<std::vector<ObjRef>> wait_for_cycle(const World& w) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const auto& o : w.objects) {
    if (!o.active) continue;
    const Process* p = o.find(*o.active);
    if (!p) continue;
    if (p->awaiting) {
      const Future* f = w.future(*p->awaiting);
      if (f && f->value) continue;
      for (const auto& other : w.objects) {
        if (other.find(*p->awaiting) && other.oid != o.oid) edges.emplace_back(o.oid.oid, other.oid.oid);
      }
    } else if (const Stmt* s = p->current(); s && s->kind == StmtKind::SyncCall) {
      const ObjRef target = s->expr(context(o, *p)).as_ref();
      if (target != o.oid) edges.emplace_back(o.oid.oid, target.oid);
    }
  }
  // Every held object has at most one outgoing edge, so following edges finds any cycle.
  for (const auto& [start, first] : edges) {
    std::vector<std::uint32_t> path{start};
    std::uint32_t cur = first;
    while (true) {
      auto hit = std::find(path.begin(), path.end(), cur);
      if (hit != path.end()) {
        std::vector<ObjRef> cycle;
        for (auto it = hit; it != path.end(); ++it) cycle.push_back(ObjRef{*it});
        return cycle;
      }
      path.push_back(cur);
      auto e = std::find_if(edges.begin(), edges.end(), [&](const auto& x) { return x.first == cur; });
      if (e == edges.end()) break;
      cur = e->second;
    }
  }
  return std::nullopt;
}

bool all_terminated(const World& w) { return w.process_count() == 0; }

FineReach explore_fine(const World& w0, std::size_t state_bound) {
  FineReach r;
  std::unordered_map<std::string, std::size_t> seen;
  seen.emplace(canonical_key(w0), 0);
  r.states.push_back(w0);
  for (std::size_t i = 0; i < r.states.size(); ++i) {
    for (const auto& c : schedulable(r.states[i])) {
      World next = r.states[i];
      step(next, c);
      auto [it, inserted] = seen.emplace(canonical_key(next), r.states.size());
      if (!inserted) continue;
      if (r.states.size() >= state_bound) {
        r.truncated = true;
        return r;
      }
      r.states.push_back(std::move(next));
    }
  }
  return r;
}

DiamondReport diamond_check(const World& w0, std::size_t state_bound) {
  DiamondReport rep;
  const FineReach reach = explore_fine(w0, state_bound);
  rep.states = reach.states.size();
  rep.truncated = reach.truncated;
  auto enabled_in = [](const World& w, StepChoice c) {
    for (const auto& o : w.objects) {
      if (o.oid != c.object) continue;
      const Process* p = o.find(c.pid);
      return p && is_schedulable(w, o, *p);
    }
    return false;
  };
  for (std::size_t i = 0; i < reach.states.size(); ++i) {
    const World& w = reach.states[i];
    const auto steps = schedulable(w);
    for (std::size_t a = 0; a < steps.size(); ++a) {
      for (std::size_t b = a + 1; b < steps.size(); ++b) {
        if (steps[a].object == steps[b].object) continue;
        ++rep.pairs_checked;
        World ab = w;
        step(ab, steps[a]);
        World ba = w;
        step(ba, steps[b]);
        if (!enabled_in(ab, steps[b]) || !enabled_in(ba, steps[a])) {
          std::vector<std::string> left;
          for (auto& [c, s] : enumerate_fine_steps(ab)) left.push_back(canonical_key(s));
          std::sort(left.begin(), left.end());
          bool joined = false;
          for (auto& [c, s] : enumerate_fine_steps(ba)) {
            if (std::binary_search(left.begin(), left.end(), canonical_key(s))) {
              joined = true;
              break;
            }
          }
          if (!joined) rep.failures.push_back({i, steps[a], steps[b], "no common successor"});
          continue;
        }
        step(ab, steps[b]);
        step(ba, steps[a]);
        if (canonical_key(ab) != canonical_key(ba)) {
          rep.failures.push_back({i, steps[a], steps[b], "orders disagree:\n" + describe(ab) + "vs\n" + describe(ba)});
        }
      }
    }
  }
  return rep;
}

}  // namespace mms::actor
