#include "mms/model/model.hpp"

#include <stdexcept>

namespace mms::model {

using actor::Expr;
using actor::Stmts;
using actor::Value;
using actor::ValueList;
using Ctx = actor::EvalContext;

namespace {

// Expression vocabulary of the behaviors, printed in the modeling
// language's concrete syntax.

Expr status_lit(std::string tag) { return actor::lit(actor::ctor(tag), tag); }
Expr nothing_lit() { return actor::lit(actor::nothing(), "Nothing"); }
Expr nil_lit() { return actor::lit(Value(ValueList{}), "Nil"); }
Expr true_lit() { return actor::lit(Value(true), "True"); }
Expr false_lit() { return actor::lit(Value(false), "False"); }

Expr just_of(Expr e) {
  return actor::fn("Just(" + e.text + ")", [e](const Ctx& c) { return actor::just(e(c)); });
}

Expr eq(Expr a, Expr b) {
  return actor::fn(a.text + " == " + b.text, [a, b](const Ctx& c) { return Value(a(c) == b(c)); });
}

Expr ne(Expr a, Expr b) {
  return actor::fn(a.text + " != " + b.text, [a, b](const Ctx& c) { return Value(!(a(c) == b(c))); });
}

Expr and_(Expr a, Expr b) {
  return actor::fn(a.text + " && " + b.text,
                   [a, b](const Ctx& c) { return Value(a(c).as_bool() && b(c).as_bool()); });
}

Expr lookup(Expr m, Expr n) {
  return actor::fn("lookup(" + m.text + ", " + n.text + ")", [m, n](const Ctx& c) {
    const Value map = m(c);
    const Value* v = actor::map_lookup(map.as_map(), n(c).as_int());
    return v ? actor::just(*v) : actor::nothing();
  });
}

Expr lookup_default(Expr m, Expr n, Expr d) {
  return actor::fn("lookupDefault(" + m.text + ", " + n.text + ", " + d.text + ")", [m, n, d](const Ctx& c) {
    const Value map = m(c);
    const Value* v = actor::map_lookup(map.as_map(), n(c).as_int());
    return v ? *v : d(c);
  });
}

Expr put(Expr m, Expr n, Expr v) {
  return actor::fn("put(" + m.text + ", " + n.text + ", " + v.text + ")", [m, n, v](const Ctx& c) {
    return Value(actor::map_put(m(c).as_map(), n(c).as_int(), v(c)));
  });
}

Expr remove_key(Expr m, Expr n) {
  return actor::fn("removeKey(" + m.text + ", " + n.text + ")", [m, n](const Ctx& c) {
    return Value(actor::map_remove(m(c).as_map(), n(c).as_int()));
  });
}

Expr fst(Expr p) {
  return actor::fn("fst(" + p.text + ")", [p](const Ctx& c) { return p(c).as_ctor().args.at(0); });
}

Expr snd(Expr p) {
  return actor::fn("snd(" + p.text + ")", [p](const Ctx& c) { return p(c).as_ctor().args.at(1); });
}

Expr from_just(Expr e) {
  return actor::fn("fromJust(" + e.text + ")", [e](const Ctx& c) {
    const Value v = e(c);
    if (!v.is_ctor("Just")) throw actor::TypeError("fromJust(" + actor::to_text(v) + ")");
    return v.as_ctor().args.at(0);
  });
}

Expr ctor1(std::string tag, Expr arg) {
  return actor::fn(tag + "(" + arg.text + ")", [tag, arg](const Ctx& c) { return actor::ctor(tag, {arg(c)}); });
}

Expr cons(Expr head, Expr tail) {
  return actor::fn("Cons(" + head.text + ", " + tail.text + ")", [head, tail](const Ctx& c) {
    ValueList l{head(c)};
    const Value rest = tail(c);
    const auto& t = rest.as_list();
    l.insert(l.end(), t.begin(), t.end());
    return Value(std::move(l));
  });
}

// Occupant of n's slot paired with its status; a free slot yields n itself.
Expr select_slot() {
  return actor::fn("select(cacheMemory, n)", [](const Ctx& c) {
    const auto& mem = c["cacheMemory"];
    const auto capacity = static_cast<std::size_t>(c["capacity"].as_int());
    const auto n = c["n"].as_int();
    const tss::MemoryMap mm = memory_from_value(mem, capacity);
    const auto slot = tss::select(mm, tss::Address{static_cast<std::uint32_t>(n)});
    const Value* st = actor::map_lookup(mem.as_map(), slot.value);
    return actor::ctor("Pair", {Value(static_cast<std::int64_t>(slot.value)), st ? *st : actor::ctor("In")});
  });
}

Expr append_event(std::string kind) {
  return actor::fn("eventLog ++ [" + kind + "(id, n)]", [kind](const Ctx& c) {
    ValueList log = c["eventLog"].as_list();
    log.push_back(actor::ctor(kind, {c["id"], c["n"]}));
    return Value(std::move(log));
  });
}

Expr without(Expr list, Expr elem) {
  return actor::fn("remove(" + list.text + ", " + elem.text + ")", [list, elem](const Ctx& c) {
    ValueList out;
    const Value e = elem(c);
    const Value items = list(c);
    for (const auto& v : items.as_list()) {
      if (!(v == e)) out.push_back(v);
    }
    return Value(std::move(out));
  });
}

Expr size_of(Expr list) {
  return actor::fn("size(" + list.text + ")", [list](const Ctx& c) {
    return Value(static_cast<std::int64_t>(list(c).as_list().size()));
  });
}

Expr add_int(Expr a, std::int64_t k) {
  const std::string op = k < 0 ? " - " : " + ";
  return actor::fn(a.text + op + std::to_string(k < 0 ? -k : k),
                   [a, k](const Ctx& c) { return Value(a(c).as_int() + k); });
}

using actor::async_call;
using actor::assign;
using actor::await_;
using actor::await_call;
using actor::for_each;
using actor::if_;
using actor::new_;
using actor::p_any;
using actor::p_cons;
using actor::p_ctor;
using actor::p_var;
using actor::return_;
using actor::self_ref;
using actor::skip;
using actor::switch_;
using actor::sync_call;
using actor::var;

Expr n() { return var("n"); }
Expr cache_memory() { return var("cacheMemory"); }

actor::Behavior core_behavior(const ModelOptions& opt) {
  actor::Behavior b;
  b.kind = "Core";
  Stmts read_hit;
  if (opt.mutation != Mutation::SkipReadHistoryAppend) read_hit.push_back(assign("eventLog", append_event("R")));
  read_hit.push_back(assign("currentTask", var("rest")));

  Stmts body{if_(
      ne(var("currentTask"), nil_lit()),
      {switch_(
           var("currentTask"),
           {{p_cons(p_var("rst"), p_var("rest")),
             {switch_(
                 var("rst"),
                 {{p_ctor("Read", {p_var("n")}),
                   {sync_call("removed", var("l1"), "remove_inv", {n()}).labelled("read.remove_inv"),
                    if_(var("removed"),
                        {async_call(var("l1"), "fetch", {n()}),
                         assign("currentTask", cons(ctor1("ReadBl", n()), var("rest")))},
                        read_hit)}},
                  {p_ctor("ReadBl", {p_var("n")}),
                   {sync_call("status", var("l1"), "getStatus", {n()}).labelled("readbl.getStatus"),
                    if_(ne(var("status"), nothing_lit()),
                        {assign("currentTask", cons(ctor1("Read", n()), var("rest")))})}},
                  {p_ctor("Write", {p_var("n")}),
                   {sync_call("status", var("l1"), "getStatus", {n()}).labelled("write.getStatus"),
                    switch_(var("status"),
                            {{p_ctor("Just", {p_ctor("Mo")}),
                              {assign("eventLog", append_event("W")), assign("currentTask", var("rest"))}},
                             {p_ctor("Just", {p_ctor("Sh")}),
                              {sync_call("res", var("l1"), "broadcastX", {n()}).labelled("write.broadcastX"),
                               if_(var("res"),
                                   {assign("eventLog", append_event("W")), assign("currentTask", var("rest"))})}},
                             {p_any(),
                              {sync_call("removed", var("l1"), "remove_inv", {n()}).labelled("write.remove_inv"),
                               if_(var("removed"),
                                   {async_call(var("l1"), "fetch", {n()}),
                                    assign("currentTask", cons(ctor1("WriteBl", n()), var("rest")))})}}})}},
                  {p_ctor("WriteBl", {p_var("n")}),
                   {sync_call("status", var("l1"), "getStatus", {n()}).labelled("writebl.getStatus"),
                    if_(ne(var("status"), nothing_lit()),
                        {assign("currentTask", cons(ctor1("Write", n()), var("rest")))})}}})}}}),
       async_call(self_ref(), "run")})};
  b.add("run", {}, std::move(body));
  return b;
}

actor::Behavior cache_behavior(const ModelOptions& opt) {
  actor::Behavior b;
  b.kind = "Cache";

  b.add("getStatus", {"n"}, {return_(lookup(cache_memory(), n()))});

  b.add("remove_inv", {"n"},
        {assign("answer", false_lit()),
         switch_(lookup(cache_memory(), n()),
                 {{p_ctor("Nothing"), {assign("answer", true_lit())}},
                  {p_ctor("Just", {p_ctor("In")}),
                   {assign("cacheMemory", remove_key(cache_memory(), n())), assign("answer", true_lit())}},
                  {p_any(), {skip()}}}),
         return_(var("answer"))});

  b.add("broadcastX", {"n"},
        {assign("res", false_lit()), await_call("", var("bus"), "lock"),
         if_(eq(lookup(cache_memory(), n()), just_of(status_lit("Sh"))),
             {sync_call("", var("bus"), "sendRdX", {self_ref(), n()}),
              assign("cacheMemory", put(cache_memory(), n(), status_lit("Mo"))), assign("res", true_lit())}),
         sync_call("", var("bus"), "release"), return_(var("res"))});

  b.add("receiveRdX", {"n", "start", "end"},
        {await_call("", var("start"), "synchronise"),
         switch_(lookup(cache_memory(), n()),
                 {{p_ctor("Just", {p_ctor("Sh")}), {assign("cacheMemory", put(cache_memory(), n(), status_lit("In")))}},
                  {p_any(), {skip()}}}),
         sync_call("", var("end"), "synchronise")},
        true);

  Stmts install_after_swap;
  if (opt.mutation == Mutation::EvictWithoutInstall) {
    install_after_swap.push_back(if_(ne(fst(var("selected")), n()),
                                     {assign("cacheMemory", remove_key(cache_memory(), fst(var("selected"))))},
                                     {assign("cacheMemory", put(cache_memory(), n(), from_just(var("s"))))}));
  } else {
    install_after_swap.push_back(if_(ne(fst(var("selected")), n()),
                                     {assign("cacheMemory", remove_key(cache_memory(), fst(var("selected"))))}));
    install_after_swap.push_back(assign("cacheMemory", put(cache_memory(), n(), from_just(var("s")))));
  }

  b.add("fetch", {"n"},
        {switch_(var("nextLevel"),
                 {{p_ctor("Just", {p_var("nextCache")}),
                   {sync_call("removed", var("nextCache"), "remove_inv", {n()}).labelled("fetch.remove_inv"),
                    if_(var("removed"),
                        {async_call(var("nextCache"), "fetch", {n()}), async_call(self_ref(), "fetchBl", {n()})},
                        {assign("selected", select_slot()),
                         sync_call("s", var("nextCache"), "swap", {n(), var("selected")}).labelled("fetch.swap"),
                         if_(ne(var("s"), nothing_lit()), std::move(install_after_swap),
                             {async_call(self_ref(), "fetch", {n()})})})}},
                  {p_any(), {sync_call("", self_ref(), "broadcast", {n()}), async_call(self_ref(), "fetchBl", {n()})}}})});

  b.add("broadcast", {"n"},
        {await_call("", var("bus"), "lock"), sync_call("", var("bus"), "sendRd", {self_ref(), n()}),
         sync_call("", var("bus"), "release")});

  b.add("swap", {"n_out", "n_in"},
        {assign("tmp", nothing_lit()),
         switch_(lookup(cache_memory(), var("n_out")),
                 {{p_ctor("Nothing"), {skip()}},
                  {p_ctor("Just", {p_ctor("In")}), {skip()}},
                  {p_any(),
                   {assign("tmp", lookup(cache_memory(), var("n_out"))),
                    assign("cacheMemory", remove_key(cache_memory(), var("n_out"))),
                    if_(ne(fst(var("n_in")), var("n_out")),
                        {assign("cacheMemory", put(cache_memory(), fst(var("n_in")), snd(var("n_in"))))})}}}),
         return_(var("tmp"))});

  b.add("receiveRd", {"n", "start", "end"},
        {await_call("", var("start"), "synchronise"),
         switch_(lookup(cache_memory(), n()),
                 {{p_ctor("Just", {p_ctor("Mo")}), {async_call(self_ref(), "flush", {n()})}}, {p_any(), {skip()}}}),
         async_call(var("end"), "synchronise")},
        true);

  auto install = [&](std::string label, bool evict) {
    Stmts done;
    if (evict) done.push_back(assign("cacheMemory", remove_key(cache_memory(), fst(var("selected")))));
    done.push_back(assign("cacheMemory", put(cache_memory(), n(), from_just(var("status")))));
    Stmts path{sync_call("status", var("mainMemory"), "getStatus", {n()}).labelled(std::move(label))};
    if (opt.require_shared_main) {
      path.push_back(if_(eq(var("status"), just_of(status_lit("Sh"))), std::move(done),
                         {async_call(self_ref(), "fetchBl", {n()})}));
    } else {
      for (auto& s : done) path.push_back(std::move(s));
    }
    return path;
  };

  b.add("fetchBl", {"n"},
        {switch_(var("nextLevel"),
                 {{p_ctor("Just", {p_var("nextCache")}),
                   {sync_call("status", var("nextCache"), "getStatus", {n()}).labelled("fetchBl.next.getStatus"),
                    if_(eq(var("status"), nothing_lit()), {async_call(self_ref(), "fetchBl", {n()})},
                        {async_call(self_ref(), "fetch", {n()})})}},
                  {p_any(),
                   {assign("selected", select_slot()),
                    if_(and_(ne(fst(var("selected")), n()), eq(snd(var("selected")), status_lit("Mo"))),
                        {async_call(self_ref(), "flush", {fst(var("selected"))}),
                         async_call(self_ref(), "fetchW", {n(), fst(var("selected"))})},
                        {if_(eq(fst(var("selected")), n()), install("fetchBl.main.install", false),
                             install("fetchBl.main.evict", true))})}}})});

  b.add("fetchW", {"n", "n_"},
        {await_(ne(lookup_default(cache_memory(), var("n_"), status_lit("In")), status_lit("Mo"))),
         async_call(self_ref(), "fetchBl", {n()})});

  b.add("flush", {"n"},
        {switch_(lookup(cache_memory(), n()),
                 {{p_ctor("Just", {p_ctor("Mo")}),
                   {sync_call("", var("mainMemory"), "setStatus", {n(), status_lit("Sh")}).labelled("flush.setStatus"),
                    assign("cacheMemory", put(cache_memory(), n(), status_lit("Sh")))}},
                  {p_any(), {skip()}}})});
  return b;
}

actor::Behavior bus_behavior(const ModelOptions& opt) {
  actor::Behavior b;
  b.kind = "Bus";
  b.initial_fields.set("unlocked", Value(true));
  b.idle = [](const actor::Env& f) { return f.get("unlocked").as_bool(); };
  b.add("lock", {}, {await_(var("unlocked")), assign("unlocked", false_lit())}, true);
  b.add("release", {}, {assign("unlocked", true_lit())}, true);
  auto send = [&](std::string receive, bool invalidate) {
    Stmts s{assign("receivers", without(var("network"), var("caller"))),
            assign("nrrecs", size_of(var("receivers"))),
            new_("start", "Barrier", {var("nrrecs")}),
            new_("end", "Barrier", {add_int(var("nrrecs"), 1)}),
            for_each("receiver", var("receivers"),
                     {async_call(var("receiver"), std::move(receive), {n(), var("start"), var("end")})}),
            sync_call("", var("end"), "synchronise")};
    if (invalidate && opt.mutation != Mutation::DropMainInvalidation) {
      s.push_back(sync_call("", var("mainMemory"), "setStatus", {n(), status_lit("In")}));
    }
    return s;
  };
  b.add("sendRd", {"caller", "n"}, send("receiveRd", false), true);
  b.add("sendRdX", {"caller", "n"}, send("receiveRdX", true), true);
  return b;
}

actor::Behavior main_memory_behavior() {
  actor::Behavior b;
  b.kind = "MainMemory";
  b.add("getStatus", {"n"}, {return_(lookup(var("memory"), n()))});
  b.add("setStatus", {"n", "s"}, {assign("memory", put(var("memory"), n(), var("s")))});
  return b;
}

actor::Behavior barrier_behavior() {
  actor::Behavior b;
  b.kind = "Barrier";
  b.ctor_params = {"participants"};
  b.add("synchronise", {},
        {assign("participants", add_int(var("participants"), -1)),
         await_(eq(var("participants"), actor::lit(Value(0), "0")))},
        true);
  return b;
}

std::function<bool(const Ctx&)> cond(Expr e) {
  return [e](const Ctx& c) { return e(c).as_bool(); };
}

std::function<bool(const Ctx&)> always() {
  return [](const Ctx&) { return true; };
}

std::function<std::int64_t(const Ctx&)> aux_of(Expr e) {
  return [e](const Ctx& c) { return e(c).as_int(); };
}

Clause clause(Expr condition, tss::RuleName rule, std::string rule_text = {},
              std::function<std::int64_t(const Ctx&)> aux = {}) {
  if (rule_text.empty()) rule_text = std::string(tss::to_string(rule));
  return Clause{condition.text, cond(condition), rule, std::move(rule_text), std::move(aux)};
}

Clause unconditional(tss::RuleName rule, std::function<std::int64_t(const Ctx&)> aux = {}) {
  return Clause{"true", always(), rule, std::string(tss::to_string(rule)), std::move(aux)};
}

std::vector<Annotation> annotation_table(const ModelOptions& opt) {
  using R = tss::RuleName;
  const Expr removed = var("removed");
  const Expr status = var("status");
  const Expr selected = var("selected");
  const Expr last_level = eq(var("nextLevel"), nothing_lit());
  std::vector<Annotation> t;
  t.push_back({"Core", "run", "read.remove_inv", false,
               {clause(eq(removed, true_lit()), R::PrRd2), clause(eq(removed, false_lit()), R::PrRd1)}});
  t.push_back({"Core", "run", "readbl.getStatus", false, {clause(ne(status, nothing_lit()), R::PrRd3)}});
  t.push_back({"Core", "run", "write.getStatus", false,
               {clause(eq(status, just_of(status_lit("Mo"))), R::PrWr1)}});
  t.push_back({"Core", "run", "write.broadcastX", false,
               {clause(eq(var("res"), true_lit()), R::SynchX, "PrWr2/SynchX")}});
  t.push_back({"Core", "run", "write.remove_inv", false, {clause(eq(removed, true_lit()), R::PrWr3)}});
  t.push_back({"Core", "run", "writebl.getStatus", false, {clause(ne(status, nothing_lit()), R::PrWr4)}});

  t.push_back({"Cache", "fetch", std::string(kEntryPoint), false, {clause(last_level, R::Synch, "LLCMiss/Synch")}});
  t.push_back({"Cache", "fetch", "fetch.remove_inv", false, {clause(eq(removed, true_lit()), R::LCMiss)}});
  t.push_back({"Cache", "fetch", "fetch.swap", false,
               {clause(and_(ne(var("s"), nothing_lit()), eq(fst(selected), n())), R::LCHit2),
                clause(and_(ne(var("s"), nothing_lit()), ne(fst(selected), n())), R::LCHit1, {},
                       aux_of(fst(selected)))}});

  t.push_back({"Cache", "fetchBl", std::string(kEntryPoint), true,
               {clause(and_(last_level, and_(ne(fst(selected), n()), eq(snd(selected), status_lit("Mo")))),
                       R::FetchBl3, {}, aux_of(fst(selected)))}});
  t.push_back({"Cache", "fetchBl", "fetchBl.next.getStatus", true,
               {clause(ne(status, nothing_lit()), R::LCFetchUnblock)}});
  if (opt.require_shared_main) {
    t.push_back({"Cache", "fetchBl", "fetchBl.main.install", true,
                 {clause(eq(status, just_of(status_lit("Sh"))), R::FetchBl1)}});
    t.push_back({"Cache", "fetchBl", "fetchBl.main.evict", true,
                 {clause(eq(status, just_of(status_lit("Sh"))), R::FetchBl2, {}, aux_of(fst(selected)))}});
  } else {
    t.push_back({"Cache", "fetchBl", "fetchBl.main.install", true, {unconditional(R::FetchBl1)}});
    t.push_back({"Cache", "fetchBl", "fetchBl.main.evict", true,
                 {unconditional(R::FetchBl2, aux_of(fst(selected)))}});
  }

  t.push_back({"Cache", "fetchW", std::string(kEntryPoint), false, {unconditional(R::FetchW, aux_of(var("n_")))}});
  t.push_back({"Cache", "flush", std::string(kEntryPoint), false,
               {clause(ne(lookup(cache_memory(), n()), just_of(status_lit("Mo"))), R::Flush2)}});
  t.push_back({"Cache", "flush", "flush.setStatus", false, {unconditional(R::Flush1)}});
  return t;
}

}  // namespace

std::string_view to_string(Mutation m) {
  switch (m) {
    case Mutation::None: return "none";
    case Mutation::DropMainInvalidation: return "drop-main-invalidation";
    case Mutation::SkipReadHistoryAppend: return "skip-read-history-append";
    case Mutation::EvictWithoutInstall: return "evict-without-install";
  }
  return "?";
}

std::optional<Mutation> mutation_from_string(std::string_view s) {
  for (auto m : {Mutation::None, Mutation::DropMainInvalidation, Mutation::SkipReadHistoryAppend,
                 Mutation::EvictWithoutInstall}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

std::vector<Mutation> all_mutations() {
  return {Mutation::DropMainInvalidation, Mutation::SkipReadHistoryAppend, Mutation::EvictWithoutInstall};
}

const Annotation* Model::annotation(std::string_view kind, std::string_view method, std::string_view point) const {
  for (const auto& a : annotations) {
    if (a.kind == kind && a.method == method && a.point == point) return &a;
  }
  return nullptr;
}

Model build_model(const ModelOptions& options) {
  auto reg = std::make_shared<actor::Registry>();
  reg->add(core_behavior(options));
  reg->add(cache_behavior(options));
  reg->add(bus_behavior(options));
  reg->add(main_memory_behavior());
  reg->add(barrier_behavior());
  return Model{std::move(reg), annotation_table(options), options};
}

std::optional<tss::Subject> Layout::subject_of(actor::ObjRef r) const {
  for (std::size_t i = 0; i < cores.size(); ++i) {
    if (cores[i] == r) return tss::CoreId{static_cast<std::uint32_t>(i + 1)};
  }
  for (std::size_t i = 0; i < caches.size(); ++i) {
    if (caches[i] == r) {
      return tss::CacheId{tss::CoreId{static_cast<std::uint32_t>(i / levels + 1)},
                          static_cast<std::uint32_t>(i % levels + 1)};
    }
  }
  return std::nullopt;
}

Instance build_initial(const Model& model, const Scenario& scenario) {
  if (auto err = validation_error(scenario); !err.empty()) throw std::invalid_argument(err);
  Instance inst;
  actor::World& w = inst.world;
  Layout& lay = inst.layout;
  w.registry = model.registry;
  lay.levels = scenario.levels;
  lay.address_space = scenario.address_space;

  for (std::uint32_t c = 0; c < scenario.num_cores; ++c) lay.cores.push_back(w.add_object("Core", {}));
  for (std::uint32_t c = 0; c < scenario.num_cores; ++c) {
    for (std::uint32_t l = 0; l < scenario.levels; ++l) lay.caches.push_back(w.add_object("Cache", {}));
  }
  lay.bus = w.add_object("Bus", {});
  lay.main = w.add_object("MainMemory", {});

  actor::ValueMap memory;
  for (std::uint32_t a = 0; a < scenario.address_space; ++a) {
    memory.push_back({static_cast<std::int64_t>(a), status_value(tss::Status::Sh)});
  }
  w.object(lay.main).fields.set("memory", Value(std::move(memory)));

  ValueList network;
  for (auto r : lay.caches) network.push_back(Value(r));
  auto& bus = w.object(lay.bus).fields;
  bus.set("network", Value(std::move(network)));
  bus.set("mainMemory", Value(lay.main));

  for (std::uint32_t c = 0; c < scenario.num_cores; ++c) {
    for (std::uint32_t l = 0; l < scenario.levels; ++l) {
      auto& f = w.object(lay.caches[c * scenario.levels + l]).fields;
      f.set("cacheMemory", Value(actor::ValueMap{}));
      f.set("capacity", Value(static_cast<std::int64_t>(scenario.capacities[l])));
      f.set("nextLevel", l + 1 < scenario.levels ? actor::just(Value(lay.caches[c * scenario.levels + l + 1]))
                                                 : actor::nothing());
      f.set("mainMemory", Value(lay.main));
      f.set("bus", Value(lay.bus));
    }
    auto& core = w.object(lay.cores[c]).fields;
    core.set("currentTask", task_value(scenario.patterns[c]));
    core.set("l1", Value(lay.caches[c * scenario.levels]));
    core.set("eventLog", Value(ValueList{}));
    core.set("id", Value(static_cast<std::int64_t>(c + 1)));
  }
  w.static_objects = w.next_oid;
  for (auto r : lay.cores) w.spawn(r, "run", {});
  return inst;
}

Value status_value(tss::Status s) {
  switch (s) {
    case tss::Status::Mo: return actor::ctor("Mo");
    case tss::Status::Sh: return actor::ctor("Sh");
    case tss::Status::Inv: return actor::ctor("In");
  }
  return {};
}

tss::Status status_from_value(const Value& v) {
  const auto& tag = v.as_ctor().tag;
  if (tag == "Mo") return tss::Status::Mo;
  if (tag == "Sh") return tss::Status::Sh;
  if (tag == "In") return tss::Status::Inv;
  throw actor::TypeError("not a status: " + actor::to_text(v));
}

Value task_value(const tss::Task& t) {
  ValueList l;
  for (const auto& s : t) {
    const char* tag = "Read";
    switch (s.op) {
      case tss::RuntimeStmt::Op::Read: tag = "Read"; break;
      case tss::RuntimeStmt::Op::ReadBl: tag = "ReadBl"; break;
      case tss::RuntimeStmt::Op::Write: tag = "Write"; break;
      case tss::RuntimeStmt::Op::WriteBl: tag = "WriteBl"; break;
    }
    l.push_back(actor::ctor(tag, {Value(static_cast<std::int64_t>(s.addr.value))}));
  }
  return Value(std::move(l));
}

tss::Task task_from_value(const Value& v) {
  tss::Task t;
  for (const auto& e : v.as_list()) {
    const auto& c = e.as_ctor();
    tss::RuntimeStmt s;
    if (c.tag == "Read") {
      s.op = tss::RuntimeStmt::Op::Read;
    } else if (c.tag == "ReadBl") {
      s.op = tss::RuntimeStmt::Op::ReadBl;
    } else if (c.tag == "Write") {
      s.op = tss::RuntimeStmt::Op::Write;
    } else if (c.tag == "WriteBl") {
      s.op = tss::RuntimeStmt::Op::WriteBl;
    } else {
      throw actor::TypeError("not a runtime statement: " + actor::to_text(e));
    }
    s.addr = tss::Address{static_cast<std::uint32_t>(c.args.at(0).as_int())};
    t.push_back(s);
  }
  return t;
}

tss::EventLog log_from_value(const Value& v) {
  tss::EventLog log;
  for (const auto& e : v.as_list()) {
    const auto& c = e.as_ctor();
    tss::Event ev;
    ev.kind = c.tag == "W" ? tss::Event::Kind::W : tss::Event::Kind::R;
    ev.core = tss::CoreId{static_cast<std::uint32_t>(c.args.at(0).as_int())};
    ev.addr = tss::Address{static_cast<std::uint32_t>(c.args.at(1).as_int())};
    log.push_back(ev);
  }
  return log;
}

tss::MemoryMap memory_from_value(const Value& v, std::size_t capacity) {
  tss::MemoryMap m(capacity);
  for (const auto& e : v.as_map()) m.set(tss::Address{static_cast<std::uint32_t>(e.key)}, status_from_value(e.value));
  return m;
}

}  // namespace mms::model
