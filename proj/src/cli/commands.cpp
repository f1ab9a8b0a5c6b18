#include "mms/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <memory>
#include <optional>

#include "mms/actor/runtime.hpp"
#include "mms/conformance/conformance.hpp"
#include "mms/scenario_io.hpp"
#include "mms/tss/semantics.hpp"

namespace mms::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr std::size_t kReportedItems = 20;

struct CommonArgs {
  std::string scenario = "S0";
  std::uint64_t seed = 0;
  std::size_t seeds = 1;
  std::size_t max_steps = 100000;
  std::size_t max_fine_steps = 100000;
  std::size_t depth = 8;
  std::size_t state_bound = 1'000'000;
  std::string trace;
  std::string dump_annotations;
  bool no_main_guard = false;
  std::string mutation = "none";
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Writes one JSON object per line; a closed sink discards records.
class TraceSink {
 public:
  explicit TraceSink(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw UsageError("trace: cannot open '" + path + "'");
  }
  bool open() const { return file_ != nullptr; }
  void write(const json& record) {
    if (!file_) return;
    *file_ << record.dump() << '\n';
    if (!*file_) throw UsageError("trace: write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

model::ModelOptions model_options(const CommonArgs& a) {
  model::ModelOptions o;
  o.require_shared_main = !a.no_main_guard;
  auto m = model::mutation_from_string(a.mutation);
  if (!m) throw UsageError("--mutation: unknown mutation '" + a.mutation + "'");
  o.mutation = *m;
  return o;
}

json history_json(const tss::Configuration& cf) {
  json out = json::object();
  for (const auto& c : cf.cores) out[tss::to_string(c.id)] = tss::to_string(c.log);
  return out;
}

json annotations_json(const model::Model& m) {
  json out = json::array();
  for (const auto& a : m.annotations) {
    json clauses = json::array();
    for (const auto& c : a.clauses) clauses.push_back({{"condition", c.condition}, {"rule", c.rule_text}});
    out.push_back({{"kind", a.kind},
                   {"method", a.method},
                   {"point", a.point},
                   {"reconstructed", a.reconstructed},
                   {"clauses", std::move(clauses)}});
  }
  return out;
}

void dump_annotations(const CommonArgs& a, const model::Model& m) {
  if (a.dump_annotations.empty()) return;
  std::ofstream f(a.dump_annotations, std::ios::binary | std::ios::trunc);
  if (!f) throw UsageError("dump-annotations: cannot open '" + a.dump_annotations + "'");
  f << annotations_json(m).dump(2) << '\n';
}

json step_json(const conformance::StepRecord& r, std::size_t step, std::uint64_t seed) {
  const auto& v = r.verdict;
  json j;
  j["step"] = step;
  j["engine"] = "actor";
  j["seed"] = seed;
  j["object"] = r.object;
  j["method"] = r.method;
  j["point"] = r.point;
  j["kind"] = std::string(actor::to_string(r.kind));
  j["fine_steps"] = r.fine_steps;
  j["rule"] = v.rule ? std::string(tss::to_string(v.rule->rule)) : std::string("silent");
  j["instance"] = v.rule ? json(tss::to_string(*v.rule)) : json(nullptr);
  j["alpha_before"] = r.alpha_before;
  j["alpha_after"] = r.alpha_after;
  j["env"] = r.env;
  j["violation"] = v.kind == conformance::Verdict::Kind::Violation;
  if (!v.reason.empty()) j["reason"] = v.reason;
  return j;
}

json violation_json(const conformance::Verdict& v) {
  json j;
  j["rule"] = v.rule ? json(tss::to_string(*v.rule)) : json(nullptr);
  j["clause"] = v.clause;
  j["reason"] = v.reason;
  j["before"] = v.before;
  j["after"] = v.after;
  if (!v.expected.empty()) j["expected"] = v.expected;
  return j;
}

int finish(std::ostream& out, const json& report, bool violation) {
  out << report.dump(2) << '\n';
  return violation ? kExitViolation : kExitClean;
}

// Seeded actor runs: simulate judges termination, check-sim judges conformance.
int run_actor(const CommonArgs& a, bool judge_termination, std::ostream& out) {
  const Scenario s = load_scenario(a.scenario);
  const model::Model m = model::build_model(model_options(a));
  dump_annotations(a, m);
  TraceSink trace(a.trace);
  json runs = json::array();
  json violations = json::array();
  std::size_t total_steps = 0;
  std::size_t trace_step = 0;
  std::size_t terminated = 0;
  std::map<std::string, std::size_t> rule_counts;
  for (std::size_t k = 0; k < a.seeds; ++k) {
    const std::uint64_t seed = a.seed + k;
    conformance::SimOptions so;
    so.seed = seed;
    so.max_steps = a.max_steps;
    so.max_fine_steps = judge_termination ? a.max_fine_steps : SIZE_MAX;
    if (trace.open()) so.on_step = [&](const conformance::StepRecord& r) { trace.write(step_json(r, trace_step++, seed)); };
    const auto rep = conformance::check_simulation(m, s, so);
    total_steps += rep.steps;
    terminated += rep.terminated ? 1 : 0;
    for (const auto& [rule, n] : rep.rule_counts) rule_counts[std::string(tss::to_string(rule))] += n;
    json run;
    run["seed"] = seed;
    run["steps"] = rep.steps;
    run["silent"] = rep.silents;
    run["fine_steps"] = rep.fine_steps;
    run["terminated"] = rep.terminated;
    run["stale_accesses"] = rep.stale_accesses;
    run["violations"] = rep.violations.size();
    run["history"] = history_json(rep.final_alpha);
    if (!rep.stuck.empty()) run["stuck"] = rep.stuck;
    for (const auto& v : rep.violations) {
      if (violations.size() < kReportedItems) {
        json vj = violation_json(v);
        vj["seed"] = seed;
        violations.push_back(std::move(vj));
      }
    }
    if (judge_termination && !rep.terminated && violations.size() < kReportedItems) {
      violations.push_back({{"seed", seed}, {"reason", "did not terminate within the step bounds"}});
    }
    if (judge_termination && rep.terminated) {
      if (auto po = conformance::program_order_violation(rep.final_alpha, s); po && violations.size() < kReportedItems) {
        violations.push_back({{"seed", seed}, {"reason", *po}});
      }
    }
    runs.push_back(std::move(run));
  }
  json report;
  report["command"] = judge_termination ? "simulate" : "check-sim";
  report["scenario"] = s.name;
  report["main_guard"] = !a.no_main_guard;
  report["mutation"] = a.mutation;
  report["seeds"] = a.seeds;
  report["steps"] = total_steps;
  report["terminated_runs"] = terminated;
  report["rule_counts"] = rule_counts;
  report["runs"] = std::move(runs);
  const bool bad = !violations.empty();
  report["violation_count"] = violations.size();
  report["violations"] = std::move(violations);
  return finish(out, report, bad);
}

int run_explore(const CommonArgs& a, std::ostream& out) {
  const Scenario s = load_scenario(a.scenario);
  tss::ExploreOptions eo;
  eo.state_bound = a.state_bound;
  eo.record_edges = true;
  eo.rules.require_shared_main = !a.no_main_guard;
  const auto rep = tss::explore(initial_configuration(s), eo);
  TraceSink trace(a.trace);
  std::size_t stale = 0;
  for (std::size_t i = 0; i < rep.edges.size(); ++i) {
    const auto& e = rep.edges[i];
    if (e.rule.rule == tss::RuleName::PrRd1 || e.rule.rule == tss::RuleName::PrWr1) {
      if (conformance::foreign_modified_holder(rep.states[e.from], std::get<tss::CoreId>(e.rule.subject), e.rule.addr)) {
        ++stale;
      }
    }
    trace.write({{"step", i},
                 {"engine", "tss"},
                 {"from", e.from},
                 {"to", e.to},
                 {"subject", tss::to_string(e.rule.subject)},
                 {"rule", std::string(tss::to_string(e.rule.rule))},
                 {"instance", tss::to_string(e.rule)},
                 {"violation", false}});
  }
  json msi = json::array();
  std::size_t msi_count = 0;
  for (const auto& cf : rep.states) {
    for (auto& problem : tss::check_msi(cf)) {
      ++msi_count;
      if (msi.size() < kReportedItems) msi.push_back({{"state", tss::canonical_text(cf)}, {"problem", problem}});
    }
  }
  json terminals = json::array();
  std::size_t unfinished = 0;
  for (std::size_t i : rep.terminals) {
    const auto& cf = rep.states[i];
    const auto po = conformance::program_order_violation(cf, s);
    unfinished += po ? 1 : 0;
    terminals.push_back({{"history", history_json(cf)}, {"program_order", po ? json(*po) : json("ok")}});
  }
  json report;
  report["command"] = "explore";
  report["scenario"] = s.name;
  report["main_guard"] = !a.no_main_guard;
  report["states"] = rep.states.size();
  report["terminals"] = rep.terminals.size();
  report["edges"] = rep.edges.size();
  report["truncated"] = rep.truncated;
  report["msi_violations"] = msi_count;
  report["stale_accesses"] = stale;
  report["terminals_off_program_order"] = unfinished;
  report["summary"] = "states=" + std::to_string(rep.states.size()) + " terminals=" +
                      std::to_string(rep.terminals.size()) + " MSI-violations=" + std::to_string(msi_count);
  report["terminal_states"] = std::move(terminals);
  report["violations"] = std::move(msi);
  return finish(out, report, msi_count > 0 || stale > 0);
}

int run_check_bisim(const CommonArgs& a, std::ostream& out) {
  const Scenario s = load_scenario(a.scenario);
  const model::Model m = model::build_model(model_options(a));
  dump_annotations(a, m);
  const auto inst = model::build_initial(m, s);
  const auto graph = conformance::explore_stable(inst.world, inst.layout, a.state_bound);
  const auto rep = conformance::check_bisimulation(graph, conformance::tss_options(m), a.depth);
  TraceSink trace(a.trace);
  json misses = json::array();
  for (std::size_t i = 0; i < rep.missing.size(); ++i) {
    const auto& miss = rep.missing[i];
    trace.write({{"step", i},
                 {"engine", "actor"},
                 {"state", miss.state},
                 {"rule", std::string(tss::to_string(miss.rule.rule))},
                 {"instance", tss::to_string(miss.rule)},
                 {"violation", true}});
    if (misses.size() < kReportedItems) {
      misses.push_back({{"state", miss.state},
                        {"rule", tss::to_string(miss.rule)},
                        {"alpha", miss.alpha},
                        {"target", miss.target}});
    }
  }
  json report;
  report["command"] = "check-bisim";
  report["scenario"] = s.name;
  report["main_guard"] = !a.no_main_guard;
  report["depth"] = a.depth;
  report["stable_states"] = graph.states.size();
  report["truncated"] = rep.truncated;
  report["obligations"] = rep.obligations;
  report["missing"] = rep.missing.size();
  report["violations"] = std::move(misses);
  return finish(out, report, !rep.missing.empty());
}

int run_confluence(const CommonArgs& a, std::ostream& out) {
  const Scenario s = load_scenario(a.scenario);
  const model::Model m = model::build_model(model_options(a));
  const auto inst = model::build_initial(m, s);
  const auto rep = actor::diamond_check(inst.world, a.state_bound);
  TraceSink trace(a.trace);
  json failures = json::array();
  for (std::size_t i = 0; i < rep.failures.size(); ++i) {
    const auto& f = rep.failures[i];
    trace.write({{"step", i},
                 {"engine", "actor"},
                 {"state", f.state},
                 {"first", f.first.pid},
                 {"second", f.second.pid},
                 {"violation", true}});
    if (failures.size() < kReportedItems) failures.push_back({{"state", f.state}, {"detail", f.detail}});
  }
  json report;
  report["command"] = "confluence";
  report["scenario"] = s.name;
  report["main_guard"] = !a.no_main_guard;
  report["fine_states"] = rep.states;
  report["pairs_checked"] = rep.pairs_checked;
  report["truncated"] = rep.truncated;
  report["failures"] = rep.failures.size();
  report["violations"] = std::move(failures);
  return finish(out, report, !rep.failures.empty());
}

void add_common(CLI::App* sub, CommonArgs& a) {
  sub->add_option("--scenario", a.scenario, "built-in name (S0, S1, S2, S3, S1flat) or JSON file");
  sub->add_option("--seed", a.seed, "scheduler seed");
  sub->add_option("--seeds", a.seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);
  sub->add_option("--max-steps", a.max_steps, "coarse step bound per run");
  sub->add_option("--max-fine-steps", a.max_fine_steps, "fine step bound per simulate run");
  sub->add_option("--depth", a.depth, "witness depth bound for check-bisim");
  sub->add_option("--state-bound", a.state_bound, "state bound for exhaustive exploration");
  sub->add_option("--trace", a.trace, "JSONL trace output path");
  sub->add_option("--dump-annotations", a.dump_annotations, "write the annotation table as JSON");
  sub->add_flag("--no-main-guard", a.no_main_guard,
                "last-level caches install regardless of main memory status");
  sub->add_option("--mutation", a.mutation, "model mutation: none, drop-main-invalidation, "
                                            "skip-read-history-append, evict-without-install");
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multicore memory system simulator and conformance checker", "mmsim"};
  app.require_subcommand(1);
  CommonArgs a;
  std::function<int()> action;
  struct Command {
    const char* name;
    const char* help;
    std::function<int()> run;
  };
  const std::vector<Command> commands = {
      {"simulate", "seeded actor run that must terminate", [&] { return run_actor(a, true, out); }},
      {"explore", "exhaustive transition system reachability with MSI checks", [&] { return run_explore(a, out); }},
      {"check-sim", "classify every coarse actor step against the rules", [&] { return run_actor(a, false, out); }},
      {"check-bisim", "find actor witnesses for every rule successor", [&] { return run_check_bisim(a, out); }},
      {"confluence", "diamond property over fine-grained reachable states", [&] { return run_confluence(a, out); }},
  };
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, a);
    sub->callback([&action, run = c.run] { action = run; });
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitClean;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitClean;
  } catch (const CLI::ParseError& e) {
    err << "usage: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    return action();
  } catch (const UsageError& e) {
    err << e.what() << '\n';
    return kExitUsage;
  } catch (const ScenarioError& e) {
    err << "scenario: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "scenario: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace mms::cli
