#include "mms/scenario_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mms {

namespace {

using json = nlohmann::json;
using Op = tss::RuntimeStmt::Op;

tss::Task task(std::initializer_list<std::string_view> ops) {
  tss::Task t;
  for (auto op : ops) t.push_back(parse_access(op));
  return t;
}

Scenario make(std::string name, std::uint32_t cores, std::vector<std::uint32_t> caps, std::uint32_t space,
              std::vector<tss::Task> patterns) {
  Scenario s;
  s.name = std::move(name);
  s.num_cores = cores;
  s.levels = static_cast<std::uint32_t>(caps.size());
  s.capacities = std::move(caps);
  s.address_space = space;
  s.patterns = std::move(patterns);
  return s;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ScenarioError(path + ": " + what); }

template <class T>
T field(const json& j, const char* name) {
  if (!j.contains(name)) fail(name, "missing");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    fail(name, "wrong type");
  }
}

}  // namespace

std::vector<std::string> builtin_scenario_names() { return {"S0", "S1", "S2", "S3", "S1flat"}; }

std::optional<Scenario> builtin_scenario(std::string_view name) {
  if (name == "S0") return make("S0", 1, {1}, 1, {task({"R 0"})});
  if (name == "S1") return make("S1", 2, {1, 2}, 2, {task({"R 0", "W 0"}), task({"W 0", "R 1"})});
  if (name == "S2") {
    return make("S2", 3, {1}, 2, {task({"W 0", "R 1"}), task({"R 0", "W 1"}), task({"W 1", "R 0"})});
  }
  if (name == "S3") {
    return make("S3", 2, {1, 1, 1}, 2, {task({"R 0", "W 1", "R 1", "W 0"}), task({"W 0", "R 1", "W 1"})});
  }
  if (name == "S1flat") return make("S1flat", 2, {1}, 1, {task({"W 0"}), task({"R 0"})});
  return std::nullopt;
}

tss::RuntimeStmt parse_access(std::string_view text) {
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  skip_ws();
  if (i >= text.size() || (text[i] != 'R' && text[i] != 'W')) {
    throw ScenarioError("access '" + std::string(text) + "': expected R or W");
  }
  tss::RuntimeStmt st;
  st.op = text[i] == 'R' ? Op::Read : Op::Write;
  ++i;
  skip_ws();
  const std::size_t digits = i;
  std::uint64_t v = 0;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    v = v * 10 + static_cast<std::uint64_t>(text[i] - '0');
    if (v > UINT32_MAX) throw ScenarioError("access '" + std::string(text) + "': address too large");
    ++i;
  }
  skip_ws();
  if (digits == i || i != text.size()) throw ScenarioError("access '" + std::string(text) + "': expected an address");
  st.addr = tss::Address{static_cast<std::uint32_t>(v)};
  return st;
}

Scenario scenario_from_json_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("json: ") + e.what());
  }
  if (!j.is_object()) fail("$", "expected an object");
  Scenario s;
  s.name = j.value("name", std::string("unnamed"));
  const auto cores = field<std::int64_t>(j, "num_cores");
  if (cores < 1) fail("num_cores", "must be positive");
  s.num_cores = static_cast<std::uint32_t>(cores);
  const auto levels = field<std::int64_t>(j, "levels");
  if (levels < 1) fail("levels", "must be positive");
  s.levels = static_cast<std::uint32_t>(levels);
  for (auto c : field<std::vector<std::int64_t>>(j, "capacities")) {
    if (c < 1) fail("capacities", "entries must be positive");
    s.capacities.push_back(static_cast<std::uint32_t>(c));
  }
  const auto space = field<std::int64_t>(j, "address_space");
  if (space < 1) fail("address_space", "must be positive");
  s.address_space = static_cast<std::uint32_t>(space);
  const auto pats = field<std::vector<std::vector<std::string>>>(j, "patterns");
  for (std::size_t c = 0; c < pats.size(); ++c) {
    tss::Task t;
    for (std::size_t k = 0; k < pats[c].size(); ++k) {
      try {
        t.push_back(parse_access(pats[c][k]));
      } catch (const ScenarioError& e) {
        fail("patterns[" + std::to_string(c) + "][" + std::to_string(k) + "]", e.what());
      }
    }
    s.patterns.push_back(std::move(t));
  }
  s.policy = j.value("policy", std::string("direct"));
  if (j.contains("seed")) s.seed = field<std::uint64_t>(j, "seed");
  if (auto err = validation_error(s); !err.empty()) throw ScenarioError(err);
  return s;
}

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json_text(buf.str());
}

Scenario load_scenario(const std::string& name_or_path) {
  if (auto s = builtin_scenario(name_or_path)) return *s;
  return parse_scenario_file(name_or_path);
}

std::string scenario_to_json_text(const Scenario& s) {
  json pats = json::array();
  for (const auto& t : s.patterns) {
    json p = json::array();
    for (const auto& st : t) p.push_back(std::string(st.op == Op::Read ? "R " : "W ") + std::to_string(st.addr.value));
    pats.push_back(std::move(p));
  }
  json j = {{"name", s.name},
            {"num_cores", s.num_cores},
            {"levels", s.levels},
            {"capacities", s.capacities},
            {"address_space", s.address_space},
            {"patterns", std::move(pats)},
            {"policy", s.policy},
            {"seed", s.seed}};
  return j.dump(2);
}

}  // namespace mms
