// Built-in scenarios and JSON scenario files.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mms/scenario.hpp"

namespace mms {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> builtin_scenario_names();
std::optional<Scenario> builtin_scenario(std::string_view name);

// "R 0" or "W 3"; the space is optional.
tss::RuntimeStmt parse_access(std::string_view text);

Scenario scenario_from_json_text(std::string_view text);
Scenario parse_scenario_file(const std::string& path);

// A built-in name, otherwise a JSON file path.
Scenario load_scenario(const std::string& name_or_path);

std::string scenario_to_json_text(const Scenario& s);

}  // namespace mms
