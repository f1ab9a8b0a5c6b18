// Desk-scale system description shared by both engines.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mms/tss/core.hpp"

namespace mms {

struct Scenario {
  std::string name;
  std::uint32_t num_cores = 1;
  std::uint32_t levels = 1;
  std::vector<std::uint32_t> capacities;  // one per level
  std::uint32_t address_space = 1;
  std::vector<tss::Task> patterns;  // Read/Write only, one per core
  std::string policy = "direct";
  std::uint64_t seed = 0;
};

// Empty string when valid, otherwise "<field path>: <problem>".
std::string validation_error(const Scenario& s);

// Caches empty, main memory all Sh, tasks equal to the patterns.
tss::Configuration initial_configuration(const Scenario& s);

}  // namespace mms
