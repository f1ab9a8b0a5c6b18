#include "mms/scenario.hpp"

#include <stdexcept>

namespace mms {

std::string validation_error(const Scenario& s) {
  if (s.levels < 1) return "levels: must be positive";
  if (s.address_space < 1) return "address_space: must be positive";
  if (s.capacities.size() != s.levels) {
    return "capacities: expected " + std::to_string(s.levels) + " entries, got " +
           std::to_string(s.capacities.size());
  }
  for (std::size_t i = 0; i < s.capacities.size(); ++i) {
    if (s.capacities[i] < 1) return "capacities[" + std::to_string(i) + "]: must be positive";
  }
  if (s.patterns.size() != s.num_cores) {
    return "patterns: expected " + std::to_string(s.num_cores) + " patterns, got " +
           std::to_string(s.patterns.size());
  }
  for (std::size_t c = 0; c < s.patterns.size(); ++c) {
    for (std::size_t i = 0; i < s.patterns[c].size(); ++i) {
      const auto& op = s.patterns[c][i];
      const std::string path = "patterns[" + std::to_string(c) + "][" + std::to_string(i) + "]";
      if (op.op != tss::RuntimeStmt::Op::Read && op.op != tss::RuntimeStmt::Op::Write) {
        return path + ": only R and W accesses are allowed";
      }
      if (op.addr.value >= s.address_space) {
        return path + ": address " + std::to_string(op.addr.value) + " outside address_space " +
               std::to_string(s.address_space);
      }
    }
  }
  if (s.policy != "direct") return "policy: unknown placement policy '" + s.policy + "'";
  return {};
}

tss::Configuration initial_configuration(const Scenario& s) {
  if (auto err = validation_error(s); !err.empty()) throw std::invalid_argument(err);
  tss::Configuration cf;
  cf.levels = s.levels;
  cf.main = tss::MemoryMap(s.address_space);
  for (std::uint32_t a = 0; a < s.address_space; ++a) cf.main.set(tss::Address{a}, tss::Status::Sh);
  for (std::uint32_t c = 1; c <= s.num_cores; ++c) {
    cf.cores.push_back({tss::CoreId{c}, s.patterns[c - 1], {}});
    for (std::uint32_t l = 1; l <= s.levels; ++l) {
      cf.caches.push_back({tss::CacheId{tss::CoreId{c}, l}, tss::MemoryMap(s.capacities[l - 1]), {}});
    }
  }
  return cf;
}

}  // namespace mms
