// Shared builders for tests.
#pragma once

#include <initializer_list>
#include <string_view>

#include "mms/scenario_io.hpp"
#include "mms/tss/core.hpp"

namespace mms::testing {

inline tss::Address A(std::uint32_t v) { return tss::Address{v}; }
inline tss::CoreId C(std::uint32_t v) { return tss::CoreId{v}; }
inline tss::CacheId L(std::uint32_t core, std::uint32_t level) { return tss::CacheId{tss::CoreId{core}, level}; }

inline tss::RuntimeStmt read(std::uint32_t n) { return {tss::RuntimeStmt::Op::Read, A(n)}; }
inline tss::RuntimeStmt read_bl(std::uint32_t n) { return {tss::RuntimeStmt::Op::ReadBl, A(n)}; }
inline tss::RuntimeStmt write(std::uint32_t n) { return {tss::RuntimeStmt::Op::Write, A(n)}; }
inline tss::RuntimeStmt write_bl(std::uint32_t n) { return {tss::RuntimeStmt::Op::WriteBl, A(n)}; }

inline Scenario builtin(std::string_view name) { return *builtin_scenario(name); }

inline tss::MemoryMap memory(std::size_t capacity, std::initializer_list<std::pair<std::uint32_t, tss::Status>> es) {
  tss::MemoryMap m(capacity);
  for (auto [n, s] : es) m.set(A(n), s);
  return m;
}

// cores x levels configuration with every cache of capacity cap and main all Sh.
inline Scenario custom(std::uint32_t cores, std::vector<std::uint32_t> caps, std::uint32_t space,
                       std::vector<tss::Task> patterns) {
  Scenario s;
  s.name = "custom";
  s.num_cores = cores;
  s.levels = static_cast<std::uint32_t>(caps.size());
  s.capacities = std::move(caps);
  s.address_space = space;
  s.patterns = std::move(patterns);
  return s;
}

}  // namespace mms::testing
