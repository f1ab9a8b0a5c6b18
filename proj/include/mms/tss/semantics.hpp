// Small-step interpreter of the multicore transition rules.
#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mms/tss/core.hpp"

namespace mms::tss {

enum class RuleName : std::uint8_t {
  PrRd1,
  PrRd2,
  PrRd3,
  PrWr1,
  PrWr2,
  PrWr3,
  PrWr4,
  LCHit1,
  LCHit2,
  LCMiss,
  LLCMiss,
  FetchBl1,
  FetchBl2,
  FetchBl3,
  LCFetchUnblock,
  FetchW,
  Flush1,
  Flush2,
  InvalidateOneLine,
  IgnoreInvalidateOneLine,
  FlushOneLine,
  IgnoreFlushOneLine,
  Synch,
  SynchDist,
  SynchX,
  SynchDistX,
};

inline constexpr std::size_t kRuleCount = 26;

std::string_view to_string(RuleName r);
std::optional<RuleName> rule_from_string(std::string_view s);

using Subject = std::variant<CoreId, CacheId>;

std::string to_string(const Subject& s);

// A rule plus its binding. aux is the victim of LCHit1, the evicted or
// flushed block of FetchBl2/FetchBl3, and the awaited block of FetchW.
struct RuleInstance {
  RuleName rule = RuleName::PrRd1;
  Subject subject = CoreId{};
  Address addr;
  std::optional<Address> aux;
  friend auto operator<=>(const RuleInstance&, const RuleInstance&) = default;
};

std::string to_string(const RuleInstance& ri);

struct Options {
  Placement placement = &direct_mapped;
  // FetchBl1/FetchBl2 install only while main memory holds the block at Sh.
  // Disabling it installs main's status unconditionally, which keeps the
  // system live but makes flush accumulation unbounded.
  bool require_shared_main = true;
};

class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Sorted by (rule, subject, addr, aux), duplicates removed. Broadcast
// emitting rules appear as their Synch/SynchX composites.
std::vector<RuleInstance> enabled(const Configuration& cf, const Options& opts = {});

// Empty when the premises of ri hold in cf, otherwise the failing premise.
std::optional<std::string> failing_premise(const Configuration& cf, const RuleInstance& ri,
                                           const Options& opts = {});

// Throws PreconditionError naming the failing premise.
Configuration apply(const Configuration& cf, const RuleInstance& ri, const Options& opts = {});

// LLC-Miss lifted by Synch: one atomic step.
Configuration apply_broadcast_rd(const Configuration& cf, const CacheId& llc, Address n);

// PrWr2 lifted by SynchX: one atomic step.
Configuration apply_broadcast_rdx(const Configuration& cf, CoreId c, Address n);

std::vector<std::pair<RuleInstance, Configuration>> successors(const Configuration& cf,
                                                               const Options& opts = {});

struct ReachEdge {
  std::size_t from = 0;
  RuleInstance rule;
  std::size_t to = 0;
};

struct ReachReport {
  std::vector<Configuration> states;  // BFS order, states[0] is the start
  std::vector<std::size_t> terminals;  // indices into states
  bool truncated = false;
  std::vector<ReachEdge> edges;  // filled when requested
};

struct ExploreOptions {
  std::size_t state_bound = 1'000'000;
  bool record_edges = false;
  Options rules;
};

ReachReport explore(const Configuration& cf0, const ExploreOptions& opts = {});

std::vector<std::string> check_msi(const Configuration& cf);

}  // namespace mms::tss
