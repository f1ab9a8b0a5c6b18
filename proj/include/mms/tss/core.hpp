// Runtime syntax of the multicore memory transition system.
#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mms::tss {

struct Address {
  std::uint32_t value = 0;
  friend auto operator<=>(const Address&, const Address&) = default;
};

struct CoreId {
  std::uint32_t value = 0;  // 1-based
  friend auto operator<=>(const CoreId&, const CoreId&) = default;
};

struct CacheId {
  CoreId core;
  std::uint32_t level = 1;  // 1 is closest to the core
  friend auto operator<=>(const CacheId&, const CacheId&) = default;
};

enum class Status : std::uint8_t { Mo, Sh, Inv };

std::string_view to_string(Status s);
std::string to_string(CoreId c);
std::string to_string(const CacheId& id);

class MalformedId : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CachePosition {
  CoreId core;
  std::uint32_t level = 1;
  bool is_first = false;
  bool is_last = false;
};

CachePosition cache_position(const CacheId& id, std::uint32_t levels);

// Finite map Address -> Status. An absent key is the undefined status.
class MemoryMap {
 public:
  using Entry = std::pair<Address, Status>;

  explicit MemoryMap(std::size_t capacity = 1);

  std::optional<Status> status_of(Address n) const;
  bool contains(Address n) const { return status_of(n).has_value(); }
  void set(Address n, Status s);
  void erase(Address n);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }

  friend bool operator==(const MemoryMap&, const MemoryMap&) = default;

 private:
  std::size_t capacity_;
  std::vector<Entry> entries_;  // sorted by address, unique keys
};

std::optional<Status> status_of(const MemoryMap& m, Address n);

// Placement of a block in a cache: returns n when n may be placed without
// eviction, otherwise a resident victim address.
using Placement = Address (*)(const MemoryMap&, Address);

// slot = n mod capacity
Address direct_mapped(const MemoryMap& m, Address n);

inline Address select(const MemoryMap& m, Address n, Placement policy = &direct_mapped) {
  return policy(m, n);
}

// No two resident addresses share a direct-mapped slot and size <= capacity.
bool slot_invariant_holds(const MemoryMap& m);

struct RuntimeStmt {
  enum class Op : std::uint8_t { Read, ReadBl, Write, WriteBl };
  Op op = Op::Read;
  Address addr;
  friend auto operator<=>(const RuntimeStmt&, const RuntimeStmt&) = default;
};

using Task = std::vector<RuntimeStmt>;

std::string to_string(const RuntimeStmt& s);

struct DataInstr {
  enum class Kind : std::uint8_t { Fetch, FetchB, FetchW, Flush };
  Kind kind = Kind::Fetch;
  Address addr;
  Address awaited;  // meaningful for FetchW only, zero otherwise

  static DataInstr fetch(Address n) { return {Kind::Fetch, n, {}}; }
  static DataInstr fetch_blocked(Address n) { return {Kind::FetchB, n, {}}; }
  static DataInstr fetch_wait(Address n, Address victim) { return {Kind::FetchW, n, victim}; }
  static DataInstr flush(Address n) { return {Kind::Flush, n, {}}; }

  friend auto operator<=>(const DataInstr&, const DataInstr&) = default;
};

std::string to_string(const DataInstr& d);

// Multiset kept sorted so that equality is multiset equality.
class DstMultiset {
 public:
  void add(const DataInstr& d);
  bool remove_one(const DataInstr& d);
  std::size_t count(const DataInstr& d) const;
  bool contains(const DataInstr& d) const { return count(d) > 0; }
  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }
  const std::vector<DataInstr>& items() const { return items_; }

  friend bool operator==(const DstMultiset&, const DstMultiset&) = default;

 private:
  std::vector<DataInstr> items_;
};

struct Event {
  enum class Kind : std::uint8_t { R, W };
  Kind kind = Kind::R;
  CoreId core;
  Address addr;
  friend auto operator<=>(const Event&, const Event&) = default;
};

using EventLog = std::vector<Event>;

std::string to_string(const Event& e);
std::string to_string(const EventLog& log);

struct CoreState {
  CoreId id;
  Task task;
  EventLog log;
  friend bool operator==(const CoreState&, const CoreState&) = default;
};

struct CacheState {
  CacheId id;
  MemoryMap memory;
  DstMultiset dst;
  friend bool operator==(const CacheState&, const CacheState&) = default;
};

struct Label {
  enum class Kind : std::uint8_t { RdOut, RdxOut, RdIn, RdxIn };
  Kind kind = Kind::RdOut;
  Address addr;
  friend auto operator<=>(const Label&, const Label&) = default;
};

// Cores sorted by id, caches by (core, level). The global history is the
// emission-ordered merge of core logs and is excluded from equality, which
// compares per-core projections through the core logs.
struct Configuration {
  std::uint32_t levels = 1;
  std::vector<CoreState> cores;
  std::vector<CacheState> caches;
  MemoryMap main;
  EventLog history;

  const CoreState& core(CoreId c) const;
  CoreState& core(CoreId c);
  const CacheState& cache(const CacheId& id) const;
  CacheState& cache(const CacheId& id);
  bool has_cache(const CacheId& id) const;

  friend bool operator==(const Configuration& a, const Configuration& b) {
    return a.levels == b.levels && a.cores == b.cores && a.caches == b.caches && a.main == b.main;
  }
};

// Deterministic text: cores by id, caches by (core, level), entries by
// address, statuses Mo/Sh/In, undefined entries omitted. History excluded.
std::string canonical_text(const Configuration& cf);

// 64-bit FNV-1a digest of canonical_text, printed as 16 hex digits.
std::string digest(const Configuration& cf);

// Empty string when well formed, otherwise the first problem found.
std::string well_formedness_problem(const Configuration& cf);

}  // namespace mms::tss
