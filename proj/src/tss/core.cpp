#include "mms/tss/core.hpp"

#include <algorithm>
#include <set>

namespace mms::tss {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Mo: return "Mo";
    case Status::Sh: return "Sh";
    case Status::Inv: return "In";
  }
  return "?";
}

std::string to_string(CoreId c) { return "c" + std::to_string(c.value); }

std::string to_string(const CacheId& id) {
  return to_string(id.core) + ".L" + std::to_string(id.level);
}

CachePosition cache_position(const CacheId& id, std::uint32_t levels) {
  if (id.level < 1 || id.level > levels) {
    throw MalformedId("cache " + to_string(id) + " outside levels 1.." + std::to_string(levels));
  }
  return {id.core, id.level, id.level == 1, id.level == levels};
}

MemoryMap::MemoryMap(std::size_t capacity) : capacity_(capacity) {}

std::optional<Status> MemoryMap::status_of(Address n) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), n,
                             [](const Entry& e, Address a) { return e.first < a; });
  if (it == entries_.end() || it->first != n) return std::nullopt;
  return it->second;
}

void MemoryMap::set(Address n, Status s) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), n,
                             [](const Entry& e, Address a) { return e.first < a; });
  if (it != entries_.end() && it->first == n) {
    it->second = s;
  } else {
    entries_.insert(it, {n, s});
  }
}

void MemoryMap::erase(Address n) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), n,
                             [](const Entry& e, Address a) { return e.first < a; });
  if (it != entries_.end() && it->first == n) entries_.erase(it);
}

std::optional<Status> status_of(const MemoryMap& m, Address n) { return m.status_of(n); }

Address direct_mapped(const MemoryMap& m, Address n) {
  const auto cap = static_cast<std::uint32_t>(m.capacity());
  const std::uint32_t slot = n.value % cap;
  for (const auto& [addr, status] : m.entries()) {
    if (addr.value % cap == slot) return addr;
  }
  return n;
}

bool slot_invariant_holds(const MemoryMap& m) {
  if (m.size() > m.capacity()) return false;
  std::set<std::uint32_t> slots;
  for (const auto& [addr, status] : m.entries()) {
    if (!slots.insert(addr.value % static_cast<std::uint32_t>(m.capacity())).second) return false;
  }
  return true;
}

std::string to_string(const RuntimeStmt& s) {
  const char* name = "Read";
  switch (s.op) {
    case RuntimeStmt::Op::Read: name = "Read"; break;
    case RuntimeStmt::Op::ReadBl: name = "ReadBl"; break;
    case RuntimeStmt::Op::Write: name = "Write"; break;
    case RuntimeStmt::Op::WriteBl: name = "WriteBl"; break;
  }
  return std::string(name) + "(" + std::to_string(s.addr.value) + ")";
}

std::string to_string(const DataInstr& d) {
  switch (d.kind) {
    case DataInstr::Kind::Fetch: return "Fetch(" + std::to_string(d.addr.value) + ")";
    case DataInstr::Kind::FetchB: return "FetchB(" + std::to_string(d.addr.value) + ")";
    case DataInstr::Kind::FetchW:
      return "FetchW(" + std::to_string(d.addr.value) + "," + std::to_string(d.awaited.value) + ")";
    case DataInstr::Kind::Flush: return "Flush(" + std::to_string(d.addr.value) + ")";
  }
  return "?";
}

void DstMultiset::add(const DataInstr& d) {
  items_.insert(std::upper_bound(items_.begin(), items_.end(), d), d);
}

bool DstMultiset::remove_one(const DataInstr& d) {
  auto it = std::lower_bound(items_.begin(), items_.end(), d);
  if (it == items_.end() || *it != d) return false;
  items_.erase(it);
  return true;
}

std::size_t DstMultiset::count(const DataInstr& d) const {
  auto [lo, hi] = std::equal_range(items_.begin(), items_.end(), d);
  return static_cast<std::size_t>(hi - lo);
}

std::string to_string(const Event& e) {
  return std::string(e.kind == Event::Kind::R ? "R(" : "W(") + to_string(e.core) + "," +
         std::to_string(e.addr.value) + ")";
}

std::string to_string(const EventLog& log) {
  std::string out = "[";
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (i) out += ",";
    out += to_string(log[i]);
  }
  return out + "]";
}

const CoreState& Configuration::core(CoreId c) const {
  if (c.value >= 1 && c.value <= cores.size() && cores[c.value - 1].id == c) return cores[c.value - 1];
  for (const auto& cs : cores)
    if (cs.id == c) return cs;
  throw MalformedId("no core " + to_string(c));
}

CoreState& Configuration::core(CoreId c) {
  return const_cast<CoreState&>(static_cast<const Configuration&>(*this).core(c));
}

const CacheState& Configuration::cache(const CacheId& id) const {
  const std::size_t guess = (std::size_t{id.core.value} - 1) * levels + (id.level - 1);
  if (id.core.value >= 1 && id.level >= 1 && guess < caches.size() && caches[guess].id == id) {
    return caches[guess];
  }
  for (const auto& c : caches)
    if (c.id == id) return c;
  throw MalformedId("no cache " + to_string(id));
}

CacheState& Configuration::cache(const CacheId& id) {
  return const_cast<CacheState&>(static_cast<const Configuration&>(*this).cache(id));
}

bool Configuration::has_cache(const CacheId& id) const {
  return std::any_of(caches.begin(), caches.end(), [&](const CacheState& c) { return c.id == id; });
}

namespace {

void append_memory(std::string& out, const MemoryMap& m) {
  out += "{";
  bool first = true;
  for (const auto& [addr, status] : m.entries()) {
    if (!first) out += ",";
    first = false;
    out += std::to_string(addr.value);
    out += ":";
    out += to_string(status);
  }
  out += "}";
}

}  // namespace

std::string canonical_text(const Configuration& cf) {
  std::string out;
  out.reserve(256);
  for (const auto& c : cf.cores) {
    out += to_string(c.id);
    out += " task=[";
    for (std::size_t i = 0; i < c.task.size(); ++i) {
      if (i) out += ",";
      out += to_string(c.task[i]);
    }
    out += "] log=";
    out += to_string(c.log);
    out += "; ";
  }
  for (const auto& c : cf.caches) {
    out += to_string(c.id);
    out += " mem=";
    append_memory(out, c.memory);
    out += " dst=[";
    for (std::size_t i = 0; i < c.dst.items().size(); ++i) {
      if (i) out += ",";
      out += to_string(c.dst.items()[i]);
    }
    out += "]; ";
  }
  out += "main=";
  append_memory(out, cf.main);
  return out;
}

std::string digest(const Configuration& cf) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canonical_text(cf)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex[h & 0xF];
    h >>= 4;
  }
  return out;
}

std::string well_formedness_problem(const Configuration& cf) {
  if (cf.levels < 1) return "levels must be positive";
  std::set<CoreId> ids;
  for (const auto& c : cf.cores) {
    if (!ids.insert(c.id).second) return "duplicate core " + to_string(c.id);
  }
  for (const auto& c : cf.cores) {
    for (std::uint32_t l = 1; l <= cf.levels; ++l) {
      const CacheId id{c.id, l};
      const auto n = std::count_if(cf.caches.begin(), cf.caches.end(),
                                   [&](const CacheState& cs) { return cs.id == id; });
      if (n != 1) return "core " + to_string(c.id) + " needs exactly one cache at level " + std::to_string(l);
    }
  }
  if (cf.caches.size() != cf.cores.size() * cf.levels) return "cache without a core";
  for (const auto& c : cf.caches) {
    if (c.memory.size() > c.memory.capacity()) return "cache " + to_string(c.id) + " over capacity";
  }
  for (std::uint32_t a = 0; a < cf.main.capacity(); ++a) {
    const auto s = cf.main.status_of(Address{a});
    if (!s) return "main memory lacks address " + std::to_string(a);
    if (*s == Status::Mo) return "main memory holds Mo at " + std::to_string(a);
  }
  return {};
}

}  // namespace mms::tss
