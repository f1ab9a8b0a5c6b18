// Dynamic values manipulated by behavior programs: algebraic data in the
// style of the modeling language (constructors, lists, int-keyed maps).
#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mms::actor {

struct ObjRef {
  std::uint32_t oid = 0;
  friend bool operator==(const ObjRef&, const ObjRef&) = default;
};

struct Value;
using ValueList = std::vector<Value>;

struct Ctor {
  std::string tag;
  ValueList args;
};

struct MapEntry;
using ValueMap = std::vector<MapEntry>;  // sorted by key

struct Value {
  std::variant<std::monostate, bool, std::int64_t, ObjRef, Ctor, ValueList, ValueMap> data;

  Value() = default;
  Value(bool b) : data(b) {}
  Value(std::int64_t i) : data(i) {}
  Value(int i) : data(std::int64_t{i}) {}
  Value(ObjRef r) : data(r) {}
  Value(Ctor c) : data(std::move(c)) {}
  Value(ValueList l) : data(std::move(l)) {}
  Value(ValueMap m) : data(std::move(m)) {}

  bool is_unit() const { return std::holds_alternative<std::monostate>(data); }
  bool as_bool() const;
  std::int64_t as_int() const;
  ObjRef as_ref() const;
  const Ctor& as_ctor() const;
  const ValueList& as_list() const;
  const ValueMap& as_map() const;
  bool is_ctor(std::string_view tag) const;
};

struct MapEntry {
  std::int64_t key = 0;
  Value value;
};

bool operator==(const Ctor& a, const Ctor& b);
bool operator==(const MapEntry& a, const MapEntry& b);
bool operator==(const Value& a, const Value& b);

class TypeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Value ctor(std::string tag, ValueList args = {});
Value nothing();
Value just(Value v);

// Map operations with the semantics of the modeling language's Map ADT.
const Value* map_lookup(const ValueMap& m, std::int64_t key);
ValueMap map_put(ValueMap m, std::int64_t key, Value v);
ValueMap map_remove(ValueMap m, std::int64_t key);

// Compact deterministic text. Object references above `rename_from` are
// written through `rename` when provided.
struct RefRenaming {
  std::uint32_t dynamic_from = UINT32_MAX;
  const std::vector<std::uint32_t>* table = nullptr;  // old oid - dynamic_from -> new oid
  bool placeholder = false;  // write dynamic refs as '@d'
};

void write_value(std::string& out, const Value& v, const RefRenaming& rn = {});
std::string to_text(const Value& v);

}  // namespace mms::actor
