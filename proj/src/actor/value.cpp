#include "mms/actor/value.hpp"

#include <algorithm>

namespace mms::actor {

namespace {

const char* kind_name(const Value& v) {
  switch (v.data.index()) {
    case 0: return "unit";
    case 1: return "bool";
    case 2: return "int";
    case 3: return "ref";
    case 4: return "constructor";
    case 5: return "list";
    case 6: return "map";
  }
  return "?";
}

template <class T>
const T& expect(const Value& v, const char* want) {
  if (const T* p = std::get_if<T>(&v.data)) return *p;
  throw TypeError(std::string("expected ") + want + ", got " + kind_name(v) + " " + to_text(v));
}

}  // namespace

bool Value::as_bool() const { return expect<bool>(*this, "bool"); }
std::int64_t Value::as_int() const { return expect<std::int64_t>(*this, "int"); }
ObjRef Value::as_ref() const { return expect<ObjRef>(*this, "ref"); }
const Ctor& Value::as_ctor() const { return expect<Ctor>(*this, "constructor"); }
const ValueList& Value::as_list() const { return expect<ValueList>(*this, "list"); }
const ValueMap& Value::as_map() const { return expect<ValueMap>(*this, "map"); }

bool Value::is_ctor(std::string_view tag) const {
  const Ctor* c = std::get_if<Ctor>(&data);
  return c && c->tag == tag;
}

bool operator==(const Ctor& a, const Ctor& b) { return a.tag == b.tag && a.args == b.args; }
bool operator==(const MapEntry& a, const MapEntry& b) { return a.key == b.key && a.value == b.value; }
bool operator==(const Value& a, const Value& b) { return a.data == b.data; }

Value ctor(std::string tag, ValueList args) { return Value(Ctor{std::move(tag), std::move(args)}); }
Value nothing() { return ctor("Nothing"); }
Value just(Value v) { return ctor("Just", {std::move(v)}); }

const Value* map_lookup(const ValueMap& m, std::int64_t key) {
  auto it = std::lower_bound(m.begin(), m.end(), key, [](const MapEntry& e, std::int64_t k) { return e.key < k; });
  if (it == m.end() || it->key != key) return nullptr;
  return &it->value;
}

ValueMap map_put(ValueMap m, std::int64_t key, Value v) {
  auto it = std::lower_bound(m.begin(), m.end(), key, [](const MapEntry& e, std::int64_t k) { return e.key < k; });
  if (it != m.end() && it->key == key) {
    it->value = std::move(v);
  } else {
    m.insert(it, MapEntry{key, std::move(v)});
  }
  return m;
}

ValueMap map_remove(ValueMap m, std::int64_t key) {
  auto it = std::lower_bound(m.begin(), m.end(), key, [](const MapEntry& e, std::int64_t k) { return e.key < k; });
  if (it != m.end() && it->key == key) m.erase(it);
  return m;
}

void write_value(std::string& out, const Value& v, const RefRenaming& rn) {
  switch (v.data.index()) {
    case 0: out += "()"; return;
    case 1: out += std::get<bool>(v.data) ? "T" : "F"; return;
    case 2: out += std::to_string(std::get<std::int64_t>(v.data)); return;
    case 3: {
      const auto oid = std::get<ObjRef>(v.data).oid;
      out += '@';
      if (oid >= rn.dynamic_from) {
        if (rn.placeholder) {
          out += 'd';
          return;
        }
        if (rn.table) {
          out += std::to_string((*rn.table)[oid - rn.dynamic_from]);
          return;
        }
      }
      out += std::to_string(oid);
      return;
    }
    case 4: {
      const auto& c = std::get<Ctor>(v.data);
      out += c.tag;
      if (!c.args.empty()) {
        out += '(';
        for (std::size_t i = 0; i < c.args.size(); ++i) {
          if (i) out += ',';
          write_value(out, c.args[i], rn);
        }
        out += ')';
      }
      return;
    }
    case 5: {
      const auto& l = std::get<ValueList>(v.data);
      out += '[';
      for (std::size_t i = 0; i < l.size(); ++i) {
        if (i) out += ',';
        write_value(out, l[i], rn);
      }
      out += ']';
      return;
    }
    case 6: {
      const auto& m = std::get<ValueMap>(v.data);
      out += '{';
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(m[i].key);
        out += ':';
        write_value(out, m[i].value, rn);
      }
      out += '}';
      return;
    }
  }
}

std::string to_text(const Value& v) {
  std::string out;
  write_value(out, v);
  return out;
}

}  // namespace mms::actor
