#include "mms/actor/program.hpp"

#include <algorithm>
#include <stdexcept>

namespace mms::actor {

Env::Env(std::initializer_list<Entry> init) {
  for (const auto& [k, v] : init) set(k, v);
}

const Value* Env::find(std::string_view name) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), name,
                             [](const Entry& e, std::string_view n) { return e.first < n; });
  if (it == entries_.end() || it->first != name) return nullptr;
  return &it->second;
}

const Value& Env::get(std::string_view name) const {
  if (const Value* v = find(name)) return *v;
  throw TypeError("unbound name '" + std::string(name) + "'");
}

void Env::set(std::string_view name, Value v) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), name,
                             [](const Entry& e, std::string_view n) { return e.first < n; });
  if (it != entries_.end() && it->first == name) {
    it->second = std::move(v);
  } else {
    entries_.insert(it, Entry{std::string(name), std::move(v)});
  }
}

void write_env(std::string& out, const Env& env, const RefRenaming& rn) {
  out += '{';
  bool first = true;
  for (const auto& [k, v] : env.entries()) {
    if (!first) out += ',';
    first = false;
    out += k;
    out += '=';
    write_value(out, v, rn);
  }
  out += '}';
}

const Value& EvalContext::operator[](std::string_view name) const {
  if (const Value* v = locals.find(name)) return *v;
  if (const Value* v = fields.find(name)) return *v;
  throw TypeError("unbound name '" + std::string(name) + "'");
}

Expr var(std::string name) {
  std::string text = name;
  return Expr{[name = std::move(name)](const EvalContext& c) { return c[name]; }, std::move(text)};
}

Expr lit(Value v, std::string text) {
  return Expr{[v = std::move(v)](const EvalContext&) { return v; }, std::move(text)};
}

Expr self_ref() {
  return Expr{[](const EvalContext& c) { return Value(c.self); }, "this"};
}

Expr fn(std::string text, std::function<Value(const EvalContext&)> f) { return Expr{std::move(f), std::move(text)}; }

Pattern p_any() { return Pattern{Pattern::Kind::Any, {}, {}}; }
Pattern p_var(std::string name) { return Pattern{Pattern::Kind::Bind, std::move(name), {}}; }
Pattern p_ctor(std::string tag, std::vector<Pattern> sub) {
  return Pattern{Pattern::Kind::Ctor, std::move(tag), std::move(sub)};
}
Pattern p_nil() { return Pattern{Pattern::Kind::Nil, {}, {}}; }
Pattern p_cons(Pattern head, Pattern tail) {
  return Pattern{Pattern::Kind::Cons, {}, {std::move(head), std::move(tail)}};
}

bool match(const Pattern& p, const Value& v, std::vector<Env::Entry>& binds) {
  switch (p.kind) {
    case Pattern::Kind::Any: return true;
    case Pattern::Kind::Bind: binds.emplace_back(p.name, v); return true;
    case Pattern::Kind::Ctor: {
      const auto* c = std::get_if<Ctor>(&v.data);
      if (!c || c->tag != p.name || c->args.size() != p.sub.size()) return false;
      for (std::size_t i = 0; i < p.sub.size(); ++i) {
        if (!match(p.sub[i], c->args[i], binds)) return false;
      }
      return true;
    }
    case Pattern::Kind::Nil: return v.as_list().empty();
    case Pattern::Kind::Cons: {
      const auto& l = v.as_list();
      if (l.empty()) return false;
      if (!match(p.sub[0], l.front(), binds)) return false;
      return match(p.sub[1], Value(ValueList(l.begin() + 1, l.end())), binds);
    }
  }
  return false;
}

std::string pattern_text(const Pattern& p) {
  switch (p.kind) {
    case Pattern::Kind::Any: return "_";
    case Pattern::Kind::Bind: return p.name;
    case Pattern::Kind::Ctor: {
      std::string s = p.name;
      if (!p.sub.empty()) {
        s += '(';
        for (std::size_t i = 0; i < p.sub.size(); ++i) {
          if (i) s += ',';
          s += pattern_text(p.sub[i]);
        }
        s += ')';
      }
      return s;
    }
    case Pattern::Kind::Nil: return "Nil";
    case Pattern::Kind::Cons: return "Cons(" + pattern_text(p.sub[0]) + "," + pattern_text(p.sub[1]) + ")";
  }
  return "?";
}

namespace {

Block block_of(Stmts s) { return Block{-1, std::move(s)}; }

Stmt make(StmtKind k) {
  Stmt s;
  s.kind = k;
  return s;
}

Stmt call(StmtKind k, std::string target, Expr receiver, std::string method, std::vector<Expr> args) {
  Stmt s = make(k);
  s.target = std::move(target);
  s.expr = std::move(receiver);
  s.method = std::move(method);
  s.args = std::move(args);
  return s;
}

void number(Block& b, int& next_block, int& next_stmt, std::vector<const Stmt*>& by_id) {
  b.id = next_block++;
  for (auto& s : b.stmts) {
    s.id = next_stmt++;
    by_id.push_back(&s);
    for (auto& child : s.blocks) number(child, next_block, next_stmt, by_id);
    for (auto& c : s.cases) number(c.body, next_block, next_stmt, by_id);
  }
}

void index_method(Method& m) {
  m.by_id.assign(1, nullptr);
  int next_block = 0;
  int next_stmt = 1;
  number(m.body, next_block, next_stmt, m.by_id);
}

std::string args_text(const std::vector<Expr>& args) {
  std::string s = "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ", ";
    s += args[i].text;
  }
  return s + ")";
}

void outline_block(std::string& out, const Block& b, int depth) {
  for (const auto& s : b.stmts) {
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    const std::string assign_prefix = s.target.empty() ? "" : s.target + " = ";
    switch (s.kind) {
      case StmtKind::Assign: out += s.target + " = " + s.expr.text; break;
      case StmtKind::If: out += "if " + s.expr.text; break;
      case StmtKind::Switch: out += "switch " + s.expr.text; break;
      case StmtKind::ForEach: out += "foreach " + s.target + " in " + s.expr.text; break;
      case StmtKind::AsyncCall: out += s.expr.text + "!" + s.method + args_text(s.args); break;
      case StmtKind::SyncCall: out += assign_prefix + s.expr.text + "." + s.method + args_text(s.args); break;
      case StmtKind::AwaitCall:
        out += assign_prefix + "await " + s.expr.text + "!" + s.method + args_text(s.args);
        break;
      case StmtKind::Await: out += "await " + s.expr.text; break;
      case StmtKind::Return: out += "return " + s.expr.text; break;
      case StmtKind::Skip: out += "skip"; break;
      case StmtKind::New: out += s.target + " = new " + s.method + args_text(s.args); break;
    }
    if (!s.label.empty()) out += "  [" + s.label + "]";
    out += '\n';
    if (s.kind == StmtKind::If) {
      outline_block(out, s.blocks[0], depth + 1);
      if (!s.blocks[1].stmts.empty()) {
        out.append(static_cast<std::size_t>(depth) * 2, ' ');
        out += "else\n";
        outline_block(out, s.blocks[1], depth + 1);
      }
    } else if (s.kind == StmtKind::ForEach) {
      outline_block(out, s.blocks[0], depth + 1);
    } else if (s.kind == StmtKind::Switch) {
      for (const auto& c : s.cases) {
        out.append(static_cast<std::size_t>(depth + 1) * 2, ' ');
        out += "case " + pattern_text(c.pattern) + "\n";
        outline_block(out, c.body, depth + 2);
      }
    }
  }
}

}  // namespace

Stmt assign(std::string target, Expr value) {
  Stmt s = make(StmtKind::Assign);
  s.target = std::move(target);
  s.expr = std::move(value);
  return s;
}

Stmt if_(Expr cond, Stmts then_branch, Stmts else_branch) {
  Stmt s = make(StmtKind::If);
  s.expr = std::move(cond);
  s.blocks.push_back(block_of(std::move(then_branch)));
  s.blocks.push_back(block_of(std::move(else_branch)));
  return s;
}

Stmt switch_(Expr scrutinee, std::vector<std::pair<Pattern, Stmts>> cases) {
  Stmt s = make(StmtKind::Switch);
  s.expr = std::move(scrutinee);
  for (auto& [p, body] : cases) s.cases.push_back(Case{std::move(p), block_of(std::move(body))});
  return s;
}

Stmt for_each(std::string loop_var, Expr list, Stmts body) {
  Stmt s = make(StmtKind::ForEach);
  s.target = std::move(loop_var);
  s.expr = std::move(list);
  s.blocks.push_back(block_of(std::move(body)));
  return s;
}

Stmt async_call(Expr receiver, std::string method, std::vector<Expr> args) {
  return call(StmtKind::AsyncCall, {}, std::move(receiver), std::move(method), std::move(args));
}

Stmt sync_call(std::string target, Expr receiver, std::string method, std::vector<Expr> args) {
  return call(StmtKind::SyncCall, std::move(target), std::move(receiver), std::move(method), std::move(args));
}

Stmt await_call(std::string target, Expr receiver, std::string method, std::vector<Expr> args) {
  return call(StmtKind::AwaitCall, std::move(target), std::move(receiver), std::move(method), std::move(args));
}

Stmt await_(Expr guard) {
  Stmt s = make(StmtKind::Await);
  s.expr = std::move(guard);
  return s;
}

Stmt return_(Expr value) {
  Stmt s = make(StmtKind::Return);
  s.expr = std::move(value);
  return s;
}

Stmt skip() { return make(StmtKind::Skip); }

Stmt new_(std::string target, std::string kind, std::vector<Expr> args) {
  Stmt s = make(StmtKind::New);
  s.target = std::move(target);
  s.method = std::move(kind);
  s.args = std::move(args);
  return s;
}

const Stmt& Method::stmt(int id) const {
  if (id < 1 || static_cast<std::size_t>(id) >= by_id.size()) {
    throw std::out_of_range(name + ": no statement " + std::to_string(id));
  }
  return *by_id[static_cast<std::size_t>(id)];
}

void Behavior::add(std::string name, std::vector<std::string> params, Stmts body, bool protocol) {
  Method m;
  m.name = name;
  m.params = std::move(params);
  m.body = block_of(std::move(body));
  m.protocol = protocol;
  auto [it, inserted] = methods.insert_or_assign(std::move(name), std::move(m));
  index_method(it->second);
}

const Method& Behavior::method(std::string_view name) const {
  auto it = methods.find(name);
  if (it == methods.end()) throw std::out_of_range(kind + " has no method '" + std::string(name) + "'");
  return it->second;
}

void Registry::add(Behavior b) {
  std::string key = b.kind;
  auto [it, inserted] = kinds_.try_emplace(std::move(key), std::move(b));
  if (!inserted) throw std::invalid_argument("behavior '" + it->first + "' registered twice");
  for (auto& [name, m] : it->second.methods) index_method(m);
}

const Behavior& Registry::behavior(std::string_view kind) const {
  auto it = kinds_.find(kind);
  if (it == kinds_.end()) throw std::out_of_range("unknown behavior '" + std::string(kind) + "'");
  return it->second;
}

std::string outline(const Method& m) {
  std::string out = m.name + "(";
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    if (i) out += ", ";
    out += m.params[i];
  }
  out += m.protocol ? ") protocol\n" : ")\n";
  outline_block(out, m.body, 1);
  return out;
}

}  // namespace mms::actor
