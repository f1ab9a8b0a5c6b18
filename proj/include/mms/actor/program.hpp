// Behavior programs: statement trees interpreted by the actor runtime.
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mms/actor/value.hpp"

namespace mms::actor {

// Small ordered name -> value map used for fields and locals.
class Env {
 public:
  using Entry = std::pair<std::string, Value>;

  Env() = default;
  Env(std::initializer_list<Entry> init);

  const Value* find(std::string_view name) const;
  const Value& get(std::string_view name) const;  // throws TypeError when unbound
  bool contains(std::string_view name) const { return find(name) != nullptr; }
  void set(std::string_view name, Value v);
  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  friend bool operator==(const Env&, const Env&) = default;

 private:
  std::vector<Entry> entries_;  // sorted by name
};

void write_env(std::string& out, const Env& env, const RefRenaming& rn = {});

// Name resolution inside a method body: locals shadow fields, and `this`
// names the executing object.
struct EvalContext {
  const Env& fields;
  const Env& locals;
  ObjRef self;

  const Value& operator[](std::string_view name) const;
};

struct Expr {
  std::function<Value(const EvalContext&)> fn;
  std::string text;

  Value operator()(const EvalContext& ctx) const { return fn(ctx); }
};

Expr var(std::string name);
Expr lit(Value v, std::string text);
Expr self_ref();
Expr fn(std::string text, std::function<Value(const EvalContext&)> f);

struct Pattern {
  enum class Kind { Any, Bind, Ctor, Nil, Cons };
  Kind kind = Kind::Any;
  std::string name;  // binder or constructor tag
  std::vector<Pattern> sub;
};

Pattern p_any();
Pattern p_var(std::string name);
Pattern p_ctor(std::string tag, std::vector<Pattern> sub = {});
Pattern p_nil();
Pattern p_cons(Pattern head, Pattern tail);

bool match(const Pattern& p, const Value& v, std::vector<Env::Entry>& binds);
std::string pattern_text(const Pattern& p);

enum class StmtKind {
  Assign,
  If,
  Switch,
  ForEach,
  AsyncCall,  // o!m(args), no waiter
  SyncCall,   // x = o.m(args); inline when o is this
  AwaitCall,  // x = await o!m(args)
  Await,      // await guard
  Return,
  Skip,
  New,
};

struct Stmt;

struct Block {
  int id = -1;
  std::vector<Stmt> stmts;
};

struct Case;

struct Stmt {
  StmtKind kind = StmtKind::Skip;
  int id = -1;  // 1-based within the method, preorder
  std::string label;
  std::string target;  // result variable, or the loop variable of ForEach
  Expr expr;           // value, condition, scrutinee, list, or call receiver
  std::string method;  // callee, or the class of New
  std::vector<Expr> args;
  std::vector<Block> blocks;  // If: then and else; ForEach: body
  std::vector<Case> cases;

  Stmt&& labelled(std::string l) && {
    label = std::move(l);
    return std::move(*this);
  }
};

struct Case {
  Pattern pattern;
  Block body;
};

using Stmts = std::vector<Stmt>;

Stmt assign(std::string target, Expr value);
Stmt if_(Expr cond, Stmts then_branch, Stmts else_branch = {});
Stmt switch_(Expr scrutinee, std::vector<std::pair<Pattern, Stmts>> cases);
Stmt for_each(std::string loop_var, Expr list, Stmts body);
Stmt async_call(Expr receiver, std::string method, std::vector<Expr> args = {});
Stmt sync_call(std::string target, Expr receiver, std::string method, std::vector<Expr> args = {});
Stmt await_call(std::string target, Expr receiver, std::string method, std::vector<Expr> args = {});
Stmt await_(Expr guard);
Stmt return_(Expr value);
Stmt skip();
Stmt new_(std::string target, std::string kind, std::vector<Expr> args = {});

struct Method {
  std::string name;
  std::vector<std::string> params;
  Block body;
  // Protocol methods run to completion inside a single coarse step.
  bool protocol = false;
  std::vector<const Stmt*> by_id;  // index = stmt id, slot 0 unused

  const Stmt& stmt(int id) const;
};

struct Behavior {
  std::string kind;
  std::vector<std::string> ctor_params;  // bound as fields by New
  Env initial_fields;
  std::map<std::string, Method, std::less<>> methods;
  // Object-level quiescence demanded of stable states.
  std::function<bool(const Env& fields)> idle;

  void add(std::string name, std::vector<std::string> params, Stmts body, bool protocol = false);
  const Method& method(std::string_view name) const;
};

class Registry {
 public:
  void add(Behavior b);
  const Behavior& behavior(std::string_view kind) const;
  const std::map<std::string, Behavior, std::less<>>& behaviors() const { return kinds_; }

 private:
  std::map<std::string, Behavior, std::less<>> kinds_;
};

// Indented structural listing of a method: one line per statement.
std::string outline(const Method& m);

}  // namespace mms::actor
