// Budgeted tree-walking evaluator for skill scripts. Evaluation is pure with
// respect to (ast, bindings, dispatcher): values are immutable, every builtin
// is deterministic, and all tool effects go through the dispatcher.
#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <regex>
#include <string>
#include <vector>

#include "skillcraft/script.hpp"
#include "skillcraft/value.hpp"

namespace skillcraft::script {

enum class IssueKind {
  type_error,
  unknown_name,
  unknown_tool,
  arity_error,
  budget_exceeded,
  depth_exceeded,
  tool_failure,
};

inline const char* to_string(IssueKind k) {
  switch (k) {
    case IssueKind::type_error: return "type_error";
    case IssueKind::unknown_name: return "unknown_name";
    case IssueKind::unknown_tool: return "unknown_tool";
    case IssueKind::arity_error: return "arity_error";
    case IssueKind::budget_exceeded: return "budget_exceeded";
    case IssueKind::depth_exceeded: return "depth_exceeded";
    default: return "tool_failure";
  }
}

struct RuntimeIssue {
  IssueKind kind;
  std::string message;
  // Innermost frame first. Frames from nested skill executions come before
  // the frames of the script that dispatched them.
  std::vector<std::pair<int, std::string>> trace;
  Record inputs;  // the argument bindings at evaluation entry, echoed back

  Value to_value() const {
    Value::List frames;
    for (const auto& [line, stmt] : trace) {
      Record f;
      f.set("line", Value(line));
      f.set("statement", Value(stmt));
      frames.push_back(Value(std::move(f)));
    }
    Record r;
    r.set("kind", Value(to_string(kind)));
    r.set("message", Value(message));
    r.set("trace", Value(std::move(frames)));
    r.set("inputs", Value(inputs));
    return Value(std::move(r));
  }
};

// Thrown by dispatchers. `inner_trace` carries frames from a nested skill
// execution so the error path stays visible across skill boundaries.
struct DispatchError {
  IssueKind kind = IssueKind::tool_failure;
  std::string message;
  std::vector<std::pair<int, std::string>> inner_trace;
};

// Tool dispatch contract: scripts reach every effect through this interface.
class ToolDispatcher {
 public:
  virtual ~ToolDispatcher() = default;
  virtual Value dispatch(const std::string& tool, const Record& args) = 0;
};

// Dispatcher that rejects everything; used for pure scripts.
class NullDispatcher : public ToolDispatcher {
 public:
  Value dispatch(const std::string& tool, const Record&) override {
    throw DispatchError{IssueKind::unknown_tool, "no tools available: '" + tool + "'", {}};
  }
};

struct EvalResult {
  std::optional<Value> value;
  std::optional<RuntimeIssue> issue;
  bool ok() const { return value.has_value(); }
};

inline constexpr long long kDefaultStepBudget = 100000;

namespace detail {

struct Raise {
  IssueKind kind;
  std::string message;
  std::vector<std::pair<int, std::string>> inner_trace;
};

class Evaluator {
 public:
  Evaluator(ToolDispatcher& dispatcher, long long budget)
      : dispatcher_(dispatcher), budget_(budget) {}

  Value run(const ScriptAst& ast, const Record& bindings) {
    for (const auto& [k, v] : bindings.items()) env_[k] = v;
    exec_block(ast.statements);
    auto it = env_.find("result");
    if (it == env_.end())
      throw Raise{IssueKind::unknown_name, "script did not set the 'result' variable", {}};
    return it->second;
  }

  std::vector<std::pair<int, std::string>> stack_trace() const {
    std::vector<std::pair<int, std::string>> t;
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it)
      t.emplace_back((*it)->line, statement_summary(**it));
    return t;
  }

 private:
  void step() {
    if (++steps_ > budget_)
      throw Raise{IssueKind::budget_exceeded,
                  "step budget of " + std::to_string(budget_) + " exceeded", {}};
  }

  void exec_block(const std::vector<Stmt>& stmts) {
    for (const auto& st : stmts) exec(st);
  }

  void exec(const Stmt& st) {
    stack_.push_back(&st);
    step();
    switch (st.kind) {
      case Stmt::Kind::Assign:
        env_[st.target] = eval(*st.expr);
        break;
      case Stmt::Kind::ExprStmt:
        eval(*st.expr);
        break;
      case Stmt::Kind::For: {
        Value iterable = eval(*st.expr);
        if (!iterable.is_list())
          throw Raise{IssueKind::type_error,
                      std::string("for-loop iterable must be a list, got ") +
                          iterable.type_name(), {}};
        for (const auto& item : iterable.as_list()) {
          env_[st.target] = item;
          exec_block(st.body);
        }
        break;
      }
      case Stmt::Kind::If: {
        if (truthy(eval(*st.expr)))
          exec_block(st.body);
        else
          exec_block(st.else_body);
        break;
      }
    }
    stack_.pop_back();
  }

  static bool truthy(const Value& v) {
    if (v.is_null()) return false;
    if (v.is_bool()) return v.as_bool();
    if (v.is_number()) return v.as_number() != 0.0;
    if (v.is_string()) return !v.as_string().empty();
    if (v.is_list()) return !v.as_list().empty();
    return !v.as_record().empty();
  }

  [[noreturn]] void type_err(const std::string& msg) {
    throw Raise{IssueKind::type_error, msg, {}};
  }

  Value eval(const Expr& e) {
    step();
    switch (e.kind) {
      case Expr::Kind::Null: return Value();
      case Expr::Kind::Bool: return Value(e.bool_val);
      case Expr::Kind::Number: return Value(e.num_val);
      case Expr::Kind::String: return Value(e.str_val);
      case Expr::Kind::ListLit: {
        Value::List items;
        items.reserve(e.children.size());
        for (const auto& c : e.children) items.push_back(eval(*c));
        return Value(std::move(items));
      }
      case Expr::Kind::RecordLit: {
        Record rec;
        for (std::size_t i = 0; i < e.children.size(); ++i)
          rec.set(e.keys[i], eval(*e.children[i]));
        return Value(std::move(rec));
      }
      case Expr::Kind::Var: {
        auto it = env_.find(e.str_val);
        if (it == env_.end())
          throw Raise{IssueKind::unknown_name, "name '" + e.str_val + "' is not defined", {}};
        return it->second;
      }
      case Expr::Kind::Field: {
        Value base = eval(*e.children[0]);
        if (!base.is_record())
          type_err("cannot access field '" + e.str_val + "' of " + base.type_name());
        const Value* f = base.as_record().find(e.str_val);
        if (!f) type_err("record has no field '" + e.str_val + "'");
        return *f;
      }
      case Expr::Kind::Index: return eval_index(e);
      case Expr::Kind::Unary: {
        Value v = eval(*e.children[0]);
        if (e.str_val == "not") return Value(!truthy(v));
        if (!v.is_number()) type_err(std::string("unary '-' needs a number, got ") + v.type_name());
        return Value(-v.as_number());
      }
      case Expr::Kind::Binary: return eval_binary(e);
      case Expr::Kind::Call: return eval_builtin(e);
      case Expr::Kind::CallTool: return eval_call_tool(e);
    }
    type_err("unreachable");
  }

  Value eval_index(const Expr& e) {
    Value base = eval(*e.children[0]);
    Value key = eval(*e.children[1]);
    if (base.is_list()) {
      if (!key.is_number() || !skillcraft::detail::integer_exact(key.as_number()))
        type_err("list index must be an integer");
      long long i = static_cast<long long>(key.as_number());
      const auto& l = base.as_list();
      if (i < 0 || i >= static_cast<long long>(l.size()))
        type_err("list index " + std::to_string(i) + " out of range (size " +
                 std::to_string(l.size()) + ")");
      return l[static_cast<std::size_t>(i)];
    }
    if (base.is_record()) {
      if (!key.is_string()) type_err("record index must be a string key");
      const Value* f = base.as_record().find(key.as_string());
      if (!f) type_err("record has no field '" + key.as_string() + "'");
      return *f;
    }
    if (base.is_string()) {
      if (!key.is_number() || !skillcraft::detail::integer_exact(key.as_number()))
        type_err("string index must be an integer");
      long long i = static_cast<long long>(key.as_number());
      const auto& s = base.as_string();
      if (i < 0 || i >= static_cast<long long>(s.size()))
        type_err("string index " + std::to_string(i) + " out of range");
      return Value(std::string(1, s[static_cast<std::size_t>(i)]));
    }
    type_err(std::string("cannot index into ") + base.type_name());
  }

  Value eval_binary(const Expr& e) {
    const std::string& op = e.str_val;
    if (op == "and") {
      Value l = eval(*e.children[0]);
      if (!truthy(l)) return Value(false);
      return Value(truthy(eval(*e.children[1])));
    }
    if (op == "or") {
      Value l = eval(*e.children[0]);
      if (truthy(l)) return Value(true);
      return Value(truthy(eval(*e.children[1])));
    }
    Value l = eval(*e.children[0]);
    Value r = eval(*e.children[1]);
    if (op == "==") return Value(l == r);
    if (op == "!=") return Value(l != r);
    auto numeric = [&](const char* name) {
      if (!l.is_number() || !r.is_number())
        type_err(std::string("unsupported operand types for ") + name + ": " + l.type_name() +
                 " and " + r.type_name());
    };
    if (op == "+") {
      if (l.is_number() && r.is_number()) return Value(l.as_number() + r.as_number());
      if (l.is_string() && r.is_string()) return Value(l.as_string() + r.as_string());
      if (l.is_list() && r.is_list()) {
        Value::List out = l.as_list();
        out.insert(out.end(), r.as_list().begin(), r.as_list().end());
        return Value(std::move(out));
      }
      type_err(std::string("unsupported operand types for +: ") + l.type_name() + " and " +
               r.type_name());
    }
    if (op == "-") { numeric("-"); return Value(l.as_number() - r.as_number()); }
    if (op == "*") { numeric("*"); return Value(l.as_number() * r.as_number()); }
    if (op == "/") {
      numeric("/");
      if (r.as_number() == 0.0) type_err("division by zero");
      return Value(l.as_number() / r.as_number());
    }
    if (op == "%") {
      numeric("%");
      if (r.as_number() == 0.0) type_err("modulo by zero");
      return Value(std::fmod(l.as_number(), r.as_number()));
    }
    // comparisons
    if (l.is_number() && r.is_number()) {
      double a = l.as_number(), b = r.as_number();
      if (op == "<") return Value(a < b);
      if (op == "<=") return Value(a <= b);
      if (op == ">") return Value(a > b);
      return Value(a >= b);
    }
    if (l.is_string() && r.is_string()) {
      const auto& a = l.as_string();
      const auto& b = r.as_string();
      if (op == "<") return Value(a < b);
      if (op == "<=") return Value(a <= b);
      if (op == ">") return Value(a > b);
      return Value(a >= b);
    }
    type_err(std::string("cannot compare ") + l.type_name() + " and " + r.type_name());
  }

  Value eval_call_tool(const Expr& e) {
    Value name = eval(*e.children[0]);
    if (!name.is_string()) type_err("call_tool name must be a string");
    Record args;
    for (std::size_t i = 0; i < e.keys.size(); ++i)
      args.set(e.keys[i], eval(*e.children[i + 1]));
    try {
      return dispatcher_.dispatch(name.as_string(), args);
    } catch (const DispatchError& err) {
      throw Raise{err.kind, err.message, err.inner_trace};
    }
  }

  void want_arity(const Expr& e, std::size_t lo, std::size_t hi) {
    if (e.children.size() < lo || e.children.size() > hi) {
      std::string expect = std::to_string(lo);
      if (hi != lo) expect += "-" + std::to_string(hi);
      throw Raise{IssueKind::arity_error,
                  e.str_val + "() expects " + expect + " argument(s), got " +
                      std::to_string(e.children.size()), {}};
    }
  }

  Value eval_builtin(const Expr& e) {
    const std::string& fn = e.str_val;
    if (!builtin_names().count(fn))
      throw Raise{IssueKind::unknown_name, "unknown function '" + fn + "'", {}};
    std::vector<Value> a;
    a.reserve(e.children.size());
    for (const auto& c : e.children) a.push_back(eval(*c));

    if (fn == "len") {
      want_arity(e, 1, 1);
      if (a[0].is_string()) return Value(a[0].as_string().size());
      if (a[0].is_list()) return Value(a[0].as_list().size());
      if (a[0].is_record()) return Value(a[0].as_record().size());
      type_err(std::string("len() needs a string, list or record, got ") + a[0].type_name());
    }
    if (fn == "str") {
      want_arity(e, 1, 1);
      if (a[0].is_string()) return a[0];
      return Value(serialize(a[0]));
    }
    if (fn == "num") {
      want_arity(e, 1, 1);
      if (a[0].is_number()) return a[0];
      if (a[0].is_bool()) return Value(a[0].as_bool() ? 1.0 : 0.0);
      if (a[0].is_string()) {
        const std::string& s = a[0].as_string();
        double v = 0;
        auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size())
          type_err("num() cannot parse '" + s + "'");
        return Value(v);
      }
      type_err(std::string("num() cannot convert ") + a[0].type_name());
    }
    if (fn == "lower" || fn == "upper") {
      want_arity(e, 1, 1);
      if (!a[0].is_string()) type_err(fn + "() needs a string");
      std::string s = a[0].as_string();
      for (char& c : s)
        c = fn == "lower" ? static_cast<char>(std::tolower(static_cast<unsigned char>(c)))
                          : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      return Value(std::move(s));
    }
    if (fn == "contains") {
      want_arity(e, 2, 2);
      if (a[0].is_string()) {
        if (!a[1].is_string()) type_err("contains() on a string needs a string needle");
        return Value(a[0].as_string().find(a[1].as_string()) != std::string::npos);
      }
      if (a[0].is_list()) {
        for (const auto& v : a[0].as_list())
          if (v == a[1]) return Value(true);
        return Value(false);
      }
      if (a[0].is_record()) {
        if (!a[1].is_string()) type_err("contains() on a record needs a string key");
        return Value(a[0].as_record().contains(a[1].as_string()));
      }
      type_err(std::string("contains() needs a string, list or record, got ") + a[0].type_name());
    }
    if (fn == "split") {
      want_arity(e, 2, 2);
      if (!a[0].is_string() || !a[1].is_string()) type_err("split() needs two strings");
      const std::string& s = a[0].as_string();
      const std::string& sep = a[1].as_string();
      if (sep.empty()) type_err("split() separator must be non-empty");
      Value::List parts;
      std::size_t start = 0;
      for (;;) {
        std::size_t at = s.find(sep, start);
        if (at == std::string::npos) {
          parts.push_back(Value(s.substr(start)));
          break;
        }
        parts.push_back(Value(s.substr(start, at - start)));
        start = at + sep.size();
      }
      return Value(std::move(parts));
    }
    if (fn == "join") {
      want_arity(e, 2, 2);
      if (!a[0].is_list() || !a[1].is_string()) type_err("join() needs a list and a string");
      std::string out;
      bool first = true;
      for (const auto& v : a[0].as_list()) {
        if (!v.is_string()) type_err("join() list items must be strings");
        if (!first) out += a[1].as_string();
        first = false;
        out += v.as_string();
      }
      return Value(std::move(out));
    }
    if (fn == "keys" || fn == "values") {
      want_arity(e, 1, 1);
      if (!a[0].is_record()) type_err(fn + "() needs a record");
      Value::List out;
      for (const auto& [k, v] : a[0].as_record().items())
        out.push_back(fn == "keys" ? Value(k) : v);
      return Value(std::move(out));
    }
    if (fn == "get") {
      want_arity(e, 2, 3);
      if (!a[0].is_record() || !a[1].is_string())
        type_err("get() needs a record and a string key");
      const Value* f = a[0].as_record().find(a[1].as_string());
      if (f) return *f;
      return e.children.size() == 3 ? a[2] : Value();
    }
    if (fn == "set") {
      want_arity(e, 3, 3);
      if (!a[0].is_record() || !a[1].is_string())
        type_err("set() needs a record and a string key");
      Record out = a[0].as_record();
      out.set(a[1].as_string(), a[2]);
      return Value(std::move(out));
    }
    if (fn == "append") {
      want_arity(e, 2, 2);
      if (!a[0].is_list()) type_err("append() needs a list");
      Value::List out = a[0].as_list();
      out.push_back(a[1]);
      return Value(std::move(out));
    }
    if (fn == "slice") {
      want_arity(e, 3, 3);
      if (!a[1].is_number() || !a[2].is_number() ||
          !skillcraft::detail::integer_exact(a[1].as_number()) ||
          !skillcraft::detail::integer_exact(a[2].as_number()))
        type_err("slice() bounds must be integers");
      long long lo = static_cast<long long>(a[1].as_number());
      long long hi = static_cast<long long>(a[2].as_number());
      auto clamp = [&](long long n) {
        lo = std::clamp<long long>(lo, 0, n);
        hi = std::clamp<long long>(hi, lo, n);
      };
      if (a[0].is_list()) {
        const auto& l = a[0].as_list();
        clamp(static_cast<long long>(l.size()));
        return Value(Value::List(l.begin() + lo, l.begin() + hi));
      }
      if (a[0].is_string()) {
        const auto& s = a[0].as_string();
        clamp(static_cast<long long>(s.size()));
        return Value(s.substr(static_cast<std::size_t>(lo), static_cast<std::size_t>(hi - lo)));
      }
      type_err("slice() needs a list or string");
    }
    if (fn == "round") {
      want_arity(e, 1, 2);
      if (!a[0].is_number()) type_err("round() needs a number");
      int digits = 0;
      if (a.size() == 2) {
        if (!a[1].is_number() || !skillcraft::detail::integer_exact(a[1].as_number()))
          type_err("round() digits must be an integer");
        digits = static_cast<int>(a[1].as_number());
      }
      double scale = std::pow(10.0, digits);
      return Value(std::round(a[0].as_number() * scale) / scale);
    }
    if (fn == "json_encode") {
      want_arity(e, 1, 1);
      return Value(serialize(a[0]));
    }
    if (fn == "json_decode") {
      want_arity(e, 1, 1);
      if (!a[0].is_string()) type_err("json_decode() needs a string");
      auto v = parse_json(a[0].as_string());
      if (!v) type_err("json_decode(): invalid JSON");
      return *v;
    }
    if (fn == "regex_match") {
      want_arity(e, 2, 2);
      if (!a[0].is_string() || !a[1].is_string()) type_err("regex_match() needs two strings");
      try {
        std::regex re(a[0].as_string(), std::regex::ECMAScript);
        return Value(std::regex_search(a[1].as_string(), re));
      } catch (const std::regex_error&) {
        type_err("regex_match(): invalid pattern");
      }
    }
    type_err("unreachable builtin");
  }

  ToolDispatcher& dispatcher_;
  long long budget_;
  long long steps_ = 0;
  std::map<std::string, Value> env_;
  std::vector<const Stmt*> stack_;
};

}  // namespace detail

// Evaluates the script and returns the final value of `result`, or a
// RuntimeIssue carrying the error kind, a statement trace (innermost frame
// first) and the input bindings.
inline EvalResult evaluate(const ScriptAst& ast, const Record& bindings,
                           ToolDispatcher& dispatcher,
                           long long budget = kDefaultStepBudget) {
  detail::Evaluator ev(dispatcher, budget);
  try {
    return {ev.run(ast, bindings), std::nullopt};
  } catch (const detail::Raise& r) {
    RuntimeIssue issue;
    issue.kind = r.kind;
    issue.message = r.message;
    issue.trace = r.inner_trace;
    auto frames = ev.stack_trace();
    issue.trace.insert(issue.trace.end(), frames.begin(), frames.end());
    issue.inputs = bindings;
    return {std::nullopt, std::move(issue)};
  }
}

}  // namespace skillcraft::script
