#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <set>

#include "skillcraft/interp.hpp"
#include "skillcraft/script.hpp"

using namespace skillcraft;
using namespace skillcraft::script;

namespace {

ScriptAst must_parse(const std::string& src) {
  auto r = parse(src);
  if (!r.ok()) FAIL("parse failed at line " << r.issue->line << ": " << r.issue->message);
  return *r.ast;
}

Value eval_ok(const std::string& src, Record bindings = {}) {
  NullDispatcher nd;
  auto r = evaluate(must_parse(src), bindings, nd);
  if (!r.ok()) FAIL("evaluate failed: " << r.issue->message);
  return *r.value;
}

RuntimeIssue eval_err(const std::string& src, Record bindings = {}) {
  NullDispatcher nd;
  auto r = evaluate(must_parse(src), bindings, nd);
  REQUIRE_FALSE(r.ok());
  return *r.issue;
}

}  // namespace

TEST_CASE("minimal script parses to one assignment") {
  auto ast = must_parse("result = 1");
  REQUIRE(ast.statements.size() == 1);
  CHECK(ast.statements[0].kind == Stmt::Kind::Assign);
  CHECK(ast.statements[0].target == "result");
}

TEST_CASE("unmatched closing brace reports its line") {
  std::string src;
  for (int i = 1; i <= 7; ++i) src += "x" + std::to_string(i) + " = " + std::to_string(i) + "\n";
  src += "}\n";
  auto r = parse(src);
  REQUIRE_FALSE(r.ok());
  CHECK(r.issue->line == 8);
  CHECK(r.issue->message.find("unexpected token '}'") != std::string::npos);
  CHECK(r.issue->context_snippet.find("> 8 | }") != std::string::npos);
}

TEST_CASE("keywords of other languages are syntax errors") {
  auto r = parse("return x");
  REQUIRE_FALSE(r.ok());
  CHECK(r.issue->message.find("invalid keyword 'return'") != std::string::npos);

  auto r2 = parse("x = 1\nwhile true { }");
  REQUIRE_FALSE(r2.ok());
  CHECK(r2.issue->line == 2);
  CHECK(r2.issue->message.find("invalid keyword 'while'") != std::string::npos);

  CHECK_FALSE(parse("x = None").ok());
  CHECK_FALSE(parse("def f() { }").ok());
}

TEST_CASE("empty and blank scripts are rejected") {
  CHECK_FALSE(parse("").ok());
  CHECK_FALSE(parse("   \n\t\n").ok());
}

TEST_CASE("syntax issue line never exceeds the line count") {
  auto r = parse("x = (1 + \n2");  // error discovered at end of input
  REQUIRE_FALSE(r.ok());
  CHECK(r.issue->line >= 1);
  CHECK(r.issue->line <= 2);
}

TEST_CASE("multi-line record literals and comments parse") {
  auto ast = must_parse(
      "# collect fields\n"
      "result = {\n"
      "    \"a\": 1,\n"
      "    \"b\": [1, 2,\n"
      "           3],\n"
      "}\n");
  REQUIRE(ast.statements.size() == 1);
  NullDispatcher nd;
  auto v = evaluate(ast, {}, nd);
  REQUIRE(v.ok());
  CHECK(serialize(*v.value) == "{\"a\": 1, \"b\": [1, 2, 3]}");
}

TEST_CASE("free variables: reads before assignment") {
  CHECK(free_variables(must_parse("result = breed")) == std::set<std::string>{"breed"});
  CHECK(free_variables(must_parse("x = 1\nresult = x")).empty());
  CHECK(free_variables(must_parse("result = len(items)")) == std::set<std::string>{"items"});
  // builtins and call_tool are not free variables
  CHECK(free_variables(must_parse("result = call_tool(\"t\", a=x)")) ==
        std::set<std::string>{"x"});
}

TEST_CASE("free variables: if branches need both sides to assign") {
  auto only_then = must_parse(
      "if flag {\n"
      "    y = 1\n"
      "}\n"
      "result = y\n");
  CHECK(free_variables(only_then) == std::set<std::string>{"flag", "y"});

  auto both = must_parse(
      "if flag {\n"
      "    y = 1\n"
      "} else {\n"
      "    y = 2\n"
      "}\n"
      "result = y\n");
  CHECK(free_variables(both) == std::set<std::string>{"flag"});
}

TEST_CASE("free variables: loop variable is bound inside the body only") {
  auto ast = must_parse(
      "total = 0\n"
      "for item in items {\n"
      "    total = total + item\n"
      "}\n"
      "result = total\n");
  CHECK(free_variables(ast) == std::set<std::string>{"items"});
}

TEST_CASE("evaluate: arithmetic and bindings") {
  Record b;
  b.set("a", Value(1));
  b.set("b", Value(2));
  CHECK(eval_ok("result = a + b", b) == Value(3));
  CHECK(eval_ok("result = 7 % 3") == Value(1));
  CHECK(eval_ok("result = \"a\" + \"b\"") == Value("ab"));
  CHECK(eval_ok("result = [1] + [2, 3]") == Value(Value::List{Value(1), Value(2), Value(3)}));
}

TEST_CASE("evaluate: arithmetic with null is a type error naming the line") {
  Record b;
  b.set("x", Value(Record{{"weight", Value()}}));
  auto issue = eval_err("y = 1\nresult = x.weight + 1", b);
  CHECK(issue.kind == IssueKind::type_error);
  REQUIRE_FALSE(issue.trace.empty());
  CHECK(issue.trace[0].first == 2);
  // inputs are echoed exactly
  CHECK(Value(issue.inputs) == Value(b));
}

TEST_CASE("evaluate: unknown names") {
  auto issue = eval_err("result = r");
  CHECK(issue.kind == IssueKind::unknown_name);
  CHECK(issue.message.find("'r'") != std::string::npos);

  auto missing = eval_err("x = 1");
  CHECK(missing.kind == IssueKind::unknown_name);
  CHECK(missing.message.find("result") != std::string::npos);
}

TEST_CASE("evaluate: division and comparison errors") {
  CHECK(eval_err("result = 1 / 0").kind == IssueKind::type_error);
  CHECK(eval_err("result = \"a\" < 1").kind == IssueKind::type_error);
  CHECK(eval_ok("result = \"a\" < \"b\"") == Value(true));
}

TEST_CASE("evaluate: control flow") {
  CHECK(eval_ok("if 2 > 1 {\n    result = \"yes\"\n} else {\n    result = \"no\"\n}") ==
        Value("yes"));
  CHECK(eval_ok("total = 0\nfor x in [1, 2, 3] {\n    total = total + x\n}\nresult = total") ==
        Value(6));
  // loop over empty list runs zero times
  CHECK(eval_ok("total = 0\nfor x in [] {\n    total = total + x\n}\nresult = total") ==
        Value(0));
}

TEST_CASE("evaluate: step budget halts runaway work") {
  std::string src = "total = 0\nfor x in big {\n    total = total + x\n}\nresult = total";
  Value::List big;
  for (int i = 0; i < 100000; ++i) big.push_back(Value(i));
  Record b;
  b.set("big", Value(std::move(big)));
  NullDispatcher nd;
  auto r = evaluate(must_parse(src), b, nd, 1000);
  REQUIRE_FALSE(r.ok());
  CHECK(r.issue->kind == IssueKind::budget_exceeded);
}

TEST_CASE("evaluate: builtins") {
  CHECK(eval_ok("result = len(\"abc\")") == Value(3));
  CHECK(eval_ok("result = len([1, 2])") == Value(2));
  CHECK(eval_ok("result = str(12)") == Value("12"));
  CHECK(eval_ok("result = num(\"3.5\")") == Value(3.5));
  CHECK(eval_ok("result = lower(\"AbC\")") == Value("abc"));
  CHECK(eval_ok("result = upper(\"abc\")") == Value("ABC"));
  CHECK(eval_ok("result = contains(\"hello\", \"ell\")") == Value(true));
  CHECK(eval_ok("result = contains([1, 2], 3)") == Value(false));
  CHECK(eval_ok("result = join(split(\"a,b,c\", \",\"), \"-\")") == Value("a-b-c"));
  CHECK(eval_ok("result = keys({\"a\": 1, \"b\": 2})") ==
        Value(Value::List{Value("a"), Value("b")}));
  CHECK(eval_ok("result = get({\"a\": 1}, \"b\", 9)") == Value(9));
  CHECK(eval_ok("result = get({\"a\": 1}, \"b\")") == Value());
  CHECK(eval_ok("result = set({\"a\": 1}, \"b\", 2)") ==
        Value(Record{{"a", Value(1)}, {"b", Value(2)}}));
  CHECK(eval_ok("result = append([1], 2)") == Value(Value::List{Value(1), Value(2)}));
  CHECK(eval_ok("result = slice([1, 2, 3, 4], 1, 3)") ==
        Value(Value::List{Value(2), Value(3)}));
  CHECK(eval_ok("result = slice(\"abcdef\", 0, 2)") == Value("ab"));
  CHECK(eval_ok("result = round(2.567, 1)") == Value(2.6));
  CHECK(eval_ok("result = json_decode(\"[1, 2]\")") == Value(Value::List{Value(1), Value(2)}));
  CHECK(eval_ok("result = json_encode({\"a\": 1})") == Value("{\"a\": 1}"));
  CHECK(eval_ok("result = regex_match(\"^ab+\", \"abbb\")") == Value(true));
  CHECK(eval_ok("result = regex_match(\"^z\", \"abbb\")") == Value(false));
}

TEST_CASE("evaluate: builtin arity errors") {
  CHECK(eval_err("result = len()").kind == IssueKind::arity_error);
  CHECK(eval_err("result = get({\"a\": 1})").kind == IssueKind::arity_error);
  CHECK(eval_err("result = nosuchfn(1)").kind == IssueKind::unknown_name);
}

TEST_CASE("evaluate: tool dispatch goes through the dispatcher") {
  struct Fake : ToolDispatcher {
    Value dispatch(const std::string& tool, const Record& args) override {
      if (tool == "boom") throw DispatchError{IssueKind::tool_failure, "backend exploded", {}};
      Record r;
      r.set("tool", Value(tool));
      r.set("args", Value(args));
      return Value(r);
    }
  } fake;
  auto ast = must_parse("result = call_tool(\"echo\", a=1, b=\"x\")");
  auto r = evaluate(ast, {}, fake);
  REQUIRE(r.ok());
  CHECK(serialize(*r.value) == "{\"tool\": \"echo\", \"args\": {\"a\": 1, \"b\": \"x\"}}");

  auto bad = evaluate(must_parse("result = call_tool(\"boom\")"), {}, fake);
  REQUIRE_FALSE(bad.ok());
  CHECK(bad.issue->kind == IssueKind::tool_failure);
  CHECK(bad.issue->message == "backend exploded");
}

TEST_CASE("render canonical: normalization") {
  CHECK(render_canonical(must_parse("result=1")) == "result = 1\n");
  CHECK(render_canonical(must_parse("x   =  1 + 2 * 3")) == "x = 1 + 2 * 3\n");
  // parenthesization only where precedence demands it
  CHECK(render_canonical(must_parse("x = (1 + 2) * 3")) == "x = (1 + 2) * 3\n");
  CHECK(render_canonical(must_parse("x = 1 + (2 * 3)")) == "x = 1 + 2 * 3\n");
  CHECK(render_canonical(must_parse("x = a - (b - c)")) == "x = a - (b - c)\n");
  CHECK(render_canonical(must_parse("x = not (a and b)")) == "x = not (a and b)\n");
}

TEST_CASE("render canonical: record keys in insertion order") {
  auto src = "result = {\"z\": 1, \"m\": {\"b\": 2, \"a\": 3}}";
  CHECK(render_canonical(must_parse(src)) ==
        "result = {\"z\": 1, \"m\": {\"b\": 2, \"a\": 3}}\n");
}

TEST_CASE("render canonical: blocks") {
  auto src =
      "for x in xs {\n"
      "    if x > 2 {\n"
      "        total = total + x\n"
      "    } else {\n"
      "        total = total - x\n"
      "    }\n"
      "}\n";
  CHECK(render_canonical(must_parse(src)) == src);
}

TEST_CASE("round-trip: parse(render(parse(s))) equals parse(s)") {
  const char* samples[] = {
      "result = 1",
      "x = call_tool(\"breed_profile\", breed_name=name)\nresult = {\"p\": x.origin}",
      "t = 0\nfor v in [1, 2, 3] {\n  t = t + v\n}\nresult = t",
      "if a and not b {\n  result = [a, -b]\n} else {\n  result = null\n}",
      "result = get({\"k\": [true, false]}, \"k\", [])",
  };
  for (const char* s : samples) {
    auto first = must_parse(s);
    auto rendered = render_canonical(first);
    auto second = must_parse(rendered);
    CHECK(equal(first, second));
    // canonical form is a fixpoint
    CHECK(render_canonical(second) == rendered);
  }
}

namespace {

// Tiny deterministic AST generator for the round-trip property.
struct AstGen {
  std::uint64_t state;
  explicit AstGen(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9E3779B97f4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  int pick(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

  ExprPtr expr(int depth) {
    auto e = std::make_shared<Expr>();
    int kind = depth <= 0 ? pick(4) : pick(9);
    switch (kind) {
      case 0: e->kind = Expr::Kind::Number; e->num_val = pick(100); break;
      case 1: e->kind = Expr::Kind::String; e->str_val = "s" + std::to_string(pick(5)); break;
      case 2: e->kind = Expr::Kind::Var; e->str_val = std::string(1, static_cast<char>('a' + pick(4))); break;
      case 3: e->kind = Expr::Kind::Bool; e->bool_val = pick(2) == 0; break;
      case 4: {
        e->kind = Expr::Kind::Binary;
        static const char* ops[] = {"+", "-", "*", "==", "<", "and", "or", "%"};
        e->str_val = ops[pick(8)];
        e->children = {expr(depth - 1), expr(depth - 1)};
        break;
      }
      case 5: {
        e->kind = Expr::Kind::ListLit;
        int n = pick(3);
        for (int i = 0; i < n; ++i) e->children.push_back(expr(depth - 1));
        break;
      }
      case 6: {
        e->kind = Expr::Kind::RecordLit;
        int n = 1 + pick(3);
        for (int i = 0; i < n; ++i) {
          e->keys.push_back("k" + std::to_string(i));
          e->children.push_back(expr(depth - 1));
        }
        break;
      }
      case 7: {
        e->kind = Expr::Kind::Field;
        e->str_val = "f" + std::to_string(pick(3));
        e->children = {expr(depth - 1)};
        break;
      }
      default: {
        e->kind = Expr::Kind::Unary;
        e->str_val = pick(2) == 0 ? "-" : "not";
        e->children = {expr(depth - 1)};
        break;
      }
    }
    return e;
  }

  Stmt stmt(int depth) {
    Stmt st;
    int kind = depth <= 0 ? pick(2) : pick(4);
    switch (kind) {
      case 0:
        st.kind = Stmt::Kind::Assign;
        st.target = std::string(1, static_cast<char>('a' + pick(4)));
        st.expr = expr(2);
        break;
      case 1:
        st.kind = Stmt::Kind::ExprStmt;
        st.expr = expr(2);
        break;
      case 2: {
        st.kind = Stmt::Kind::For;
        st.target = "it";
        st.expr = expr(1);
        int n = 1 + pick(2);
        for (int i = 0; i < n; ++i) st.body.push_back(stmt(depth - 1));
        break;
      }
      default: {
        st.kind = Stmt::Kind::If;
        st.expr = expr(1);
        st.body.push_back(stmt(depth - 1));
        if (pick(2) == 0) st.else_body.push_back(stmt(depth - 1));
        break;
      }
    }
    return st;
  }
};

}  // namespace

TEST_CASE("property: random ASTs survive render/parse round-trips") {
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    AstGen gen(seed);
    ScriptAst ast;
    int n = 1 + gen.pick(4);
    for (int i = 0; i < n; ++i) ast.statements.push_back(gen.stmt(2));
    std::string rendered = render_canonical(ast);
    auto parsed = parse(rendered);
    REQUIRE(parsed.ok());
    CHECK(equal(ast, *parsed.ast));
    CHECK(render_canonical(*parsed.ast) == rendered);
  }
}

TEST_CASE("property: evaluation is deterministic") {
  std::string src =
      "out = {}\n"
      "for x in [3, 1, 2] {\n"
      "    out = set(out, str(x), x * 2)\n"
      "}\n"
      "result = out\n";
  auto ast = must_parse(src);
  NullDispatcher nd;
  auto a = evaluate(ast, {}, nd);
  auto b = evaluate(ast, {}, nd);
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK(serialize(*a.value) == serialize(*b.value));
  CHECK(serialize(*a.value) == "{\"3\": 6, \"1\": 2, \"2\": 4}");
}

TEST_CASE("property: free-variable soundness") {
  // Evaluating with bindings exactly equal to free_variables never raises
  // unknown_name for a parameter.
  const char* samples[] = {
      "result = a + b",
      "if flag {\n  x = 1\n} else {\n  x = p\n}\nresult = x",
      "t = 0\nfor i in items {\n  t = t + i * w\n}\nresult = t",
  };
  NullDispatcher nd;
  for (const char* s : samples) {
    auto ast = must_parse(s);
    Record bindings;
    for (const auto& name : free_variables(ast)) {
      if (name == "items")
        bindings.set(name, Value(Value::List{Value(1), Value(2)}));
      else
        bindings.set(name, Value(1));
    }
    auto r = evaluate(ast, bindings, nd);
    if (!r.ok()) CHECK(r.issue->kind != IssueKind::unknown_name);
  }
}

TEST_CASE("called_tools extracts literal call_tool targets") {
  auto ast = must_parse(
      "a = call_tool(\"t1\", x=1)\n"
      "for i in [1] {\n"
      "    b = call_tool(\"t2\", y=call_tool(\"t3\"))\n"
      "}\n"
      "result = a\n");
  auto tools = called_tools(ast);
  CHECK(tools == std::vector<std::string>{"t1", "t2", "t3"});
}
