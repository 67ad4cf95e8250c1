// The bounded skill-script language every skill is written in.
//
// Statements:   x = expr | for x in expr { ... } | if expr { ... } else { ... }
//               | expression statement
// Expressions:  null true false, numbers, "strings", [lists], {records},
//               variables, a.b, a[i], binary (+ - * / % == != < <= > >= and or),
//               unary (not, -), builtin calls, call_tool("name", key=expr, ...)
//
// There are no user-defined functions, no while loops, no imports and no
// recursion construct; every loop walks a finite collection, so evaluation
// terminates within its step budget.
#pragma once

#include <algorithm>
#include <cctype>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "skillcraft/value.hpp"

namespace skillcraft::script {

// ---------------------------------------------------------------------------
// Errors

struct SyntaxIssue {
  int line = 0;
  std::string message;
  std::string context_snippet;  // offending line with one line of context each side
};

// ---------------------------------------------------------------------------
// AST

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
  enum class Kind {
    Null, Bool, Number, String,
    ListLit, RecordLit,
    Var, Field, Index,
    Unary, Binary,
    Call,      // builtin call: name(args...)
    CallTool,  // call_tool(name_expr, key=expr, ...)
  };

  Kind kind;
  int line = 0;

  bool bool_val = false;
  double num_val = 0;
  std::string str_val;  // string literal / var name / field name / op / call target
  std::vector<ExprPtr> children;
  std::vector<std::string> keys;  // record keys / call_tool keyword names
};

struct Stmt {
  enum class Kind { Assign, For, If, ExprStmt };

  Kind kind;
  int line = 0;
  std::string target;  // assignment target / loop variable
  ExprPtr expr;        // rhs / iterable / condition / expression
  std::vector<Stmt> body;
  std::vector<Stmt> else_body;
};

struct ScriptAst {
  std::vector<Stmt> statements;
};

// Structural equality, line numbers ignored.
inline bool equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.bool_val != b.bool_val || a.str_val != b.str_val ||
      a.keys != b.keys || a.children.size() != b.children.size())
    return false;
  if (a.kind == Expr::Kind::Number && a.num_val != b.num_val) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!equal(*a.children[i], *b.children[i])) return false;
  return true;
}

inline bool equal(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind || a.target != b.target) return false;
  if ((a.expr == nullptr) != (b.expr == nullptr)) return false;
  if (a.expr && !equal(*a.expr, *b.expr)) return false;
  auto both = [](const std::vector<Stmt>& x, const std::vector<Stmt>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!equal(x[i], y[i])) return false;
    return true;
  };
  return both(a.body, b.body) && both(a.else_body, b.else_body);
}

inline bool equal(const ScriptAst& a, const ScriptAst& b) {
  if (a.statements.size() != b.statements.size()) return false;
  for (std::size_t i = 0; i < a.statements.size(); ++i)
    if (!equal(a.statements[i], b.statements[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Builtins

inline const std::set<std::string>& builtin_names() {
  static const std::set<std::string> names = {
      "len",  "str",    "num",   "lower",  "upper", "contains",
      "split", "join",  "keys",  "values", "get",   "append",
      "slice", "round", "json_encode", "json_decode", "regex_match", "set"};
  return names;
}

// ---------------------------------------------------------------------------
// Lexer

namespace detail {

enum class Tok {
  End, Newline,
  Ident, Keyword, Forbidden,
  Number, String,
  Punct,  // operators and delimiters, text in `text`
};

struct Token {
  Tok type;
  std::string text;
  double num = 0;
  int line = 1;
};

inline bool is_keyword(std::string_view s) {
  static const std::set<std::string, std::less<>> kw = {
      "for", "in", "if", "else", "and", "or", "not", "true", "false", "null"};
  return kw.count(s) > 0;
}

// Reserved words from other languages are rejected outright so that e.g. a
// stray Python `return` fails loudly instead of silently parsing as a name.
inline bool is_forbidden(std::string_view s) {
  static const std::set<std::string, std::less<>> bad = {
      "return", "def",    "while",  "import", "from",   "class", "lambda",
      "yield",  "global", "nonlocal", "try",  "except", "finally", "raise",
      "with",   "pass",   "break",  "continue", "del",  "assert", "elif",
      "as",     "is",     "None",   "True",   "False",  "function", "func",
      "var",    "let",    "const",  "switch", "case",   "do"};
  return bad.count(s) > 0;
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  // Throws SyntaxIssue on lexical errors.
  std::vector<Token> run() {
    std::vector<Token> out;
    int paren_depth = 0;  // () and [] suppress newline tokens; {} does not
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        ++pos_;
        if (paren_depth == 0) out.push_back({Tok::Newline, "\n", 0, line_});
        ++line_;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
        continue;
      }
      if (c == '#') {  // comment to end of line
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        out.push_back(lex_number());
        continue;
      }
      if (c == '"') {
        out.push_back(lex_string());
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          ++pos_;
        std::string word(src_.substr(start, pos_ - start));
        Tok t = is_keyword(word) ? Tok::Keyword
                : is_forbidden(word) ? Tok::Forbidden
                                     : Tok::Ident;
        out.push_back({t, word, 0, line_});
        continue;
      }
      // punctuation
      if (c == '(' || c == '[') ++paren_depth;
      if (c == ')' || c == ']') paren_depth = std::max(0, paren_depth - 1);
      std::string p(1, c);
      if (pos_ + 1 < src_.size()) {
        char n = src_[pos_ + 1];
        if ((c == '=' && n == '=') || (c == '!' && n == '=') ||
            (c == '<' && n == '=') || (c == '>' && n == '=')) {
          p += n;
        }
      }
      static const std::string singles = "=+-*/%<>(){}[],:.";
      if (p.size() == 1 && singles.find(c) == std::string::npos)
        throw SyntaxIssue{line_, std::string("unexpected character '") + c + "'", ""};
      pos_ += p.size();
      out.push_back({Tok::Punct, p, 0, line_});
    }
    out.push_back({Tok::End, "", 0, line_});
    return out;
  }

 private:
  Token lex_number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.' && pos_ + 1 < src_.size() &&
        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // not an exponent after all
      }
    }
    std::string text(src_.substr(start, pos_ - start));
    double v = 0;
    auto r = std::from_chars(text.data(), text.data() + text.size(), v);
    if (r.ec != std::errc())
      throw SyntaxIssue{line_, "invalid number literal '" + text + "'", ""};
    return {Tok::Number, text, v, line_};
  }

  Token lex_string() {
    int start_line = line_;
    ++pos_;  // opening quote
    std::string s;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '"') {
        ++pos_;
        return {Tok::String, s, 0, start_line};
      }
      if (c == '\n')
        throw SyntaxIssue{start_line, "unterminated string literal", ""};
      if (c == '\\') {
        ++pos_;
        if (pos_ >= src_.size())
          throw SyntaxIssue{start_line, "unterminated string literal", ""};
        char e = src_[pos_];
        switch (e) {
          case '"': s += '"'; break;
          case '\\': s += '\\'; break;
          case '/': s += '/'; break;
          case 'n': s += '\n'; break;
          case 't': s += '\t'; break;
          case 'r': s += '\r'; break;
          case 'b': s += '\b'; break;
          case 'f': s += '\f'; break;
          case 'u': {
            if (pos_ + 4 >= src_.size())
              throw SyntaxIssue{start_line, "bad \\u escape", ""};
            unsigned cp = 0;
            for (int i = 1; i <= 4; ++i) {
              char h = src_[pos_ + i];
              cp <<= 4;
              if (h >= '0' && h <= '9') cp |= static_cast<unsigned>(h - '0');
              else if (h >= 'a' && h <= 'f') cp |= static_cast<unsigned>(h - 'a' + 10);
              else if (h >= 'A' && h <= 'F') cp |= static_cast<unsigned>(h - 'A' + 10);
              else throw SyntaxIssue{start_line, "bad \\u escape", ""};
            }
            pos_ += 4;
            // UTF-8 encode (basic plane only)
            if (cp < 0x80) {
              s += static_cast<char>(cp);
            } else if (cp < 0x800) {
              s += static_cast<char>(0xC0 | (cp >> 6));
              s += static_cast<char>(0x80 | (cp & 0x3F));
            } else {
              s += static_cast<char>(0xE0 | (cp >> 12));
              s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
              s += static_cast<char>(0x80 | (cp & 0x3F));
            }
            break;
          }
          default:
            throw SyntaxIssue{start_line, std::string("unknown escape '\\") + e + "'", ""};
        }
        ++pos_;
        continue;
      }
      s += c;
      ++pos_;
    }
    throw SyntaxIssue{start_line, "unterminated string literal", ""};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  ScriptAst parse_script() {
    ScriptAst ast;
    skip_newlines();
    while (!at(Tok::End)) {
      ast.statements.push_back(parse_statement());
      skip_newlines();
    }
    return ast;
  }

 private:
  [[noreturn]] void fail(const Token& t, const std::string& msg) {
    throw SyntaxIssue{t.line, msg, ""};
  }

  const Token& cur() const { return toks_[idx_]; }
  const Token& peek(std::size_t n = 1) const {
    return toks_[std::min(idx_ + n, toks_.size() - 1)];
  }
  bool at(Tok t) const { return cur().type == t; }
  bool at_punct(std::string_view p) const { return at(Tok::Punct) && cur().text == p; }
  bool at_keyword(std::string_view k) const { return at(Tok::Keyword) && cur().text == k; }
  Token advance() { return toks_[idx_++]; }

  void expect_punct(std::string_view p) {
    if (!at_punct(p)) fail(cur(), "expected '" + std::string(p) + "'" + got());
    advance();
  }

  std::string got() const {
    const Token& t = cur();
    switch (t.type) {
      case Tok::End: return ", got end of script";
      case Tok::Newline: return ", got end of line";
      default: return ", got '" + t.text + "'";
    }
  }

  void skip_newlines() {
    while (at(Tok::Newline)) advance();
  }

  void check_forbidden() {
    if (at(Tok::Forbidden))
      fail(cur(), "invalid keyword '" + cur().text + "' (not part of the skill-script language)");
  }

  Stmt parse_statement() {
    check_forbidden();
    if (at_keyword("for")) return parse_for();
    if (at_keyword("if")) return parse_if();
    if (at(Tok::Ident) && peek().type == Tok::Punct && peek().text == "=") {
      Stmt st;
      st.kind = Stmt::Kind::Assign;
      st.line = cur().line;
      st.target = advance().text;
      advance();  // '='
      skip_newlines();
      st.expr = parse_expr(true);
      end_statement();
      return st;
    }
    Stmt st;
    st.kind = Stmt::Kind::ExprStmt;
    st.line = cur().line;
    st.expr = parse_expr(true);
    end_statement();
    return st;
  }

  void end_statement() {
    if (at(Tok::Newline)) {
      advance();
      return;
    }
    if (at(Tok::End) || at_punct("}")) return;  // '}' closes the enclosing block
    fail(cur(), "unexpected token '" + cur().text + "'");
  }

  Stmt parse_for() {
    Stmt st;
    st.kind = Stmt::Kind::For;
    st.line = cur().line;
    advance();  // for
    check_forbidden();
    if (!at(Tok::Ident)) fail(cur(), "expected loop variable name" + got());
    st.target = advance().text;
    if (!at_keyword("in")) fail(cur(), "expected 'in'" + got());
    advance();
    st.expr = parse_expr(false);
    st.body = parse_block();
    return st;
  }

  Stmt parse_if() {
    Stmt st;
    st.kind = Stmt::Kind::If;
    st.line = cur().line;
    advance();  // if
    st.expr = parse_expr(false);
    st.body = parse_block();
    std::size_t mark = idx_;
    skip_newlines();
    if (at_keyword("else")) {
      advance();
      st.else_body = parse_block();
    } else {
      idx_ = mark;
    }
    return st;
  }

  std::vector<Stmt> parse_block() {
    skip_newlines();
    expect_punct("{");
    std::vector<Stmt> body;
    skip_newlines();
    while (!at_punct("}")) {
      if (at(Tok::End)) fail(cur(), "expected '}' before end of script");
      body.push_back(parse_statement());
      skip_newlines();
    }
    advance();  // '}'
    return body;
  }

  // allow_record: record literals are not allowed at the top level of a
  // for/if header so that '{' unambiguously opens the block.
  ExprPtr parse_expr(bool allow_record) { return parse_or(allow_record); }

  ExprPtr binary(int line, std::string op, ExprPtr l, ExprPtr r) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Binary;
    e->line = line;
    e->str_val = std::move(op);
    e->children = {std::move(l), std::move(r)};
    return e;
  }

  ExprPtr parse_or(bool ar) {
    auto l = parse_and(ar);
    while (at_keyword("or")) {
      int line = cur().line;
      advance();
      skip_newlines();
      l = binary(line, "or", l, parse_and(ar));
    }
    return l;
  }

  ExprPtr parse_and(bool ar) {
    auto l = parse_not(ar);
    while (at_keyword("and")) {
      int line = cur().line;
      advance();
      skip_newlines();
      l = binary(line, "and", l, parse_not(ar));
    }
    return l;
  }

  ExprPtr parse_not(bool ar) {
    if (at_keyword("not")) {
      int line = cur().line;
      advance();
      skip_newlines();
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Unary;
      e->line = line;
      e->str_val = "not";
      e->children = {parse_not(ar)};
      return e;
    }
    return parse_comparison(ar);
  }

  ExprPtr parse_comparison(bool ar) {
    auto l = parse_additive(ar);
    while (at(Tok::Punct) && (cur().text == "==" || cur().text == "!=" || cur().text == "<" ||
                              cur().text == "<=" || cur().text == ">" || cur().text == ">=")) {
      int line = cur().line;
      std::string op = advance().text;
      skip_newlines();
      l = binary(line, op, l, parse_additive(ar));
    }
    return l;
  }

  ExprPtr parse_additive(bool ar) {
    auto l = parse_multiplicative(ar);
    while (at_punct("+") || at_punct("-")) {
      int line = cur().line;
      std::string op = advance().text;
      skip_newlines();
      l = binary(line, op, l, parse_multiplicative(ar));
    }
    return l;
  }

  ExprPtr parse_multiplicative(bool ar) {
    auto l = parse_unary(ar);
    while (at_punct("*") || at_punct("/") || at_punct("%")) {
      int line = cur().line;
      std::string op = advance().text;
      skip_newlines();
      l = binary(line, op, l, parse_unary(ar));
    }
    return l;
  }

  ExprPtr parse_unary(bool ar) {
    if (at_punct("-")) {
      int line = cur().line;
      advance();
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Unary;
      e->line = line;
      e->str_val = "-";
      e->children = {parse_unary(ar)};
      return e;
    }
    return parse_postfix(ar);
  }

  ExprPtr parse_postfix(bool ar) {
    auto e = parse_primary(ar);
    for (;;) {
      if (at_punct(".")) {
        int line = cur().line;
        advance();
        check_forbidden();
        if (!at(Tok::Ident)) fail(cur(), "expected field name after '.'" + got());
        auto f = std::make_shared<Expr>();
        f->kind = Expr::Kind::Field;
        f->line = line;
        f->str_val = advance().text;
        f->children = {e};
        e = f;
      } else if (at_punct("[")) {
        int line = cur().line;
        advance();
        auto ix = std::make_shared<Expr>();
        ix->kind = Expr::Kind::Index;
        ix->line = line;
        ix->children = {e, parse_expr(true)};
        expect_punct("]");
        e = ix;
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_primary(bool allow_record) {
    check_forbidden();
    const Token& t = cur();
    auto e = std::make_shared<Expr>();
    e->line = t.line;
    switch (t.type) {
      case Tok::Number:
        e->kind = Expr::Kind::Number;
        e->num_val = t.num;
        advance();
        return e;
      case Tok::String:
        e->kind = Expr::Kind::String;
        e->str_val = t.text;
        advance();
        return e;
      case Tok::Keyword:
        if (t.text == "null") { e->kind = Expr::Kind::Null; advance(); return e; }
        if (t.text == "true") { e->kind = Expr::Kind::Bool; e->bool_val = true; advance(); return e; }
        if (t.text == "false") { e->kind = Expr::Kind::Bool; e->bool_val = false; advance(); return e; }
        fail(t, "unexpected keyword '" + t.text + "'");
      case Tok::Ident: {
        std::string name = advance().text;
        if (at_punct("(")) {
          if (name == "call_tool") return parse_call_tool(e->line);
          advance();  // '('
          e->kind = Expr::Kind::Call;
          e->str_val = name;
          if (!at_punct(")")) {
            for (;;) {
              e->children.push_back(parse_expr(true));
              if (at_punct(",")) { advance(); continue; }
              break;
            }
          }
          expect_punct(")");
          return e;
        }
        e->kind = Expr::Kind::Var;
        e->str_val = name;
        return e;
      }
      case Tok::Punct:
        if (t.text == "(") {
          advance();
          auto inner = parse_expr(true);
          expect_punct(")");
          return inner;
        }
        if (t.text == "[") {
          advance();
          e->kind = Expr::Kind::ListLit;
          if (!at_punct("]")) {
            for (;;) {
              e->children.push_back(parse_expr(true));
              if (at_punct(",")) {
                advance();
                if (at_punct("]")) break;  // trailing comma
                continue;
              }
              break;
            }
          }
          expect_punct("]");
          return e;
        }
        if (t.text == "{" && allow_record) {
          advance();
          skip_newlines();
          e->kind = Expr::Kind::RecordLit;
          if (!at_punct("}")) {
            for (;;) {
              check_forbidden();
              std::string key;
              if (at(Tok::String)) key = advance().text;
              else if (at(Tok::Ident)) key = advance().text;
              else fail(cur(), "expected record key" + got());
              expect_punct(":");
              skip_newlines();
              e->keys.push_back(key);
              e->children.push_back(parse_expr(true));
              skip_newlines();
              if (at_punct(",")) {
                advance();
                skip_newlines();
                if (at_punct("}")) break;  // trailing comma
                continue;
              }
              break;
            }
          }
          expect_punct("}");
          return e;
        }
        fail(t, "unexpected token '" + t.text + "'");
      case Tok::Newline:
        fail(t, "unexpected end of line");
      case Tok::Forbidden:
        fail(t, "invalid keyword '" + t.text + "' (not part of the skill-script language)");
      default:
        fail(t, "unexpected end of script");
    }
  }

  ExprPtr parse_call_tool(int line) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::CallTool;
    e->line = line;
    advance();  // '('
    skip_newlines();
    e->children.push_back(parse_expr(true));  // tool name expression
    while (at_punct(",")) {
      advance();
      skip_newlines();
      check_forbidden();
      if (!at(Tok::Ident)) fail(cur(), "expected keyword argument name" + got());
      std::string key = advance().text;
      expect_punct("=");
      skip_newlines();
      e->keys.push_back(key);
      e->children.push_back(parse_expr(true));
    }
    expect_punct(")");
    return e;
  }

  std::vector<Token> toks_;
  std::size_t idx_ = 0;
};

inline std::string context_snippet(std::string_view src, int line) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= src.size()) {
    std::size_t nl = src.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(src.substr(start));
      break;
    }
    lines.push_back(src.substr(start, nl - start));
    start = nl + 1;
  }
  std::string out;
  for (int i = line - 1; i <= line + 1; ++i) {
    if (i < 1 || i > static_cast<int>(lines.size())) continue;
    out += (i == line) ? "> " : "  ";
    out += std::to_string(i);
    out += " | ";
    out += std::string(lines[static_cast<std::size_t>(i - 1)]);
    out += '\n';
  }
  if (!out.empty()) out.pop_back();
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public surface

struct ParseResult {
  std::optional<ScriptAst> ast;
  std::optional<SyntaxIssue> issue;
  bool ok() const { return ast.has_value(); }
};

inline ParseResult parse(std::string_view source) {
  // A script must contain something besides whitespace.
  bool blank = source.find_first_not_of(" \t\r\n") == std::string_view::npos;
  if (blank) return {std::nullopt, SyntaxIssue{1, "empty script", ""}};
  try {
    detail::Lexer lexer(source);
    detail::Parser parser(lexer.run());
    return {parser.parse_script(), std::nullopt};
  } catch (SyntaxIssue issue) {
    int total_lines = 1 + static_cast<int>(std::count(source.begin(), source.end(), '\n'));
    issue.line = std::clamp(issue.line, 1, total_lines);
    issue.context_snippet = detail::context_snippet(source, issue.line);
    return {std::nullopt, issue};
  }
}

// ---------------------------------------------------------------------------
// Free variables: names read before assignment, i.e. the script's parameters.

namespace detail {

struct FreeVarScan {
  std::set<std::string> free;

  void visit_expr(const Expr& e, const std::set<std::string>& assigned) {
    switch (e.kind) {
      case Expr::Kind::Var:
        if (!assigned.count(e.str_val) && !builtin_names().count(e.str_val) &&
            e.str_val != "call_tool")
          free.insert(e.str_val);
        break;
      default:
        for (const auto& c : e.children) visit_expr(*c, assigned);
    }
  }

  // Returns the set of names definitely assigned after the block.
  std::set<std::string> visit_block(const std::vector<Stmt>& stmts,
                                    std::set<std::string> assigned) {
    for (const auto& st : stmts) {
      switch (st.kind) {
        case Stmt::Kind::Assign:
          visit_expr(*st.expr, assigned);
          assigned.insert(st.target);
          break;
        case Stmt::Kind::ExprStmt:
          visit_expr(*st.expr, assigned);
          break;
        case Stmt::Kind::For: {
          visit_expr(*st.expr, assigned);
          auto inner = assigned;
          inner.insert(st.target);
          visit_block(st.body, inner);
          // the loop may run zero times, so nothing becomes definitely assigned
          break;
        }
        case Stmt::Kind::If: {
          visit_expr(*st.expr, assigned);
          auto then_set = visit_block(st.body, assigned);
          auto else_set = visit_block(st.else_body, assigned);
          std::set<std::string> merged;
          std::set_intersection(then_set.begin(), then_set.end(), else_set.begin(),
                                else_set.end(), std::inserter(merged, merged.begin()));
          assigned = std::move(merged);
          break;
        }
      }
    }
    return assigned;
  }
};

}  // namespace detail

inline std::set<std::string> free_variables(const ScriptAst& ast) {
  detail::FreeVarScan scan;
  scan.visit_block(ast.statements, {});
  return scan.free;
}

// Tool names targeted by call_tool with a literal first argument. Used for
// skill signature matching.
inline void called_tools(const Expr& e, std::vector<std::string>& out) {
  if (e.kind == Expr::Kind::CallTool && !e.children.empty() &&
      e.children[0]->kind == Expr::Kind::String)
    out.push_back(e.children[0]->str_val);
  for (const auto& c : e.children) called_tools(*c, out);
}

inline std::vector<std::string> called_tools(const ScriptAst& ast) {
  std::vector<std::string> out;
  struct Walk {
    std::vector<std::string>& out;
    void block(const std::vector<Stmt>& stmts) {
      for (const auto& st : stmts) {
        if (st.expr) called_tools(*st.expr, out);
        block(st.body);
        block(st.else_body);
      }
    }
  } walk{out};
  walk.block(ast.statements);
  return out;
}

// ---------------------------------------------------------------------------
// Canonical rendering. parse(render_canonical(ast)) is structurally equal to
// ast; record keys keep insertion order; each simple statement is one line.

namespace detail {

inline int precedence(const Expr& e) {
  if (e.kind == Expr::Kind::Binary) {
    const std::string& op = e.str_val;
    if (op == "or") return 1;
    if (op == "and") return 2;
    if (op == "==" || op == "!=" || op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
    if (op == "+" || op == "-") return 5;
    return 6;  // * / %
  }
  if (e.kind == Expr::Kind::Unary) return e.str_val == "not" ? 3 : 7;
  return 10;
}

inline void render_expr(const Expr& e, std::string& out) {
  auto child = [&](const Expr& c, int min_prec) {
    bool parens = precedence(c) < min_prec;
    if (parens) out += '(';
    render_expr(c, out);
    if (parens) out += ')';
  };
  switch (e.kind) {
    case Expr::Kind::Null: out += "null"; break;
    case Expr::Kind::Bool: out += e.bool_val ? "true" : "false"; break;
    case Expr::Kind::Number: skillcraft::detail::append_number(out, e.num_val); break;
    case Expr::Kind::String: skillcraft::detail::append_quoted(out, e.str_val); break;
    case Expr::Kind::Var: out += e.str_val; break;
    case Expr::Kind::ListLit: {
      out += '[';
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += ", ";
        render_expr(*e.children[i], out);
      }
      out += ']';
      break;
    }
    case Expr::Kind::RecordLit: {
      out += '{';
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += ", ";
        skillcraft::detail::append_quoted(out, e.keys[i]);
        out += ": ";
        render_expr(*e.children[i], out);
      }
      out += '}';
      break;
    }
    case Expr::Kind::Field:
      child(*e.children[0], 8);  // unary operands need parens: (-x).f
      out += '.';
      out += e.str_val;
      break;
    case Expr::Kind::Index:
      child(*e.children[0], 8);
      out += '[';
      render_expr(*e.children[1], out);
      out += ']';
      break;
    case Expr::Kind::Unary: {
      int prec = precedence(e);
      out += e.str_val == "not" ? "not " : "-";
      child(*e.children[0], prec);
      break;
    }
    case Expr::Kind::Binary: {
      int prec = precedence(e);
      child(*e.children[0], prec);
      out += ' ';
      out += e.str_val;
      out += ' ';
      child(*e.children[1], prec + 1);  // left-associative
      break;
    }
    case Expr::Kind::Call: {
      out += e.str_val;
      out += '(';
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += ", ";
        render_expr(*e.children[i], out);
      }
      out += ')';
      break;
    }
    case Expr::Kind::CallTool: {
      out += "call_tool(";
      render_expr(*e.children[0], out);
      for (std::size_t i = 0; i < e.keys.size(); ++i) {
        out += ", ";
        out += e.keys[i];
        out += '=';
        render_expr(*e.children[i + 1], out);
      }
      out += ')';
      break;
    }
  }
}

// A record literal reachable in a for/if header without intervening
// brackets would be swallowed as the block brace; such headers get wrapped
// in parentheses.
inline bool header_needs_parens(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::RecordLit: return true;
    case Expr::Kind::Binary:
    case Expr::Kind::Unary: {
      for (const auto& c : e.children)
        if (header_needs_parens(*c)) return true;
      return false;
    }
    case Expr::Kind::Field:
    case Expr::Kind::Index:
      return header_needs_parens(*e.children[0]);
    default:
      return false;
  }
}

inline void render_header_expr(const Expr& e, std::string& out) {
  bool parens = header_needs_parens(e);
  if (parens) out += '(';
  render_expr(e, out);
  if (parens) out += ')';
}

inline void render_stmt(const Stmt& st, std::string& out, int indent) {
  out.append(static_cast<std::size_t>(indent) * 4, ' ');
  switch (st.kind) {
    case Stmt::Kind::Assign:
      out += st.target;
      out += " = ";
      render_expr(*st.expr, out);
      out += '\n';
      break;
    case Stmt::Kind::ExprStmt:
      render_expr(*st.expr, out);
      out += '\n';
      break;
    case Stmt::Kind::For:
      out += "for ";
      out += st.target;
      out += " in ";
      render_header_expr(*st.expr, out);
      out += " {\n";
      for (const auto& s : st.body) render_stmt(s, out, indent + 1);
      out.append(static_cast<std::size_t>(indent) * 4, ' ');
      out += "}\n";
      break;
    case Stmt::Kind::If:
      out += "if ";
      render_header_expr(*st.expr, out);
      out += " {\n";
      for (const auto& s : st.body) render_stmt(s, out, indent + 1);
      out.append(static_cast<std::size_t>(indent) * 4, ' ');
      out += '}';
      if (!st.else_body.empty()) {
        out += " else {\n";
        for (const auto& s : st.else_body) render_stmt(s, out, indent + 1);
        out.append(static_cast<std::size_t>(indent) * 4, ' ');
        out += '}';
      }
      out += '\n';
      break;
  }
}

}  // namespace detail

inline std::string render_canonical(const ScriptAst& ast) {
  std::string out;
  for (const auto& st : ast.statements) detail::render_stmt(st, out, 0);
  return out;
}

// One-line summary of a statement for runtime traces.
inline std::string statement_summary(const Stmt& st) {
  std::string out;
  switch (st.kind) {
    case Stmt::Kind::For:
      out = "for " + st.target + " in ";
      detail::render_expr(*st.expr, out);
      break;
    case Stmt::Kind::If:
      out = "if ";
      detail::render_expr(*st.expr, out);
      break;
    default:
      detail::render_stmt(st, out, 0);
      if (!out.empty() && out.back() == '\n') out.pop_back();
  }
  if (out.size() > 72) out = out.substr(0, 69) + "...";
  return out;
}

}  // namespace skillcraft::script
