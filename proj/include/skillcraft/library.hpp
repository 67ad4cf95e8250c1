// The skill library: four primitives (save_skill / execute_skill /
// list_skills / get_skill) over a persisted cache, the three-stage verifier
// (syntax at save, structured runtime reporting, post-execution quality
// detection), nesting-depth control, and locked (static-reuse) mode.
#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "skillcraft/interp.hpp"
#include "skillcraft/script.hpp"
#include "skillcraft/value.hpp"

namespace skillcraft::library {

// ---------------------------------------------------------------------------
// Output-quality detection (verifier stage c)

struct QualityFinding {
  long long total_leaves = 0;
  long long empty_leaves = 0;
  double ratio = 0.0;
  std::vector<std::string> flagged_paths;
  bool passed = true;  // strict-greater threshold: exactly half still passes

  Value to_value() const {
    Value::List flagged;
    for (const auto& p : flagged_paths) flagged.push_back(Value(p));
    Record r;
    r.set("total_leaves", Value(total_leaves));
    r.set("empty_leaves", Value(empty_leaves));
    r.set("ratio", Value(ratio));
    r.set("flagged_paths", Value(std::move(flagged)));
    r.set("passed", Value(passed));
    return Value(std::move(r));
  }
};

namespace detail {

inline bool leaf_is_empty(const Value& v) {
  if (v.is_null()) return true;
  if (v.is_number()) return v.as_number() == 0.0;
  if (v.is_string()) {
    std::string s = v.as_string();
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s == "unknown" || s == "none";
  }
  return false;
}

inline void scan_leaves(const Value& v, const std::string& path, QualityFinding& out) {
  if (v.is_record() && !v.as_record().empty()) {
    for (const auto& [k, item] : v.as_record().items())
      scan_leaves(item, path.empty() ? k : path + "." + k, out);
    return;
  }
  if (v.is_list() && !v.as_list().empty()) {
    const auto& l = v.as_list();
    for (std::size_t i = 0; i < l.size(); ++i)
      scan_leaves(l[i], path + "[" + std::to_string(i) + "]", out);
    return;
  }
  // scalar, or an empty container (which must not pass vacuously)
  ++out.total_leaves;
  bool empty = v.is_record() || v.is_list() ? true : leaf_is_empty(v);
  if (empty) {
    ++out.empty_leaves;
    out.flagged_paths.push_back(path.empty() ? "." : path);
  }
}

}  // namespace detail

inline QualityFinding quality_check(const Value& value) {
  QualityFinding f;
  detail::scan_leaves(value, "", f);
  f.ratio = f.total_leaves == 0 ? 0.0
                                : static_cast<double>(f.empty_leaves) /
                                      static_cast<double>(f.total_leaves);
  f.passed = f.ratio <= 0.5;
  return f;
}

// ---------------------------------------------------------------------------
// Verifier reports and outcomes

struct VerifierReport {
  enum class Stage { syntax, runtime, quality };
  Stage stage;
  bool passed = false;
  std::optional<script::SyntaxIssue> syntax_detail;
  std::optional<script::RuntimeIssue> runtime_detail;
  std::optional<QualityFinding> quality_detail;
};

struct SaveResult {
  bool ok = false;
  std::string ack;          // exactly: Skill '<name>' saved successfully.
  std::string error_kind;   // "syntax" | "parameter_mismatch" | "locked_library"
  std::optional<VerifierReport> report;
  std::vector<std::string> missing_parameters;
};

struct ExecutionOutcome {
  bool success = false;
  Value result;  // payload on success, structured error record on failure
  int depth_used = 0;
  std::optional<VerifierReport> report;  // runtime or quality stage on failure

  const script::RuntimeIssue* issue() const {
    return report && report->runtime_detail ? &*report->runtime_detail : nullptr;
  }
  const QualityFinding* quality() const {
    return report && report->quality_detail ? &*report->quality_detail : nullptr;
  }

  Value to_value() const {
    Record r;
    r.set("status", Value(success ? "success" : "failed"));
    r.set("result", result);
    return Value(std::move(r));
  }
};

struct LibraryError : std::runtime_error {
  std::string kind;  // "unknown_skill" | "locked_library" | "bad_cache"
  LibraryError(std::string k, const std::string& msg)
      : std::runtime_error(msg), kind(std::move(k)) {}
};

struct SkillEntry {
  std::string name;
  std::string script;
  std::vector<std::string> parameters;
  std::string description;
  int version = 1;
  long long success_count = 0;
  long long failure_count = 0;
};

// Execution environment for skills: the atomic-tool dispatcher plus the
// nesting policy. Flat mode forbids skill dispatch inside scripts entirely;
// hierarchical mode routes call_tool("execute_skill", ...) back through the
// library with depth + 1.
struct ExecEnv {
  script::ToolDispatcher* tools = nullptr;
  bool hierarchical = false;
  int nesting_limit = 10;
  long long budget = script::kDefaultStepBudget;
};

class SkillLibrary;

namespace detail {

inline bool is_primitive(std::string_view tool) {
  return tool == "save_skill" || tool == "execute_skill" || tool == "list_skills" ||
         tool == "get_skill" || tool == "save_macro" || tool == "execute_macro" ||
         tool == "list_macros" || tool == "get_macro";
}

class ScriptDispatcher;

}  // namespace detail

class SkillLibrary {
 public:
  SkillLibrary() = default;

  // Binds the library to a cache file; loads it when present.
  static SkillLibrary open(const std::filesystem::path& cache_path) {
    SkillLibrary lib;
    lib.cache_path_ = cache_path;
    if (std::filesystem::exists(cache_path)) lib.load_from(cache_path);
    return lib;
  }

  static SkillLibrary load(const std::filesystem::path& cache_path) {
    SkillLibrary lib;
    lib.load_from(cache_path);
    lib.cache_path_ = cache_path;
    return lib;
  }

  void set_cache_path(const std::filesystem::path& p) { cache_path_ = p; }
  void lock() { locked_ = true; }
  bool locked() const { return locked_; }

  const std::vector<SkillEntry>& entries() const { return entries_; }
  bool has(std::string_view name) const { return find(name) != nullptr; }
  std::size_t size() const { return entries_.size(); }

  SaveResult save_skill(const std::string& name, const std::string& source,
                        std::vector<std::string> parameters, std::string description) {
    SaveResult res;
    if (locked_) {
      res.error_kind = "locked_library";
      return res;
    }
    auto parsed = script::parse(source);
    if (!parsed.ok()) {
      res.error_kind = "syntax";
      res.report = VerifierReport{VerifierReport::Stage::syntax, false, parsed.issue,
                                  std::nullopt, std::nullopt};
      return res;
    }
    auto free_vars = script::free_variables(*parsed.ast);
    for (const auto& v : free_vars)
      if (std::find(parameters.begin(), parameters.end(), v) == parameters.end())
        res.missing_parameters.push_back(v);
    if (!res.missing_parameters.empty()) {
      res.error_kind = "parameter_mismatch";
      return res;
    }
    if (SkillEntry* existing = find(name)) {
      existing->script = source;
      existing->parameters = std::move(parameters);
      existing->description = std::move(description);
      existing->version += 1;
      existing->success_count = 0;
      existing->failure_count = 0;
    } else {
      entries_.push_back({name, source, std::move(parameters), std::move(description), 1, 0, 0});
    }
    persist();
    res.ok = true;
    res.ack = "Skill '" + name + "' saved successfully.";
    return res;
  }

  // Runs a saved skill. Failures come back as a failed outcome carrying the
  // full structured error; only unknown names and locked-mutation attempts
  // are library-level errors.
  ExecutionOutcome execute_skill(const std::string& name, const Record& args, ExecEnv env,
                                 int depth = 0);

  std::string list_skills() const {
    std::string out;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      out += "Skill " + std::to_string(i + 1) + ": " + entries_[i].name + " -- " +
             entries_[i].description + "\n";
    }
    if (!out.empty()) out.pop_back();
    return out;
  }

  const SkillEntry& get_skill(std::string_view name) const {
    const SkillEntry* e = find(name);
    if (!e) throw LibraryError("unknown_skill", "no skill named '" + std::string(name) + "'");
    return *e;
  }

  // Atomic rewrite: write a temp file, then rename over the cache path.
  void persist() const {
    if (!cache_path_ || locked_) return;
    Record skills;
    for (const auto& e : entries_) {
      Value::List params;
      for (const auto& p : e.parameters) params.push_back(Value(p));
      Record stats;
      stats.set("success_count", Value(e.success_count));
      stats.set("failure_count", Value(e.failure_count));
      Record entry;
      entry.set("script_code", Value(e.script));
      entry.set("parameters", Value(std::move(params)));
      entry.set("description", Value(e.description));
      entry.set("version", Value(e.version));
      entry.set("execution_stats", Value(std::move(stats)));
      skills.set(e.name, Value(std::move(entry)));
    }
    Record top;
    top.set("skills", Value(std::move(skills)));
    std::string text = serialize(Value(std::move(top)));

    auto tmp = *cache_path_;
    tmp += ".tmp";
    if (!cache_path_->parent_path().empty())
      std::filesystem::create_directories(cache_path_->parent_path());
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw LibraryError("bad_cache", "cannot write " + tmp.string());
      out.write(text.data(), static_cast<std::streamsize>(text.size()));
    }
    std::filesystem::rename(tmp, *cache_path_);
  }

 private:
  friend class detail::ScriptDispatcher;

  SkillEntry* find(std::string_view name) {
    for (auto& e : entries_)
      if (e.name == name) return &e;
    return nullptr;
  }
  const SkillEntry* find(std::string_view name) const {
    for (const auto& e : entries_)
      if (e.name == name) return &e;
    return nullptr;
  }

  void record_outcome(SkillEntry& entry, bool success) {
    if (locked_) return;  // a locked library never mutates, stats included
    if (success)
      entry.success_count += 1;
    else
      entry.failure_count += 1;
    persist();
  }

  void load_from(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LibraryError("bad_cache", "cannot read " + path.string());
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    auto parsed = parse_json(text);
    if (!parsed || !parsed->is_record())
      throw LibraryError("bad_cache", path.string() + ": not a JSON object");
    const Value* skills = parsed->as_record().find("skills");
    if (!skills || !skills->is_record())
      throw LibraryError("bad_cache", path.string() + ": missing object field 'skills'");
    auto bad = [&](const std::string& name, const char* field) -> LibraryError {
      return LibraryError("bad_cache",
                          path.string() + ": skill '" + name + "': bad field '" + field + "'");
    };
    for (const auto& [name, entry_val] : skills->as_record().items()) {
      if (!entry_val.is_record()) throw bad(name, "(entry)");
      const auto& er = entry_val.as_record();
      SkillEntry e;
      e.name = name;
      const Value* script_code = er.find("script_code");
      if (!script_code || !script_code->is_string()) throw bad(name, "script_code");
      e.script = script_code->as_string();
      const Value* params = er.find("parameters");
      if (!params || !params->is_list()) throw bad(name, "parameters");
      for (const auto& p : params->as_list()) {
        if (!p.is_string()) throw bad(name, "parameters");
        e.parameters.push_back(p.as_string());
      }
      const Value* desc = er.find("description");
      if (!desc || !desc->is_string()) throw bad(name, "description");
      e.description = desc->as_string();
      const Value* version = er.find("version");
      if (!version || !version->is_number() || version->as_number() < 1)
        throw bad(name, "version");
      e.version = static_cast<int>(version->as_number());
      const Value* stats = er.find("execution_stats");
      if (!stats || !stats->is_record()) throw bad(name, "execution_stats");
      const Value* sc = stats->as_record().find("success_count");
      const Value* fc = stats->as_record().find("failure_count");
      if (!sc || !sc->is_number() || !fc || !fc->is_number())
        throw bad(name, "execution_stats");
      e.success_count = static_cast<long long>(sc->as_number());
      e.failure_count = static_cast<long long>(fc->as_number());
      entries_.push_back(std::move(e));
    }
  }

  std::vector<SkillEntry> entries_;
  bool locked_ = false;
  std::optional<std::filesystem::path> cache_path_;
};

namespace detail {

// Dispatcher handed to executing scripts. Skill primitives are never callable
// from scripts except execute_skill in hierarchical mode, which re-enters the
// library at depth + 1. Tracks the deepest nested chain for depth accounting.
class ScriptDispatcher : public script::ToolDispatcher {
 public:
  ScriptDispatcher(SkillLibrary& lib, ExecEnv env, int depth)
      : lib_(lib), env_(env), depth_(depth) {}

  int max_child_depth() const { return max_child_depth_; }

  Value dispatch(const std::string& tool, const Record& args) override {
    if (is_primitive(tool)) {
      if (env_.hierarchical && (tool == "execute_skill" || tool == "execute_macro"))
        return dispatch_nested(args);
      throw script::DispatchError{
          script::IssueKind::unknown_tool,
          env_.hierarchical
              ? "skill primitive '" + tool + "' cannot be called from scripts"
              : "no recursion: skill primitives cannot be called from scripts in flat mode",
          {}};
    }
    if (!env_.tools)
      throw script::DispatchError{script::IssueKind::unknown_tool,
                                  "no tools available: '" + tool + "'", {}};
    return env_.tools->dispatch(tool, args);
  }

 private:
  Value dispatch_nested(const Record& args) {
    const Value* name = args.find("skill_name");
    if (!name || !name->is_string())
      throw script::DispatchError{script::IssueKind::tool_failure,
                                  "execute_skill needs a string 'skill_name' argument", {}};
    Record inner_args;
    if (const Value* a = args.find("args")) {
      if (!a->is_record())
        throw script::DispatchError{script::IssueKind::tool_failure,
                                    "execute_skill 'args' must be a record", {}};
      inner_args = a->as_record();
    }
    if (!lib_.has(name->as_string()))
      throw script::DispatchError{script::IssueKind::tool_failure,
                                  "no skill named '" + name->as_string() + "'", {}};
    ExecutionOutcome out = lib_.execute_skill(name->as_string(), inner_args, env_, depth_ + 1);
    max_child_depth_ = std::max(max_child_depth_, out.depth_used);
    if (!out.success) {
      if (const script::RuntimeIssue* issue = out.issue()) {
        // preserve the inner error kind and frames across the skill boundary
        throw script::DispatchError{issue->kind, issue->message, issue->trace};
      }
      std::string msg = "skill '" + name->as_string() + "' failed";
      if (const QualityFinding* q = out.quality())
        msg += ": quality check rejected the output (ratio " + serialize(Value(q->ratio)) + ")";
      throw script::DispatchError{script::IssueKind::tool_failure, msg, {}};
    }
    return out.result;
  }

  SkillLibrary& lib_;
  ExecEnv env_;
  int depth_;
  int max_child_depth_ = 0;
};

}  // namespace detail

inline ExecutionOutcome SkillLibrary::execute_skill(const std::string& name, const Record& args,
                                                    ExecEnv env, int depth) {
  SkillEntry* entry = find(name);
  if (!entry) throw LibraryError("unknown_skill", "no skill named '" + name + "'");

  ExecutionOutcome out;
  if (depth >= env.nesting_limit) {
    script::RuntimeIssue issue;
    issue.kind = script::IssueKind::depth_exceeded;
    issue.message = "skill nesting depth limit of " + std::to_string(env.nesting_limit) +
                    " exceeded by '" + name + "'";
    issue.inputs = args;
    out.result = issue.to_value();
    out.depth_used = 0;  // never ran
    out.report = VerifierReport{VerifierReport::Stage::runtime, false, std::nullopt,
                                std::move(issue), std::nullopt};
    record_outcome(*entry, false);
    return out;
  }

  auto parsed = script::parse(entry->script);
  if (!parsed.ok()) {
    // a stored script that no longer parses (hand-edited cache) surfaces as a
    // runtime-stage failure with the syntax detail embedded
    script::RuntimeIssue issue;
    issue.kind = script::IssueKind::tool_failure;
    issue.message = "stored script is invalid at line " + std::to_string(parsed.issue->line) +
                    ": " + parsed.issue->message;
    issue.trace = {{parsed.issue->line, parsed.issue->message}};
    issue.inputs = args;
    out.result = issue.to_value();
    out.report = VerifierReport{VerifierReport::Stage::runtime, false, parsed.issue,
                                std::move(issue), std::nullopt};
    record_outcome(*entry, false);
    return out;
  }

  detail::ScriptDispatcher dispatcher(*this, env, depth);
  auto eval = script::evaluate(*parsed.ast, args, dispatcher, env.budget);
  out.depth_used = 1 + dispatcher.max_child_depth();

  if (!eval.ok()) {
    out.result = eval.issue->to_value();
    out.report = VerifierReport{VerifierReport::Stage::runtime, false, std::nullopt,
                                std::move(*eval.issue), std::nullopt};
    record_outcome(*entry, false);
    return out;
  }

  // Post-execution quality detection applies at the agent-facing boundary;
  // nested results flow up raw so callers see the degraded data itself.
  if (depth == 0) {
    QualityFinding finding = quality_check(*eval.value);
    if (!finding.passed) {
      Record r;
      r.set("kind", Value("quality_rejected"));
      r.set("message",
            Value("output flagged as low quality: " + std::to_string(finding.empty_leaves) +
                  " of " + std::to_string(finding.total_leaves) +
                  " fields are empty (Unknown/None/0)"));
      r.set("finding", finding.to_value());
      out.result = Value(std::move(r));
      out.report = VerifierReport{VerifierReport::Stage::quality, false, std::nullopt,
                                  std::nullopt, std::move(finding)};
      record_outcome(*entry, false);
      return out;
    }
  }

  out.success = true;
  out.result = *eval.value;
  record_outcome(*entry, true);
  return out;
}

}  // namespace skillcraft::library
