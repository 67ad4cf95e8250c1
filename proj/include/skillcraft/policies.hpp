// Deterministic synthetic agents replaying the five execution modes over the
// simulator: baseline atomic calls, flat skill mode with compose/save/reuse
// and a 3-strikes fallback, hierarchical three-level composition, direct
// single-use script execution, and the two-phase static transfer. These make
// the benchmark runnable and reproducible without a model in the loop.
#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "skillcraft/accounting.hpp"
#include "skillcraft/fabric.hpp"
#include "skillcraft/library.hpp"
#include "skillcraft/suite.hpp"

namespace skillcraft::policy {

using harness::count_tokens;
using harness::Limits;
using harness::TokenModel;

// ---------------------------------------------------------------------------
// Episode traces

struct ToolCallRecord {
  std::string tool;
  Value args;
  long long result_bytes = 0;
  bool ok = true;
};

struct SkillEvent {
  std::string event;    // save | execute | list | get
  std::string name;
  std::string outcome;  // saved | rejected | success | failed | ok
};

struct TraceTurn {
  long long turn = 0;
  std::string role;  // "task" for the prompt turn, "agent" for actions
  long long bytes_in = 0;
  long long bytes_out = 0;
  std::vector<ToolCallRecord> tool_calls;
  std::vector<SkillEvent> skill_events;
};

struct Counters {
  long long in_tokens = 0;
  long long out_tokens = 0;
  long long turn_count = 0;       // agent turns
  long long tool_call_count = 0;  // tools plus skill primitives
};

struct EpisodeTrace {
  std::vector<TraceTurn> turns;
  Counters counters;
  std::string final_status = "aborted";  // claimed_done | limit_exceeded | aborted
  std::string termination_reason;        // set when limit_exceeded
};

inline Value turn_to_value(const TraceTurn& t) {
  Value::List calls;
  for (const auto& c : t.tool_calls) {
    Record r;
    r.set("tool", Value(c.tool));
    r.set("args", c.args);
    r.set("result_bytes", Value(c.result_bytes));
    r.set("ok", Value(c.ok));
    calls.push_back(Value(std::move(r)));
  }
  Value::List events;
  for (const auto& e : t.skill_events) {
    Record r;
    r.set("event", Value(e.event));
    r.set("name", Value(e.name));
    r.set("outcome", Value(e.outcome));
    events.push_back(Value(std::move(r)));
  }
  Record row;
  row.set("turn", Value(t.turn));
  row.set("role", Value(t.role));
  row.set("bytes_in", Value(t.bytes_in));
  row.set("bytes_out", Value(t.bytes_out));
  row.set("tool_calls", Value(std::move(calls)));
  row.set("skill_events", Value(std::move(events)));
  return Value(std::move(row));
}

inline std::string trace_to_jsonl(const EpisodeTrace& trace) {
  std::string out;
  for (const auto& t : trace.turns) {
    out += serialize(turn_to_value(t));
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tool dispatch bridging the interpreter to the simulated backends

class FabricDispatcher : public script::ToolDispatcher {
 public:
  FabricDispatcher(const fabric::Registry& reg, fabric::Workspace& ws) : reg_(reg), ws_(ws) {}

  Value dispatch(const std::string& tool, const Record& args) override {
    try {
      return fabric::invoke(reg_, ws_, tool, args);
    } catch (const fabric::ToolError& e) {
      auto kind = e.kind == fabric::ToolError::Kind::unknown_tool
                      ? script::IssueKind::unknown_tool
                      : script::IssueKind::tool_failure;
      throw script::DispatchError{kind, e.what(), {}};
    }
  }

 private:
  const fabric::Registry& reg_;
  fabric::Workspace& ws_;
};

// ---------------------------------------------------------------------------
// Episode engine: one agent decision plus its tool result per turn, token
// caps enforced the moment a message would cross them (the crossing message
// is never recorded, so traces always stay within limits).

struct EpisodeConfig {
  TokenModel tokens;
  Limits limits;
  bool hierarchical = false;
  int nesting_limit = 10;
  long long budget = script::kDefaultStepBudget;
};

class Episode {
 public:
  Episode(const suite::Task& task, const fabric::Registry& reg, fabric::Workspace& ws,
          library::SkillLibrary& lib, EpisodeConfig config)
      : task_(task),
        reg_(reg),
        ws_(ws),
        lib_(lib),
        config_(config),
        dispatcher_(reg, ws),
        start_(std::chrono::steady_clock::now()) {}

  const EpisodeTrace& trace() const { return trace_; }
  EpisodeTrace take_trace() { return std::move(trace_); }
  bool dead() const { return dead_; }
  library::SkillLibrary& lib() { return lib_; }
  const suite::Task& task() const { return task_; }
  const fabric::Registry& registry() const { return reg_; }
  fabric::Workspace& workspace() { return ws_; }
  const EpisodeConfig& config() const { return config_; }

  // Records the task prompt as turn 0.
  bool begin(const std::string& prompt) {
    long long t = count_tokens(prompt.size(), config_.tokens);
    if (t > config_.limits.max_in_tokens_per_request) return terminate("request input tokens");
    if (trace_.counters.in_tokens + t > config_.limits.max_in_tokens)
      return terminate("input tokens");
    TraceTurn turn;
    turn.turn = static_cast<long long>(trace_.turns.size());
    turn.role = "task";
    turn.bytes_in = static_cast<long long>(prompt.size());
    trace_.turns.push_back(std::move(turn));
    trace_.counters.in_tokens += t;
    return true;
  }

  struct Action {
    bool live = true;  // false: episode hit a limit, stop the policy loop
    bool ok = false;   // the tool/primitive succeeded
    Value value;       // result payload or {"error": {...}}
  };

  Action act_tool(const std::string& tool, const Record& args) {
    return run_action(tool, args, {}, [&](Value& out, bool& ok) {
      try {
        out = fabric::invoke(reg_, ws_, tool, args);
        ok = true;
      } catch (const fabric::ToolError& e) {
        out = error_value("tool_error", e.what());
      }
      if (tool == "claim_done" && ok) claimed_ = true;
    });
  }

  Action act_save(const std::string& name, const std::string& source,
                  const std::vector<std::string>& params, const std::string& description) {
    Record args;
    args.set("skill_name", Value(name));
    args.set("script_code", Value(source));
    Value::List ps;
    for (const auto& p : params) ps.push_back(Value(p));
    args.set("parameters", Value(std::move(ps)));
    args.set("description", Value(description));
    SkillEvent event{"save", name, "rejected"};
    return run_action("save_skill", args, event, [&](Value& out, bool& ok) {
      auto res = lib_.save_skill(name, source, params, description);
      if (res.ok) {
        out = Value(res.ack);
        ok = true;
        last_event_outcome_ = "saved";
      } else {
        out = error_value(res.error_kind, "save_skill failed");
      }
    });
  }

  Action act_execute(const std::string& name, const Record& skill_args) {
    Record args;
    args.set("skill_name", Value(name));
    args.set("args", Value(skill_args));
    SkillEvent event{"execute", name, "failed"};
    return run_action("execute_skill", args, event, [&](Value& out, bool& ok) {
      try {
        last_outcome_ = lib_.execute_skill(
            name, skill_args,
            {&dispatcher_, config_.hierarchical, config_.nesting_limit, config_.budget});
        out = last_outcome_->to_value();
        ok = last_outcome_->success;
        if (ok) last_event_outcome_ = "success";
      } catch (const library::LibraryError& e) {
        last_outcome_.reset();
        out = error_value(e.kind, e.what());
      }
    });
  }

  Action act_list() {
    SkillEvent event{"list", "", "ok"};
    return run_action("list_skills", {}, event, [&](Value& out, bool& ok) {
      out = Value(lib_.list_skills());
      ok = true;
    });
  }

  Action act_get(const std::string& name) {
    Record args;
    args.set("skill_name", Value(name));
    SkillEvent event{"get", name, "ok"};
    return run_action("get_skill", args, event, [&](Value& out, bool& ok) {
      try {
        const auto& e = lib_.get_skill(name);
        Record r;
        r.set("script_code", Value(e.script));
        Value::List ps;
        for (const auto& p : e.parameters) ps.push_back(Value(p));
        r.set("parameters", Value(std::move(ps)));
        r.set("version", Value(e.version));
        out = Value(std::move(r));
        ok = true;
      } catch (const library::LibraryError& err) {
        out = error_value(err.kind, err.what());
      }
    });
  }

  // Direct-exec mode: evaluate a transient script against the atomic tools.
  // Nothing touches the skill cache.
  Action act_exec_script(const std::string& source) {
    Record args;
    args.set("script_code", Value(source));
    return run_action("exec_script", args, {}, [&](Value& out, bool& ok) {
      auto parsed = script::parse(source);
      if (!parsed.ok()) {
        out = error_value("syntax",
                          "line " + std::to_string(parsed.issue->line) + ": " +
                              parsed.issue->message);
        return;
      }
      auto eval = script::evaluate(*parsed.ast, {}, dispatcher_, config_.budget);
      if (!eval.ok()) {
        out = eval.issue->to_value();
        return;
      }
      out = *eval.value;
      ok = true;
    });
  }

  const library::ExecutionOutcome* last_outcome() const {
    return last_outcome_ ? &*last_outcome_ : nullptr;
  }

  EpisodeTrace finish() {
    if (!dead_) trace_.final_status = claimed_ ? "claimed_done" : "aborted";
    return std::move(trace_);
  }

 private:
  Value error_value(const std::string& kind, const std::string& message) {
    Record err;
    err.set("kind", Value(kind));
    err.set("message", Value(message));
    Record out;
    out.set("error", Value(std::move(err)));
    return Value(std::move(out));
  }

  bool terminate(const std::string& reason) {
    dead_ = true;
    trace_.final_status = "limit_exceeded";
    trace_.termination_reason = reason;
    return false;
  }

  template <typename Fn>
  Action run_action(const std::string& tool, const Record& args,
                    std::optional<SkillEvent> event, Fn&& fn) {
    Action action;
    if (dead_) {
      action.live = false;
      return action;
    }
    if (trace_.counters.turn_count >= config_.limits.max_turns) {
      terminate("turn limit");
      action.live = false;
      return action;
    }
    auto elapsed = std::chrono::duration_cast<std::chrono::duration<double>>(
                       std::chrono::steady_clock::now() - start_)
                       .count();
    if (elapsed > config_.limits.max_minutes * 60.0) {
      terminate("wall clock");
      action.live = false;
      return action;
    }

    Record message;
    message.set("tool", Value(tool));
    message.set("args", Value(args));
    std::string action_text = serialize(Value(std::move(message)));
    long long out_toks = count_tokens(action_text.size(), config_.tokens);
    if (trace_.counters.out_tokens + out_toks > config_.limits.max_out_tokens) {
      terminate("output tokens");
      action.live = false;
      return action;
    }

    last_event_outcome_.clear();
    Value result;
    bool ok = false;
    fn(result, ok);
    std::string result_text = serialize(result);
    long long in_toks = count_tokens(result_text.size(), config_.tokens);
    if (in_toks > config_.limits.max_in_tokens_per_request) {
      terminate("request input tokens");
      action.live = false;
      return action;
    }
    if (trace_.counters.in_tokens + in_toks > config_.limits.max_in_tokens) {
      terminate("input tokens");
      action.live = false;
      return action;
    }

    TraceTurn turn;
    turn.turn = static_cast<long long>(trace_.turns.size());
    turn.role = "agent";
    turn.bytes_out = static_cast<long long>(action_text.size());
    turn.bytes_in = static_cast<long long>(result_text.size());
    turn.tool_calls.push_back({tool, Value(args), static_cast<long long>(result_text.size()), ok});
    if (event) {
      if (!last_event_outcome_.empty()) event->outcome = last_event_outcome_;
      turn.skill_events.push_back(*event);
    }
    trace_.turns.push_back(std::move(turn));
    trace_.counters.turn_count += 1;
    trace_.counters.tool_call_count += 1;
    trace_.counters.out_tokens += out_toks;
    trace_.counters.in_tokens += in_toks;

    action.ok = ok;
    action.value = std::move(result);
    return action;
  }

  const suite::Task& task_;
  const fabric::Registry& reg_;
  fabric::Workspace& ws_;
  library::SkillLibrary& lib_;
  EpisodeConfig config_;
  FabricDispatcher dispatcher_;
  std::chrono::steady_clock::time_point start_;
  EpisodeTrace trace_;
  bool dead_ = false;
  bool claimed_ = false;
  std::optional<library::ExecutionOutcome> last_outcome_;
  std::string last_event_outcome_;
};

// ---------------------------------------------------------------------------
// Script composition

namespace compose {

inline std::string snake_unit(const fabric::FamilyDef& fam) {
  std::string s = fam.unit;
  for (char& c : s)
    if (c == ' ' || c == '-') c = '_';
  return s;
}

inline std::string flat_skill_name(const fabric::FamilyDef& fam) {
  return "process_" + snake_unit(fam) + "_complete";
}
inline std::string low_skill_name(const fabric::FamilyDef& fam) {
  return "collect_" + snake_unit(fam) + "_data";
}
inline std::string medium_skill_name(const fabric::FamilyDef& fam) {
  return "analyze_" + snake_unit(fam) + "_complete";
}
inline std::string high_skill_name(const fabric::FamilyDef& fam) {
  return "compile_" + snake_unit(fam) + "_report";
}

inline std::string str_lit(const std::string& s) {
  std::string out;
  skillcraft::detail::append_quoted(out, s);
  return out;
}

inline std::string weight_literal(double w) {
  std::string out;
  skillcraft::detail::append_number(out, w);
  return out;
}

// Per-entity collector: chains every data tool of the family off the profile
// response and extracts exactly the oracle-relevant fields. Level-agnostic by
// construction, which is what lets one skill serve e/m/h tasks of a family.
inline std::string collector_script(const fabric::FamilyDef& fam, const std::string& param) {
  const fabric::ToolDef& profile = fam.tools[0];
  std::string src;
  src += "profile = call_tool(" + str_lit(profile.name) + ", " + profile.param + "=" + param +
         ")\n";
  for (std::size_t i = 1; i < fam.tools.size(); ++i) {
    const auto& t = fam.tools[i];
    const char* link_field = profile.fields[static_cast<std::size_t>(t.link)].name;
    src += "d" + std::to_string(i) + " = call_tool(" + str_lit(t.name) + ", " + t.param +
           "=profile." + link_field + ")\n";
  }
  src += "result = {";
  for (std::size_t i = 0; i < fam.tools.size(); ++i) {
    const auto& t = fam.tools[i];
    std::string var = i == 0 ? "profile" : "d" + std::to_string(i);
    if (i) src += ", ";
    src += str_lit(t.name) + ": {";
    for (std::size_t j = 0; j < t.fields.size(); ++j) {
      if (j) src += ", ";
      src += str_lit(t.fields[j].name) + ": " + var + "." + t.fields[j].name;
    }
    src += "}";
  }
  src += "}\n";
  return src;
}

inline std::string metric_expr(const fabric::MetricPlan& plan, const std::string& data_var) {
  std::string expr;
  for (std::size_t i = 0; i < plan.sources.size(); ++i) {
    if (i) expr += " + ";
    expr += data_var + "." + plan.sources[i].tool + "." + plan.sources[i].field + " * " +
            weight_literal(plan.weights[i]);
  }
  return expr;
}

// Medium level: invoke the collector, compute the derived metrics, re-emit
// the groups plus metric fields.
inline std::string medium_script(const fabric::FamilyDef& fam,
                                 const std::vector<std::string>& required_tools,
                                 const std::string& param) {
  // always computes the metric arithmetic, whatever the level; at easy levels
  // the extra fields are simply not part of the scored output
  auto plan = fabric::metric_plan(fam, required_tools, 'm');
  if (!plan) throw std::logic_error("metric plan unavailable for medium skill");
  std::string src;
  src += "data = call_tool(\"execute_skill\", skill_name=" + str_lit(low_skill_name(fam)) +
         ", args={" + str_lit(param) + ": " + param + "})\n";
  src += "score = " + metric_expr(*plan, "data") + "\n";
  src += "if score >= 70 {\n    status = " + str_lit(plan->band_hi) +
         "\n} else {\n    if score >= 40 {\n        status = " + str_lit(plan->band_mid) +
         "\n    } else {\n        status = " + str_lit(plan->band_lo) + "\n    }\n}\n";
  src += "result = {";
  for (std::size_t i = 0; i < fam.tools.size(); ++i) {
    if (i) src += ", ";
    src += str_lit(fam.tools[i].name) + ": data." + fam.tools[i].name;
  }
  src += ", " + str_lit(plan->metric_name) + ": score";
  src += ", " + str_lit(plan->status_name) + ": status";
  src += "}\n";
  return src;
}

// High level: loop all entities, invoke the medium skill, assemble the final
// record keyed by entity name.
inline std::string high_script(const fabric::FamilyDef& fam, const std::string& param) {
  std::string src;
  src += "entries = {}\n";
  src += "for name in names {\n";
  src += "    rec = call_tool(\"execute_skill\", skill_name=" + str_lit(medium_skill_name(fam)) +
         ", args={" + str_lit(param) + ": name})\n";
  src += "    entries = set(entries, name, rec)\n";
  src += "}\n";
  src += "result = entries\n";
  return src;
}

// Direct-exec mode: one single-use script, entity names hardcoded, producing
// the final output record in one evaluation.
inline std::string direct_script(const fabric::FamilyDef& fam, const suite::Task& task) {
  const fabric::ToolDef& profile = fam.tools[0];
  auto plan = fabric::metric_plan(fam, task.required_tools, task.level_class());
  std::string src;
  src += "entries = {}\n";
  src += "for name in [";
  for (std::size_t i = 0; i < task.entities.size(); ++i) {
    if (i) src += ", ";
    src += str_lit(task.entities[i]);
  }
  src += "] {\n";
  src += "    profile = call_tool(" + str_lit(profile.name) + ", " + profile.param + "=name)\n";
  std::vector<std::string> vars = {"profile"};
  std::vector<const fabric::ToolDef*> tools = {&profile};
  int n = 1;
  for (const auto& tool_name : task.required_tools) {
    if (tool_name == profile.name) continue;
    const fabric::ToolDef* td = fabric::find_tool(fam, tool_name);
    const char* link_field = profile.fields[static_cast<std::size_t>(td->link)].name;
    std::string var = "d" + std::to_string(n++);
    src += "    " + var + " = call_tool(" + str_lit(td->name) + ", " + td->param + "=profile." +
           link_field + ")\n";
    vars.push_back(var);
    tools.push_back(td);
  }
  if (plan) {
    std::string expr;
    for (std::size_t i = 0; i < plan->sources.size(); ++i) {
      if (i) expr += " + ";
      std::size_t vi = 0;
      for (std::size_t k = 0; k < tools.size(); ++k)
        if (plan->sources[i].tool == tools[k]->name) vi = k;
      expr += vars[vi] + "." + plan->sources[i].field + " * " + weight_literal(plan->weights[i]);
    }
    src += "    score = " + expr + "\n";
    src += "    if score >= 70 {\n        status = " + str_lit(plan->band_hi) +
           "\n    } else {\n        if score >= 40 {\n            status = " +
           str_lit(plan->band_mid) + "\n        } else {\n            status = " +
           str_lit(plan->band_lo) + "\n        }\n    }\n";
  }
  src += "    rec = {";
  for (std::size_t k = 0; k < tools.size(); ++k) {
    if (k) src += ", ";
    src += str_lit(tools[k]->name) + ": {";
    for (std::size_t j = 0; j < tools[k]->fields.size(); ++j) {
      if (j) src += ", ";
      src += str_lit(tools[k]->fields[j].name) + ": " + vars[k] + "." + tools[k]->fields[j].name;
    }
    src += "}";
  }
  if (plan) {
    src += ", " + str_lit(plan->metric_name) + ": score";
    src += ", " + str_lit(plan->status_name) + ": status";
  }
  src += "}\n";
  src += "    entries = set(entries, name, rec)\n";
  src += "}\n";
  src += "result = entries\n";
  return src;
}

// All composed sources are emitted canonical; a composition bug would show up
// here as a throw rather than a mysterious save rejection.
inline std::string canonical(const std::string& src) {
  auto parsed = script::parse(src);
  if (!parsed.ok())
    throw std::logic_error("composed script failed to parse at line " +
                           std::to_string(parsed.issue->line) + ": " + parsed.issue->message);
  return script::render_canonical(*parsed.ast);
}

}  // namespace compose

// The single-parameter collector skill composed for a task. Canonical form.
inline std::string compose_skill(const suite::Task& task, const std::string& param_name) {
  const fabric::FamilyDef* fam = fabric::find_family(task.family);
  if (!fam) throw std::runtime_error("unknown task family '" + task.family + "'");
  return compose::canonical(compose::collector_script(*fam, param_name));
}

// ---------------------------------------------------------------------------
// Shared policy helpers

namespace detail {

inline Record extract_fields(const fabric::ToolDef& td, const Value& response) {
  Record out;
  for (const auto& f : td.fields) {
    const Value* v = response.is_record() ? response.as_record().find(f.name) : nullptr;
    out.set(f.name, v ? *v : Value());
  }
  return out;
}

// Entity record in the task's output schema: required groups in order plus
// derived metrics when the level calls for them.
inline Record assemble_entity(const fabric::FamilyDef& fam, const suite::Task& task,
                              const Record& groups) {
  Record out;
  for (const auto& tool_name : task.required_tools) {
    const Value* g = groups.find(tool_name);
    out.set(tool_name, g ? *g : Value());
  }
  if (auto plan = fabric::metric_plan(fam, task.required_tools, task.level_class())) {
    auto [score, status] = fabric::metric_values(*plan, out);
    out.set(plan->metric_name, score);
    out.set(plan->status_name, status);
  }
  return out;
}

// Baseline-style atomic collection for one entity: profile first, downstream
// tools keyed off its link fields.
inline std::optional<Record> collect_entity_atomically(Episode& ep, const fabric::FamilyDef& fam,
                                                       const suite::Task& task,
                                                       const std::string& entity) {
  const fabric::ToolDef& profile = fam.tools[0];
  Record args;
  args.set(profile.param, Value(entity));
  auto prof_action = ep.act_tool(profile.name, args);
  if (!prof_action.live) return std::nullopt;
  Record prof_fields = extract_fields(profile, prof_action.value);
  Record groups;
  groups.set(profile.name, Value(prof_fields));
  for (const auto& tool_name : task.required_tools) {
    if (tool_name == profile.name) continue;
    const fabric::ToolDef* td = fabric::find_tool(fam, tool_name);
    const char* link_field = profile.fields[static_cast<std::size_t>(td->link)].name;
    const Value* link = prof_fields.find(link_field);
    Record targs;
    targs.set(td->param, link ? *link : Value());
    auto action = ep.act_tool(td->name, targs);
    if (!action.live) return std::nullopt;
    groups.set(td->name, Value(extract_fields(*td, action.value)));
  }
  return groups;
}

inline bool write_and_claim(Episode& ep, const suite::Task& task, const Record& final_record) {
  Record wargs;
  wargs.set("path", Value(task.output_file));
  wargs.set("content", Value(serialize(Value(final_record))));
  if (!ep.act_tool("write_file", wargs).live) return false;
  Record cargs;
  cargs.set("status", Value("done"));
  return ep.act_tool("claim_done", cargs).live;
}

// Reuse matching: a stored skill serves the task when the tools its script
// calls cover the task's required tools. The deterministic stand-in for the
// agent's judgment of "a matching skill exists".
inline const library::SkillEntry* find_matching_skill(const library::SkillLibrary& lib,
                                                      const suite::Task& task) {
  for (const auto& e : lib.entries()) {
    auto parsed = script::parse(e.script);
    if (!parsed.ok()) continue;
    auto tools = script::called_tools(*parsed.ast);
    bool covers = true;
    for (const auto& need : task.required_tools)
      if (std::find(tools.begin(), tools.end(), need) == tools.end()) covers = false;
    if (covers && e.parameters.size() == 1) return &e;
  }
  return nullptr;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Mode: baseline (no skills)

inline EpisodeTrace run_baseline(const suite::Task& task, Episode& ep) {
  const fabric::FamilyDef* fam = fabric::find_family(task.family);
  if (!ep.begin(suite::render_prompt(task))) return ep.finish();
  Record final_record;
  for (const auto& entity : task.entities) {
    auto groups = detail::collect_entity_atomically(ep, *fam, task, entity);
    if (!groups) return ep.finish();
    final_record.set(entity, Value(detail::assemble_entity(*fam, task, *groups)));
  }
  detail::write_and_claim(ep, task, final_record);
  return ep.finish();
}

// ---------------------------------------------------------------------------
// Mode: flat skill (list, reuse-or-compose, execute per entity, 3-strikes
// fallback to atomic calls). With allow_save=false this is the reuse-only
// policy of static transfer: inherited skills execute, nothing is composed.

inline EpisodeTrace run_skill_mode(const suite::Task& task, Episode& ep, bool allow_save = true,
                                   const std::string* prompt_override = nullptr) {
  const fabric::FamilyDef* fam = fabric::find_family(task.family);
  if (!ep.begin(prompt_override ? *prompt_override : suite::render_prompt(task)))
    return ep.finish();

  if (!ep.act_list().live) return ep.finish();
  const library::SkillEntry* match = detail::find_matching_skill(ep.lib(), task);
  std::string skill_name;
  if (match) {
    skill_name = match->name;
  } else if (allow_save) {
    skill_name = compose::flat_skill_name(*fam);
    std::string source = compose_skill(task, "name");
    std::string desc = "Collect all " + std::string(fam->unit) + " data fields via " +
                       std::to_string(fam->tools.size()) + " chained API calls";
    auto saved = ep.act_save(skill_name, source, {"name"}, desc);
    if (!saved.live) return ep.finish();
    if (!saved.ok) skill_name.clear();  // verifier rejected; fall back to atomic calls
  }

  Record final_record;
  for (const auto& entity : task.entities) {
    std::optional<Record> groups;
    if (!skill_name.empty()) {
      for (int attempt = 0; attempt < 3; ++attempt) {
        Record args;
        args.set("name", Value(entity));
        auto action = ep.act_execute(skill_name, args);
        if (!action.live) return ep.finish();
        if (action.ok && ep.last_outcome() && ep.last_outcome()->result.is_record()) {
          groups = ep.last_outcome()->result.as_record();
          break;
        }
      }
    }
    if (!groups) {
      // three consecutive failures (or no usable skill): atomic fallback
      groups = detail::collect_entity_atomically(ep, *fam, task, entity);
      if (!groups) return ep.finish();
    }
    final_record.set(entity, Value(detail::assemble_entity(*fam, task, *groups)));
  }
  detail::write_and_claim(ep, task, final_record);
  return ep.finish();
}

// ---------------------------------------------------------------------------
// Mode: hierarchical (low collector, medium analyzer, high compiler; one
// top-level execute; no entity-level fallback at nested levels)

inline EpisodeTrace run_hierarchical(const suite::Task& task, Episode& ep) {
  const fabric::FamilyDef* fam = fabric::find_family(task.family);
  if (!ep.begin(suite::render_prompt(task))) return ep.finish();
  if (!ep.act_list().live) return ep.finish();

  std::string low = compose::low_skill_name(*fam);
  std::string medium = compose::medium_skill_name(*fam);
  std::string high = compose::high_skill_name(*fam);
  struct Spec {
    std::string name, source, desc;
    std::vector<std::string> params;
  };
  std::vector<Spec> skills = {
      {low, compose::canonical(compose::collector_script(*fam, "name")),
       "Low-level: collect raw " + std::string(fam->unit) + " fields", {"name"}},
      {medium, compose::canonical(compose::medium_script(*fam, task.required_tools, "name")),
       "Medium-level: analyze one " + std::string(fam->unit) + " with derived metrics",
       {"name"}},
      {high, compose::canonical(compose::high_script(*fam, "name")),
       "High-level: compile the full report", {"names"}},
  };
  for (const auto& s : skills) {
    if (ep.lib().has(s.name)) continue;
    auto saved = ep.act_save(s.name, s.source, s.params, s.desc);
    if (!saved.live) return ep.finish();
  }

  Record args;
  Value::List names;
  for (const auto& e : task.entities) names.push_back(Value(e));
  args.set("names", Value(std::move(names)));
  auto action = ep.act_execute(high, args);
  if (!action.live) return ep.finish();

  if (!action.ok || !ep.last_outcome() || !ep.last_outcome()->result.is_record()) {
    // error propagation through the hierarchy fails the whole task
    Record cargs;
    cargs.set("status", Value("hierarchical execution failed"));
    ep.act_tool("claim_done", cargs);
    return ep.finish();
  }

  const Record& compiled = ep.last_outcome()->result.as_record();
  Record final_record;
  for (const auto& entity : task.entities) {
    const Value* rec = compiled.find(entity);
    Record groups = rec && rec->is_record() ? rec->as_record() : Record{};
    final_record.set(entity, Value(detail::assemble_entity(*fam, task, groups)));
  }
  detail::write_and_claim(ep, task, final_record);
  return ep.finish();
}

// ---------------------------------------------------------------------------
// Mode: direct exec (single-use hardcoded script, no cache entry)

inline EpisodeTrace run_direct_exec(const suite::Task& task, Episode& ep) {
  const fabric::FamilyDef* fam = fabric::find_family(task.family);
  if (!ep.begin(suite::render_prompt(task))) return ep.finish();

  auto action = ep.act_exec_script(
      compose::canonical(compose::direct_script(*fam, task)));
  if (!action.live) return ep.finish();

  if (action.ok && action.value.is_record()) {
    detail::write_and_claim(ep, task, action.value.as_record());
    return ep.finish();
  }

  // script failure aborts to atomic fallback for the whole task
  Record final_record;
  for (const auto& entity : task.entities) {
    auto groups = detail::collect_entity_atomically(ep, *fam, task, entity);
    if (!groups) return ep.finish();
    final_record.set(entity, Value(detail::assemble_entity(*fam, task, *groups)));
  }
  detail::write_and_claim(ep, task, final_record);
  return ep.finish();
}

// ---------------------------------------------------------------------------
// Stress policy for limit enforcement: loops a cheap tool until cut off.

inline EpisodeTrace run_adversarial_loop(const suite::Task& task, Episode& ep) {
  if (!ep.begin(suite::render_prompt(task))) return ep.finish();
  for (;;) {
    if (!ep.act_tool("list_directory", {}).live) break;
  }
  return ep.finish();
}

// ---------------------------------------------------------------------------
// Mode: static two-phase transfer

struct TaskEnv {
  fabric::Registry registry;
  fabric::Workspace workspace;
  std::filesystem::path task_dir;  // holds skill_cache.json next to workspace/
};

using EnvFactory = std::function<TaskEnv(const suite::Task&)>;

struct StaticTransferResult {
  std::vector<std::pair<std::string, EpisodeTrace>> phase1;  // (task id, trace)
  std::vector<std::pair<std::string, EpisodeTrace>> phase2;
};

// Phase 1 accumulates one cache per family by running flat skill mode over
// the source tasks (a cocktail skill is no use to a gitlab task). Phase 2
// copies the target's family cache into its workspace, locks it, injects the
// skill summary into the prompt, and runs reuse-only.
inline StaticTransferResult run_static_phases(const std::vector<suite::Task>& source_tasks,
                                              const std::vector<suite::Task>& target_tasks,
                                              const EnvFactory& make_env,
                                              const std::filesystem::path& staging_dir,
                                              const EpisodeConfig& config) {
  StaticTransferResult result;

  auto staging_cache_for = [&](const std::string& family) {
    return staging_dir / (family + ".skill_cache.json");
  };

  std::map<std::string, library::SkillLibrary> shared;
  for (const auto& task : source_tasks) {
    auto it = shared.find(task.family);
    if (it == shared.end())
      it = shared.emplace(task.family,
                          library::SkillLibrary::open(staging_cache_for(task.family)))
               .first;
    TaskEnv env = make_env(task);
    Episode ep(task, env.registry, env.workspace, it->second, config);
    result.phase1.emplace_back(task.id, run_skill_mode(task, ep));
  }
  for (auto& [family, lib] : shared) lib.persist();

  for (const auto& task : target_tasks) {
    TaskEnv env = make_env(task);
    auto cache_copy = env.task_dir / "skill_cache.json";
    auto staging_cache = staging_cache_for(task.family);
    std::filesystem::create_directories(env.task_dir);
    if (std::filesystem::exists(staging_cache))
      std::filesystem::copy_file(staging_cache, cache_copy,
                                 std::filesystem::copy_options::overwrite_existing);
    auto inherited = std::filesystem::exists(cache_copy)
                         ? library::SkillLibrary::load(cache_copy)
                         : library::SkillLibrary();
    inherited.lock();

    Episode ep(task, env.registry, env.workspace, inherited, config);
    std::string prompt = suite::inject_cross_summary(suite::render_prompt(task), inherited);
    result.phase2.emplace_back(task.id,
                               run_skill_mode(task, ep, /*allow_save=*/false, &prompt));
  }
  return result;
}

}  // namespace skillcraft::policy
