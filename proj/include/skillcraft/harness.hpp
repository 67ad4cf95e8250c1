// Run orchestration: executes a mode over a task suite into a run directory,
// aggregates per-task metrics, compares runs with the (variant-base)/base
// Diff formula over the both-succeeded intersection, and emits reports.
#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "skillcraft/accounting.hpp"
#include "skillcraft/policies.hpp"
#include "skillcraft/suite.hpp"

namespace skillcraft::harness {

// ---------------------------------------------------------------------------
// Per-task metrics

struct MetricsRow {
  std::string task_id;
  std::string level;
  bool success = false;
  double score = 0;
  long long in_tokens = 0;
  long long out_tokens = 0;
  double cost = 0;
  long long turns = 0;
  long long tool_calls = 0;
  long long exec_attempts = 0;
  long long exec_successes = 0;
  long long skills_saved = 0;
  long long skill_invocations = 0;
  std::string final_status;

  long long tokens() const { return in_tokens + out_tokens; }
  bool hard() const { return !level.empty() && level[0] == 'h'; }
};

struct RunMetrics {
  std::string mode;
  std::uint64_t seed = 0;
  TokenModel tokens;
  std::vector<MetricsRow> rows;  // sorted by task_id

  const MetricsRow* find(std::string_view id) const {
    for (const auto& r : rows)
      if (r.task_id == id) return &r;
    return nullptr;
  }
};

struct EpisodeRecord {
  std::string task_id;
  std::string level;
  policy::EpisodeTrace trace;
  suite::ScoreReport score;
};

// Sums trace counters and skill events into one row per episode. Token totals
// are recomputed from the per-turn byte counts, so a dropped or double-counted
// message shows up as a mismatch against the running counters.
inline RunMetrics aggregate(const std::string& mode, const std::vector<EpisodeRecord>& episodes,
                            const TokenModel& tm) {
  RunMetrics out;
  out.mode = mode;
  out.tokens = tm;
  for (const auto& ep : episodes) {
    MetricsRow row;
    row.task_id = ep.task_id;
    row.level = ep.level;
    row.success = ep.score.success;
    row.score = ep.score.total;
    long long in_toks = 0, out_toks = 0;
    for (const auto& turn : ep.trace.turns) {
      in_toks += count_tokens(static_cast<std::size_t>(turn.bytes_in), tm);
      out_toks += count_tokens(static_cast<std::size_t>(turn.bytes_out), tm);
      for (const auto& event : turn.skill_events) {
        if (event.event == "save" && event.outcome == "saved") row.skills_saved += 1;
        if (event.event == "execute") {
          row.exec_attempts += 1;
          row.skill_invocations += 1;
          if (event.outcome == "success") row.exec_successes += 1;
        }
      }
    }
    row.in_tokens = in_toks;
    row.out_tokens = out_toks;
    row.cost = token_cost(in_toks, out_toks, tm);
    row.turns = ep.trace.counters.turn_count;
    row.tool_calls = ep.trace.counters.tool_call_count;
    row.final_status = ep.trace.final_status;
    out.rows.push_back(std::move(row));
  }
  std::sort(out.rows.begin(), out.rows.end(),
            [](const MetricsRow& a, const MetricsRow& b) { return a.task_id < b.task_id; });
  return out;
}

// Rates with division guards: undefined over a zero denominator.
struct Rate {
  bool defined = false;
  double value = 0;
};

inline Rate exec_rate(const RunMetrics& m) {
  long long attempts = 0, successes = 0;
  for (const auto& r : m.rows) {
    attempts += r.exec_attempts;
    successes += r.exec_successes;
  }
  if (attempts == 0) return {};
  return {true, static_cast<double>(successes) / static_cast<double>(attempts)};
}

inline Rate reuse_rate(const RunMetrics& m) {
  long long saved = 0, invoked = 0;
  for (const auto& r : m.rows) {
    saved += r.skills_saved;
    invoked += r.skill_invocations;
  }
  if (saved == 0) return {};
  return {true, static_cast<double>(invoked) / static_cast<double>(saved)};
}

// ---------------------------------------------------------------------------
// Mode comparison

struct MetricCell {
  double base = 0;
  double variant = 0;
  bool diff_defined = false;
  double diff = 0;  // (variant - base) / base

  static MetricCell make(double base, double variant) {
    MetricCell c{base, variant, false, 0};
    if (base != 0) {
      c.diff_defined = true;
      c.diff = (variant - base) / base;
    }
    return c;
  }
};

struct SuccessCount {
  long long passed = 0;
  long long total = 0;
};

struct ComparisonTable {
  std::vector<std::string> intersection;  // task ids where both modes succeeded
  bool efficiency_defined = false;        // false when the intersection is empty
  MetricCell tokens, cost, turns, tool_calls;
  Rate base_exec, variant_exec, base_reuse, variant_reuse;
  SuccessCount base_overall, variant_overall, base_hard, variant_hard;
};

inline ComparisonTable compare(const RunMetrics& base, const RunMetrics& variant) {
  ComparisonTable table;
  for (const auto& row : base.rows) {
    table.base_overall.total += 1;
    if (row.success) table.base_overall.passed += 1;
    if (row.hard()) {
      table.base_hard.total += 1;
      if (row.success) table.base_hard.passed += 1;
    }
  }
  for (const auto& row : variant.rows) {
    table.variant_overall.total += 1;
    if (row.success) table.variant_overall.passed += 1;
    if (row.hard()) {
      table.variant_hard.total += 1;
      if (row.success) table.variant_hard.passed += 1;
    }
  }
  // efficiency means only over tasks where both modes succeeded
  double b_tokens = 0, v_tokens = 0, b_cost = 0, v_cost = 0;
  double b_turns = 0, v_turns = 0, b_tools = 0, v_tools = 0;
  for (const auto& row : base.rows) {
    const MetricsRow* other = variant.find(row.task_id);
    if (!other || !row.success || !other->success) continue;
    table.intersection.push_back(row.task_id);
    b_tokens += static_cast<double>(row.tokens());
    v_tokens += static_cast<double>(other->tokens());
    b_cost += row.cost;
    v_cost += other->cost;
    b_turns += static_cast<double>(row.turns);
    v_turns += static_cast<double>(other->turns);
    b_tools += static_cast<double>(row.tool_calls);
    v_tools += static_cast<double>(other->tool_calls);
  }
  if (!table.intersection.empty()) {
    double n = static_cast<double>(table.intersection.size());
    table.efficiency_defined = true;
    table.tokens = MetricCell::make(b_tokens / n, v_tokens / n);
    table.cost = MetricCell::make(b_cost / n, v_cost / n);
    table.turns = MetricCell::make(b_turns / n, v_turns / n);
    table.tool_calls = MetricCell::make(b_tools / n, v_tools / n);
  }
  table.base_exec = exec_rate(base);
  table.variant_exec = exec_rate(variant);
  table.base_reuse = reuse_rate(base);
  table.variant_reuse = reuse_rate(variant);
  return table;
}

// ---------------------------------------------------------------------------
// Report emission

namespace detail {

inline std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline std::string fmt_tokens(double v) {
  if (v >= 100000) return fmt("%.2f", v / 1e6) + "M";
  if (v >= 1000) return fmt("%.1f", v / 1e3) + "K";
  return fmt("%.0f", v);
}

inline std::string fmt_diff(const MetricCell& c, bool defined) {
  if (!defined || !c.diff_defined) return "n/a";
  long long pct = std::llround(c.diff * 100.0);
  std::string s = std::to_string(pct) + "%";
  if (pct > 0) s = "+" + s;
  return s;
}

inline std::string fmt_rate(const Rate& r) {
  if (!r.defined) return "n/a";
  return fmt("%.0f", r.value * 100.0) + "%";
}

inline std::string fmt_reuse(const Rate& r) {
  if (!r.defined) return "n/a";
  return fmt("%.1f", r.value) + "x";
}

inline std::string fmt_success(const SuccessCount& s) {
  if (s.total == 0) return "n/a";
  long long pct = std::llround(100.0 * static_cast<double>(s.passed) /
                               static_cast<double>(s.total));
  return std::to_string(s.passed) + "/" + std::to_string(s.total) + " (" + std::to_string(pct) +
         "%)";
}

}  // namespace detail

// Deterministic column order: Exec, Reuse, Tokens, Cost, Turns, Tool Calls,
// Success (overall then hard), each efficiency metric as base/variant/diff.
// A comparison over empty runs emits the header only.
inline std::string emit_report(const ComparisonTable& table, const std::string& format) {
  using namespace detail;
  bool header_only = table.base_overall.total == 0 && table.variant_overall.total == 0;
  std::vector<std::string> headers = {
      "Exec (Base)",    "Exec (Variant)",  "Reuse (Base)",  "Reuse (Variant)",
      "Tokens (Base)",  "Tokens (Variant)", "Tokens Diff",
      "Cost (Base)",    "Cost (Variant)",   "Cost Diff",
      "Turns (Base)",   "Turns (Variant)",  "Turns Diff",
      "Tools (Base)",   "Tools (Variant)",  "Tools Diff",
      "Success Overall (Base)", "Success Overall (Variant)",
      "Success Hard (Base)",    "Success Hard (Variant)"};
  bool eff = table.efficiency_defined;
  std::vector<std::string> cells;
  if (!header_only) {
    cells = {fmt_rate(table.base_exec),
             fmt_rate(table.variant_exec),
             fmt_reuse(table.base_reuse),
             fmt_reuse(table.variant_reuse),
             eff ? fmt_tokens(table.tokens.base) : "n/a",
             eff ? fmt_tokens(table.tokens.variant) : "n/a",
             fmt_diff(table.tokens, eff),
             eff ? fmt("%.2f", table.cost.base) : "n/a",
             eff ? fmt("%.2f", table.cost.variant) : "n/a",
             fmt_diff(table.cost, eff),
             eff ? fmt("%.1f", table.turns.base) : "n/a",
             eff ? fmt("%.1f", table.turns.variant) : "n/a",
             fmt_diff(table.turns, eff),
             eff ? fmt("%.1f", table.tool_calls.base) : "n/a",
             eff ? fmt("%.1f", table.tool_calls.variant) : "n/a",
             fmt_diff(table.tool_calls, eff),
             fmt_success(table.base_overall),
             fmt_success(table.variant_overall),
             fmt_success(table.base_hard),
             fmt_success(table.variant_hard)};
  }

  std::string out;
  if (format == "csv") {
    for (std::size_t i = 0; i < headers.size(); ++i) {
      if (i) out += ',';
      out += headers[i];
    }
    out += '\n';
    if (!cells.empty()) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    }
    return out;
  }
  // markdown
  out += '|';
  for (const auto& h : headers) out += ' ' + h + " |";
  out += "\n|";
  for (std::size_t i = 0; i < headers.size(); ++i) out += " --- |";
  out += '\n';
  if (!cells.empty()) {
    out += '|';
    for (const auto& c : cells) out += ' ' + c + " |";
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// metrics.json

inline Value metrics_to_value(const RunMetrics& m) {
  Value::List rows;
  for (const auto& r : m.rows) {
    Record row;
    row.set("task_id", Value(r.task_id));
    row.set("level", Value(r.level));
    row.set("success", Value(r.success));
    row.set("score", Value(r.score));
    row.set("in_tokens", Value(r.in_tokens));
    row.set("out_tokens", Value(r.out_tokens));
    row.set("cost", Value(r.cost));
    row.set("turns", Value(r.turns));
    row.set("tool_calls", Value(r.tool_calls));
    row.set("exec_attempts", Value(r.exec_attempts));
    row.set("exec_successes", Value(r.exec_successes));
    row.set("skills_saved", Value(r.skills_saved));
    row.set("skill_invocations", Value(r.skill_invocations));
    row.set("final_status", Value(r.final_status));
    rows.push_back(Value(std::move(row)));
  }
  Record top;
  top.set("mode", Value(m.mode));
  top.set("seed", Value(static_cast<double>(m.seed)));
  Record tm;
  tm.set("bytes_per_token", Value(m.tokens.bytes_per_token));
  tm.set("price_in", Value(m.tokens.price_in));
  tm.set("price_out", Value(m.tokens.price_out));
  top.set("token_model", Value(std::move(tm)));
  top.set("rows", Value(std::move(rows)));
  return Value(std::move(top));
}

inline RunMetrics metrics_from_value(const Value& v) {
  if (!v.is_record()) throw std::runtime_error("metrics.json: not an object");
  const auto& top = v.as_record();
  RunMetrics m;
  auto str_field = [](const Record& r, const char* k) {
    const Value* f = r.find(k);
    if (!f || !f->is_string())
      throw std::runtime_error(std::string("metrics.json: bad field '") + k + "'");
    return f->as_string();
  };
  auto num_field = [](const Record& r, const char* k) {
    const Value* f = r.find(k);
    if (!f || !f->is_number())
      throw std::runtime_error(std::string("metrics.json: bad field '") + k + "'");
    return f->as_number();
  };
  m.mode = str_field(top, "mode");
  m.seed = static_cast<std::uint64_t>(num_field(top, "seed"));
  if (const Value* tm = top.find("token_model"); tm && tm->is_record()) {
    m.tokens.bytes_per_token = static_cast<long long>(num_field(tm->as_record(), "bytes_per_token"));
    m.tokens.price_in = num_field(tm->as_record(), "price_in");
    m.tokens.price_out = num_field(tm->as_record(), "price_out");
  }
  const Value* rows = top.find("rows");
  if (!rows || !rows->is_list()) throw std::runtime_error("metrics.json: missing rows");
  for (const auto& item : rows->as_list()) {
    const auto& r = item.as_record();
    MetricsRow row;
    row.task_id = str_field(r, "task_id");
    row.level = str_field(r, "level");
    const Value* success = r.find("success");
    row.success = success && success->is_bool() && success->as_bool();
    row.score = num_field(r, "score");
    row.in_tokens = static_cast<long long>(num_field(r, "in_tokens"));
    row.out_tokens = static_cast<long long>(num_field(r, "out_tokens"));
    row.cost = num_field(r, "cost");
    row.turns = static_cast<long long>(num_field(r, "turns"));
    row.tool_calls = static_cast<long long>(num_field(r, "tool_calls"));
    row.exec_attempts = static_cast<long long>(num_field(r, "exec_attempts"));
    row.exec_successes = static_cast<long long>(num_field(r, "exec_successes"));
    row.skills_saved = static_cast<long long>(num_field(r, "skills_saved"));
    row.skill_invocations = static_cast<long long>(num_field(r, "skill_invocations"));
    row.final_status = str_field(r, "final_status");
    m.rows.push_back(std::move(row));
  }
  return m;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return std::string{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline RunMetrics load_metrics(const std::filesystem::path& run_dir) {
  auto text = read_text_file(run_dir / "metrics.json");
  auto parsed = parse_json(text);
  if (!parsed) throw std::runtime_error("metrics.json: invalid JSON in " + run_dir.string());
  return metrics_from_value(*parsed);
}

// ---------------------------------------------------------------------------
// Runner

struct RunConfig {
  std::string mode = "base";  // base | skill | hier | direct | static
  std::uint64_t seed = 0;
  std::filesystem::path run_dir;
  std::map<std::string, std::set<std::string>> edge_cases;  // task id -> entity names
  int nesting_limit = 10;
  TokenModel tokens;
  Limits limits;
  int jobs = 1;
  char static_source = 'e';  // static mode: source / target level classes
  char static_target = 'h';
};

namespace detail {

inline std::set<std::string> edges_for(const RunConfig& config, const std::string& task_id) {
  auto it = config.edge_cases.find(task_id);
  return it == config.edge_cases.end() ? std::set<std::string>{} : it->second;
}

inline policy::EpisodeTrace run_mode_once(const suite::Task& task, const RunConfig& config,
                                          const std::filesystem::path& task_dir) {
  auto registry = fabric::build_registry(task.family, config.seed, edges_for(config, task.id));
  fabric::Workspace workspace(task_dir / "workspace");
  library::SkillLibrary lib;
  if (config.mode == "skill" || config.mode == "hier")
    lib.set_cache_path(task_dir / "skill_cache.json");
  policy::EpisodeConfig ep_config{config.tokens, config.limits, config.mode == "hier",
                                  config.nesting_limit, script::kDefaultStepBudget};
  policy::Episode ep(task, registry, workspace, lib, ep_config);
  if (config.mode == "base") return policy::run_baseline(task, ep);
  if (config.mode == "skill") return policy::run_skill_mode(task, ep);
  if (config.mode == "hier") return policy::run_hierarchical(task, ep);
  if (config.mode == "direct") return policy::run_direct_exec(task, ep);
  throw std::runtime_error("unknown mode '" + config.mode + "'");
}

}  // namespace detail

inline RunMetrics run_suite(const std::vector<suite::Task>& tasks, const RunConfig& config) {
  std::filesystem::create_directories(config.run_dir);
  std::vector<EpisodeRecord> episodes(tasks.size());

  if (config.mode == "static") {
    std::vector<suite::Task> source, target;
    for (const auto& t : tasks) {
      if (t.level_class() == config.static_source) source.push_back(t);
      if (t.level_class() == config.static_target) target.push_back(t);
    }
    policy::EnvFactory make_env = [&](const suite::Task& task) {
      auto task_dir = config.run_dir / task.id;
      return policy::TaskEnv{
          fabric::build_registry(task.family, config.seed, detail::edges_for(config, task.id)),
          fabric::Workspace(task_dir / "workspace"), task_dir};
    };
    policy::EpisodeConfig ep_config{config.tokens, config.limits, false, config.nesting_limit,
                                    script::kDefaultStepBudget};
    auto result = policy::run_static_phases(source, target, make_env,
                                            config.run_dir / "static_cache", ep_config);
    episodes.clear();
    for (auto& [task_id, trace] : result.phase1)
      write_text_file(config.run_dir / task_id / "static_phase1.trace.jsonl",
                      policy::trace_to_jsonl(trace));
    for (auto& [task_id, trace] : result.phase2) {
      const suite::Task* task = suite::find_task(tasks, task_id);
      auto registry =
          fabric::build_registry(task->family, config.seed, detail::edges_for(config, task_id));
      fabric::Workspace ws(config.run_dir / task_id / "workspace");  // reopen for scoring
      auto report = suite::score(*task, ws, suite::oracle(registry, *task));
      write_text_file(config.run_dir / task_id / "static.trace.jsonl",
                      policy::trace_to_jsonl(trace));
      episodes.push_back({task_id, task->level, std::move(trace), report});
    }
    auto metrics = aggregate("static", episodes, config.tokens);
    metrics.seed = config.seed;
    write_text_file(config.run_dir / "metrics.json", serialize(metrics_to_value(metrics)));
    return metrics;
  }

  auto run_one = [&](std::size_t i) {
    const suite::Task& task = tasks[i];
    auto task_dir = config.run_dir / task.id;
    auto registry =
        fabric::build_registry(task.family, config.seed, detail::edges_for(config, task.id));
    auto trace = detail::run_mode_once(task, config, task_dir);
    fabric::Workspace ws(task_dir / "workspace");  // reopen for scoring
    auto report = suite::score(task, ws, suite::oracle(registry, task));
    write_text_file(task_dir / (config.mode + ".trace.jsonl"), policy::trace_to_jsonl(trace));
    episodes[i] = {task.id, task.level, std::move(trace), report};
  };

  int jobs = std::max(1, config.jobs);
  if (jobs == 1 || tasks.size() <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) run_one(i);
  } else {
    std::mutex next_mutex;
    std::size_t next = 0;
    auto worker = [&]() {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> hold(next_mutex);
          if (next >= tasks.size()) return;
          i = next++;
        }
        run_one(i);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  auto metrics = aggregate(config.mode, episodes, config.tokens);
  metrics.seed = config.seed;
  write_text_file(config.run_dir / "metrics.json", serialize(metrics_to_value(metrics)));
  return metrics;
}

}  // namespace skillcraft::harness
