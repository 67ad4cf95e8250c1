// Task suite: scales the 21 seed families into the 126-task benchmark
// (3 easy / 2 medium / 1 hard per family), renders prompts, injects
// cross-task skill summaries, and scores outputs by the weighted rubric.
#pragma once

#include <string>
#include <vector>

#include "skillcraft/fabric.hpp"
#include "skillcraft/library.hpp"
#include "skillcraft/value.hpp"

namespace skillcraft::suite {

struct Task {
  std::string id;      // "<family>/<level>"
  std::string family;
  std::string level;   // e1 e2 e3 m1 m2 h1
  int entity_count = 0;  // N
  int complexity = 0;    // M: data-tool calls per entity
  std::vector<std::string> entities;
  std::vector<std::string> required_tools;
  std::string output_file;

  char level_class() const { return level.empty() ? 'e' : level[0]; }
  bool is_hard() const { return level_class() == 'h'; }
};

inline const std::vector<std::string>& level_names() {
  static const std::vector<std::string> names = {"e1", "e2", "e3", "m1", "m2", "h1"};
  return names;
}

inline int level_scale(char level_class) {
  return level_class == 'e' ? 3 : level_class == 'm' ? 4 : 5;
}

// ---------------------------------------------------------------------------
// Suite generation

inline std::vector<Task> generate_suite(const std::vector<std::string>& family_ids,
                                        std::uint64_t seed) {
  std::vector<Task> tasks;
  for (const auto& family_id : family_ids) {
    const fabric::FamilyDef* fam = fabric::find_family(family_id);
    if (!fam) throw std::runtime_error("unknown task family '" + family_id + "'");

    // seeded permutation of the entity pool; levels slice it so that the
    // three easy tasks get disjoint triples
    std::vector<std::string> pool(fam->entities.begin(), fam->entities.end());
    fabric::prf::Stream rng{fabric::prf::key(seed, fam->id, "entity-selection", "")};
    for (std::size_t i = pool.size(); i > 1; --i)
      std::swap(pool[i - 1], pool[rng.below(i)]);

    auto slice = [&](std::size_t start, std::size_t count) {
      return std::vector<std::string>(pool.begin() + static_cast<std::ptrdiff_t>(start),
                                      pool.begin() + static_cast<std::ptrdiff_t>(start + count));
    };

    for (const auto& level : level_names()) {
      Task t;
      t.family = fam->id;
      t.level = level;
      t.id = t.family + "/" + level;
      int n = level_scale(level[0]);
      t.entity_count = n;
      t.complexity = n;
      if (level == "e1") t.entities = slice(0, 3);
      else if (level == "e2") t.entities = slice(3, 3);
      else if (level == "e3") t.entities = slice(6, 3);
      else if (level == "m1") t.entities = slice(0, 4);
      else if (level == "m2") t.entities = slice(4, 4);
      else t.entities = slice(0, 5);
      for (int i = 0; i < t.complexity; ++i)
        t.required_tools.push_back(fam->tools[static_cast<std::size_t>(i)].name);
      t.output_file = fam->output_file;
      tasks.push_back(std::move(t));
    }
  }
  return tasks;
}

inline const Task* find_task(const std::vector<Task>& tasks, std::string_view id) {
  for (const auto& t : tasks)
    if (t.id == id) return &t;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Suite manifest (tasks.json)

inline std::string tasks_to_json(const std::vector<Task>& tasks) {
  Value::List items;
  for (const auto& t : tasks) {
    Record r;
    r.set("id", Value(t.id));
    r.set("family", Value(t.family));
    r.set("level", Value(t.level));
    Value::List ents;
    for (const auto& e : t.entities) ents.push_back(Value(e));
    r.set("entities", Value(std::move(ents)));
    Value::List tools;
    for (const auto& tool : t.required_tools) tools.push_back(Value(tool));
    r.set("required_tools", Value(std::move(tools)));
    r.set("output_file", Value(t.output_file));
    items.push_back(Value(std::move(r)));
  }
  Record top;
  top.set("tasks", Value(std::move(items)));
  return serialize(Value(std::move(top)));
}

inline std::vector<Task> tasks_from_json(const std::string& text) {
  auto parsed = parse_json(text);
  if (!parsed || !parsed->is_record())
    throw std::runtime_error("tasks manifest: not a JSON object");
  const Value* list = parsed->as_record().find("tasks");
  if (!list || !list->is_list()) throw std::runtime_error("tasks manifest: missing 'tasks'");
  std::vector<Task> tasks;
  for (const auto& item : list->as_list()) {
    if (!item.is_record()) throw std::runtime_error("tasks manifest: bad task entry");
    const auto& r = item.as_record();
    auto str = [&](const char* k) {
      const Value* v = r.find(k);
      if (!v || !v->is_string())
        throw std::runtime_error(std::string("tasks manifest: bad field '") + k + "'");
      return v->as_string();
    };
    Task t;
    t.id = str("id");
    t.family = str("family");
    t.level = str("level");
    t.output_file = str("output_file");
    const Value* ents = r.find("entities");
    const Value* tools = r.find("required_tools");
    if (!ents || !ents->is_list() || !tools || !tools->is_list())
      throw std::runtime_error("tasks manifest: bad entities/required_tools");
    for (const auto& e : ents->as_list()) t.entities.push_back(e.as_string());
    for (const auto& tool : tools->as_list()) t.required_tools.push_back(tool.as_string());
    t.entity_count = static_cast<int>(t.entities.size());
    t.complexity = static_cast<int>(t.required_tools.size());
    tasks.push_back(std::move(t));
  }
  return tasks;
}

// ---------------------------------------------------------------------------
// Prompt rendering. Task prompts never mention the skill primitives; those
// live in the system prompt of skill-enabled modes only.

inline std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += i + 1 == names.size() ? " and " : ", ";
    out += names[i];
  }
  return out;
}

inline std::string plural(const std::string& noun) {
  auto ends_with = [&](std::string_view suffix) {
    return noun.size() >= suffix.size() &&
           noun.compare(noun.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with("series") || ends_with("pokemon")) return noun;
  if (ends_with("y") && noun.size() >= 2 &&
      std::string("aeiou").find(noun[noun.size() - 2]) == std::string::npos)
    return noun.substr(0, noun.size() - 1) + "ies";
  if (ends_with("s") || ends_with("x") || ends_with("ch") || ends_with("sh"))
    return noun + "es";
  return noun + "s";
}

inline std::string render_prompt(const Task& task) {
  const fabric::FamilyDef* fam = fabric::find_family(task.family);
  if (!fam) throw std::runtime_error("unknown task family '" + task.family + "'");

  std::string p;
  p += std::string(fam->title) + ": build a structured report covering " +
       std::to_string(task.entity_count) + " " + plural(fam->unit) + " (" +
       join_names(task.entities) +
       ").\n\n";
  p += "For each " + std::string(fam->unit) + ", call " + std::to_string(task.complexity) +
       " API endpoints and record their data fields:\n";
  const fabric::ToolDef& profile = fam->tools[0];
  for (std::size_t i = 0; i < task.required_tools.size(); ++i) {
    const fabric::ToolDef* td = fabric::find_tool(*fam, task.required_tools[i]);
    p += "  " + std::to_string(i + 1) + ". " + td->name + "(" + td->param + ") -- " + td->blurb +
         ". Fields: ";
    for (std::size_t j = 0; j < td->fields.size(); ++j) {
      if (j) p += ", ";
      p += td->fields[j].name;
    }
    if (td->link >= 0) {
      const char* link_field = profile.fields[static_cast<std::size_t>(td->link)].name;
      p += ". Pass the '" + std::string(link_field) + "' value from the " + profile.name +
           " response as " + td->param;
    }
    p += ".\n";
  }

  auto plan = fabric::metric_plan(*fam, task.required_tools, task.level_class());
  if (plan) {
    p += "\nThen calculate " + plan->metric_name + " (0-100) for each " + fam->unit +
         " as a weighted sum: ";
    for (std::size_t i = 0; i < plan->sources.size(); ++i) {
      if (i) p += " + ";
      p += std::string(plan->sources[i].field) + " from " + plan->sources[i].tool + " (" +
           std::to_string(static_cast<int>(plan->weights[i] * 100)) + "%)";
    }
    p += ". Determine " + plan->status_name + ": '" + plan->band_hi +
         "' if the score is at least 70, '" + plan->band_mid + "' if at least 40, otherwise '" +
         plan->band_lo + "'.\n";
  }

  p += "\nAssemble a single JSON object keyed by " + std::string(fam->unit) +
       " name. Each entry holds one sub-record per endpoint, keyed by the endpoint name, with "
       "exactly the fields listed above";
  if (plan) p += ", plus the " + plan->metric_name + " and " + plan->status_name + " values";
  p += ".\nSave the result to " + task.output_file +
       " using write_file, then call claim_done.\n\nAvailable tools:\n";
  for (std::size_t i = 0; i < task.required_tools.size(); ++i) {
    const fabric::ToolDef* td = fabric::find_tool(*fam, task.required_tools[i]);
    p += "  - " + std::string(td->name) + "(" + td->param + "): " + td->blurb + "\n";
  }
  p += "  - write_file(path, content): Save a file into the task workspace\n";
  p += "  - read_file(path): Read a file from the task workspace\n";
  p += "  - list_directory(): List workspace files\n";
  p += "  - claim_done(status): Signal task completion\n";
  p += "\nScale: " + std::to_string(task.entity_count) + " subtasks x " +
       std::to_string(task.complexity) + " API calls = " +
       std::to_string(task.entity_count * task.complexity) + " total calls.\n";
  return p;
}

// Appends a structured description of the inherited skills: signature,
// description, and execution history.
inline std::string inject_cross_summary(const std::string& prompt,
                                        const library::SkillLibrary& lib) {
  std::string out = prompt;
  out += "\n";
  if (lib.entries().empty()) {
    out += "No skills available.\n";
    return out;
  }
  out += "Inherited skills (cross_task_skills_summary):\n";
  std::size_t i = 0;
  for (const auto& e : lib.entries()) {
    out += "Skill " + std::to_string(++i) + ": " + e.name + "(";
    for (std::size_t j = 0; j < e.parameters.size(); ++j) {
      if (j) out += ", ";
      out += e.parameters[j];
    }
    out += ") -- " + e.description + " [" + std::to_string(e.success_count) + " successes, " +
           std::to_string(e.failure_count) + " failures]\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scoring

struct ScoreReport {
  struct Criterion {
    std::string kind;
    double earned = 0;
    double max = 0;
  };
  std::vector<Criterion> per_criterion;
  double total = 0;
  bool success = false;

  Value to_value() const {
    Value::List rows;
    for (const auto& c : per_criterion) {
      Record r;
      r.set("kind", Value(c.kind));
      r.set("earned", Value(c.earned));
      r.set("max", Value(c.max));
      rows.push_back(Value(std::move(r)));
    }
    Record r;
    r.set("criteria", Value(std::move(rows)));
    r.set("total", Value(total));
    r.set("success", Value(success));
    return Value(std::move(r));
  }
};

namespace detail {

inline void count_leaf_matches(const Value& expected, const Value* actual, long long& total,
                               long long& matched) {
  if (expected.is_record()) {
    for (const auto& [k, v] : expected.as_record().items()) {
      const Value* next = actual && actual->is_record() ? actual->as_record().find(k) : nullptr;
      count_leaf_matches(v, next, total, matched);
    }
    return;
  }
  if (expected.is_list()) {
    const auto& l = expected.as_list();
    for (std::size_t i = 0; i < l.size(); ++i) {
      const Value* next = actual && actual->is_list() && i < actual->as_list().size()
                              ? &actual->as_list()[i]
                              : nullptr;
      count_leaf_matches(l[i], next, total, matched);
    }
    return;
  }
  ++total;
  if (!actual) return;
  if (expected.is_number()) {
    if (actual->is_number() &&
        std::fabs(expected.as_number() - actual->as_number()) <= 1e-9)
      ++matched;
    return;
  }
  if (expected == *actual) ++matched;
}

}  // namespace detail

// Partial-credit rubric: file exists (10), valid JSON (10), completeness (30,
// proportional to entities present), field accuracy (50, proportional to
// oracle leaves matched; numbers within 1e-9, everything else exact).
// Absence scores zero; nothing here throws.
inline ScoreReport score(const Task& task, const fabric::Workspace& ws,
                         const Value& oracle_record) {
  ScoreReport report;
  double file_pts = 0, json_pts = 0, completeness_pts = 0, accuracy_pts = 0;

  std::optional<Value> output;
  if (ws.has_file(task.output_file)) {
    file_pts = 10;
    std::string text;
    try {
      text = ws.read_file(task.output_file);
    } catch (const fabric::ToolError&) {
    }
    if (auto parsed = parse_json(text)) {
      json_pts = 10;
      output = std::move(parsed);
    }
  }

  long long present = 0;
  if (output && output->is_record()) {
    for (const auto& entity : task.entities) {
      const Value* entry = output->as_record().find(entity);
      if (entry && entry->is_record()) ++present;
    }
  }
  completeness_pts = task.entity_count == 0
                         ? 30
                         : 30.0 * static_cast<double>(present) / task.entity_count;

  long long total_leaves = 0, matched_leaves = 0;
  detail::count_leaf_matches(oracle_record, output ? &*output : nullptr, total_leaves,
                             matched_leaves);
  accuracy_pts = total_leaves == 0
                     ? 50
                     : 50.0 * static_cast<double>(matched_leaves) / static_cast<double>(total_leaves);

  report.per_criterion = {{"file_exists", file_pts, 10},
                          {"json_valid", json_pts, 10},
                          {"completeness", completeness_pts, 30},
                          {"field_accuracy", accuracy_pts, 50}};
  report.total = file_pts + json_pts + completeness_pts + accuracy_pts;
  report.success = report.total >= 90.0;
  return report;
}

inline Value oracle(const fabric::Registry& reg, const Task& task) {
  return fabric::oracle_record(reg, task.entities, task.required_tools, task.level_class());
}

}  // namespace skillcraft::suite
