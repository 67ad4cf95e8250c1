#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "skillcraft/library.hpp"

using namespace skillcraft;
using namespace skillcraft::library;

namespace {

std::filesystem::path temp_path(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / "skillcraft_library";
  std::filesystem::create_directories(dir);
  auto p = dir / tag;
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

Record args1(const char* k, Value v) {
  Record r;
  r.set(k, std::move(v));
  return r;
}

// Records every dispatched call; answers from a fixed table.
struct TableDispatcher : script::ToolDispatcher {
  Record table;  // tool name -> response value
  std::vector<std::string> calls;
  Value dispatch(const std::string& tool, const Record&) override {
    calls.push_back(tool);
    if (const Value* v = table.find(tool)) return *v;
    throw script::DispatchError{script::IssueKind::unknown_tool, "unknown tool " + tool, {}};
  }
};

}  // namespace

TEST_CASE("quality check: the over-50%-empty rule") {
  auto bad = quality_check(*parse_json(
      "{\"a\": null, \"b\": \"Unknown\", \"c\": 0, \"d\": \"x\", \"e\": 2}"));
  CHECK(bad.total_leaves == 5);
  CHECK(bad.empty_leaves == 3);
  CHECK(bad.ratio == 0.6);
  CHECK_FALSE(bad.passed);
  CHECK(bad.flagged_paths == std::vector<std::string>{"a", "b", "c"});

  auto good = quality_check(*parse_json("{\"a\": 1, \"b\": \"ok\"}"));
  CHECK(good.ratio == 0.0);
  CHECK(good.passed);

  // exactly half passes (strict-greater threshold)
  auto boundary = quality_check(*parse_json("{\"a\": null, \"b\": 1}"));
  CHECK(boundary.ratio == 0.5);
  CHECK(boundary.passed);
}

TEST_CASE("quality check: sentinel strings, containers and scalars") {
  CHECK_FALSE(quality_check(*parse_json("{\"a\": \"NONE\", \"b\": \"unknown\"}")).passed);
  // the string "0" is a deliberate datum, only the number 0 counts as empty
  CHECK(quality_check(*parse_json("{\"a\": \"0\", \"b\": 1}")).passed);
  CHECK(quality_check(*parse_json("{\"a\": false, \"b\": 1}")).passed);
  // empty containers are one empty leaf each; {} must not pass vacuously
  CHECK_FALSE(quality_check(*parse_json("{}")).passed);
  CHECK_FALSE(quality_check(*parse_json("[]")).passed);
  CHECK_FALSE(quality_check(*parse_json("{\"a\": {}}")).passed);
  // scalars are a single leaf
  CHECK_FALSE(quality_check(Value(0.0)).passed);
  CHECK(quality_check(Value(42.0)).passed);
  // nested paths are reported
  auto f = quality_check(*parse_json("{\"x\": {\"y\": [1, null]}, \"z\": 1}"));
  CHECK(f.flagged_paths == std::vector<std::string>{"x.y[1]"});
}

TEST_CASE("quality monotonicity: adding a non-empty leaf never breaks a pass") {
  for (int n_empty = 0; n_empty <= 6; ++n_empty) {
    for (int n_full = 1; n_full <= 6; ++n_full) {
      Record r;
      for (int i = 0; i < n_empty; ++i) r.set("e" + std::to_string(i), Value());
      for (int i = 0; i < n_full; ++i) r.set("f" + std::to_string(i), Value(i + 1));
      bool before = quality_check(Value(r)).passed;
      r.set("extra", Value("fresh"));
      bool after = quality_check(Value(r)).passed;
      if (before) CHECK(after);
    }
  }
}

TEST_CASE("save_skill: acknowledgement, verifier rejection, parameter check") {
  SkillLibrary lib;
  auto ok = lib.save_skill("process_cocktail_complete",
                           "result = call_tool(\"search\", name=name)", {"name"},
                           "Collect cocktail data");
  REQUIRE(ok.ok);
  CHECK(ok.ack == "Skill 'process_cocktail_complete' saved successfully.");

  // unmatched brace at line 8 is rejected with the line number
  std::string broken;
  for (int i = 1; i <= 7; ++i) broken += "x" + std::to_string(i) + " = " + std::to_string(i) + "\n";
  broken += "}\n";
  auto syn = lib.save_skill("broken", broken, {}, "");
  REQUIRE_FALSE(syn.ok);
  CHECK(syn.error_kind == "syntax");
  REQUIRE(syn.report.has_value());
  CHECK(syn.report->stage == VerifierReport::Stage::syntax);
  CHECK(syn.report->syntax_detail->line == 8);
  CHECK(syn.report->syntax_detail->message.find("unexpected token '}'") != std::string::npos);

  // parameters must cover the free variables
  auto missing = lib.save_skill("needs_params", "result = a + b", {"a"}, "");
  REQUIRE_FALSE(missing.ok);
  CHECK(missing.error_kind == "parameter_mismatch");
  CHECK(missing.missing_parameters == std::vector<std::string>{"b"});

  // extra parameters beyond the free variables are fine
  CHECK(lib.save_skill("extra_params", "result = a", {"a", "unused"}, "").ok);
}

TEST_CASE("save_skill: version increments on overwrite") {
  SkillLibrary lib;
  lib.save_skill("s", "result = 1", {}, "v1");
  CHECK(lib.get_skill("s").version == 1);
  lib.save_skill("s", "result = 2", {}, "v2");
  CHECK(lib.get_skill("s").version == 2);
  CHECK(lib.get_skill("s").script == "result = 2");
  CHECK(lib.entries().size() == 1);
}

TEST_CASE("list_skills: 1-indexed, insertion order, name -- description") {
  SkillLibrary lib;
  CHECK(lib.list_skills().empty());
  lib.save_skill("process_cocktail_complete", "result = 1", {}, "Process one cocktail");
  CHECK(lib.list_skills() ==
        "Skill 1: process_cocktail_complete -- Process one cocktail");
  lib.save_skill("second", "result = 2", {}, "Another");
  lib.save_skill("third", "result = 3", {}, "Third");
  CHECK(lib.list_skills() ==
        "Skill 1: process_cocktail_complete -- Process one cocktail\n"
        "Skill 2: second -- Another\n"
        "Skill 3: third -- Third");
}

TEST_CASE("get_skill returns the stored source verbatim") {
  SkillLibrary lib;
  std::string src = "x = 1\nresult = x + 41";
  lib.save_skill("s", src, {}, "desc");
  const auto& e = lib.get_skill("s");
  CHECK(e.script == src);
  CHECK(e.version == 1);
  CHECK_THROWS_AS(lib.get_skill("nope"), LibraryError);
}

TEST_CASE("execute_skill: success path and stats") {
  SkillLibrary lib;
  lib.save_skill("adder", "result = {\"sum\": a + b, \"note\": \"ok\"}", {"a", "b"}, "");
  TableDispatcher tools;
  ExecEnv env{&tools};
  Record args;
  args.set("a", Value(1));
  args.set("b", Value(2));
  auto out = lib.execute_skill("adder", args, env);
  REQUIRE(out.success);
  CHECK(serialize(out.result) == "{\"sum\": 3, \"note\": \"ok\"}");
  CHECK(out.depth_used == 1);
  CHECK(serialize(out.to_value()) ==
        "{\"status\": \"success\", \"result\": {\"sum\": 3, \"note\": \"ok\"}}");
  CHECK(lib.get_skill("adder").success_count == 1);
  CHECK(lib.get_skill("adder").failure_count == 0);

  CHECK_THROWS_AS(lib.execute_skill("ghost", {}, env), LibraryError);
}

TEST_CASE("execute_skill: runtime failure carries inputs and trace") {
  SkillLibrary lib;
  lib.save_skill("frail", "y = 1\nresult = x.weight + 1", {"x"}, "");
  TableDispatcher tools;
  ExecEnv env{&tools};
  Record args = args1("x", *parse_json("{\"weight\": null}"));
  auto out = lib.execute_skill("frail", args, env);
  REQUIRE_FALSE(out.success);
  REQUIRE(out.issue() != nullptr);
  CHECK(out.issue()->kind == script::IssueKind::type_error);
  CHECK(out.issue()->trace[0].first == 2);
  CHECK(Value(out.issue()->inputs) == Value(args));
  // the serialized result embeds kind, message, trace and inputs
  const auto& r = out.result.as_record();
  CHECK(r.find("kind")->as_string() == "type_error");
  CHECK(r.contains("trace"));
  CHECK(serialize(*r.find("inputs")) == "{\"x\": {\"weight\": null}}");
  CHECK(lib.get_skill("frail").failure_count == 1);
}

TEST_CASE("execute_skill: quality gate rejects mostly-empty output") {
  SkillLibrary lib;
  lib.save_skill("hollow",
                 "result = {\"f1\": null, \"f2\": \"Unknown\", \"f3\": 0, \"f4\": \"x\", "
                 "\"f5\": 2}",
                 {}, "");
  TableDispatcher tools;
  ExecEnv env{&tools};
  auto out = lib.execute_skill("hollow", {}, env);
  REQUIRE_FALSE(out.success);
  REQUIRE(out.quality() != nullptr);
  CHECK(out.quality()->ratio == 0.6);
  CHECK(out.result.as_record().find("kind")->as_string() == "quality_rejected");
  CHECK(lib.get_skill("hollow").failure_count == 1);

  // 2 of 4 empty sits on the boundary and is accepted
  lib.save_skill("boundary",
                 "result = {\"f1\": null, \"f2\": 0, \"f3\": \"x\", \"f4\": 2}", {}, "");
  CHECK(lib.execute_skill("boundary", {}, env).success);
}

TEST_CASE("stats accounting: k executions move the counters by exactly k") {
  SkillLibrary lib;
  lib.save_skill("coin", "result = {\"v\": flag}", {"flag"}, "");
  TableDispatcher tools;
  ExecEnv env{&tools};
  for (int i = 0; i < 7; ++i) {
    // flag=0 fails the quality check (single empty leaf), flag=1 passes
    lib.execute_skill("coin", args1("flag", Value(i % 2)), env);
  }
  const auto& e = lib.get_skill("coin");
  CHECK(e.success_count + e.failure_count == 7);
  CHECK(e.success_count == 3);
  CHECK(e.failure_count == 4);
}

TEST_CASE("scripts cannot call skill primitives in flat mode") {
  SkillLibrary lib;
  lib.save_skill("inner", "result = 41", {}, "");
  lib.save_skill("outer",
                 "result = call_tool(\"execute_skill\", skill_name=\"inner\", args={})", {}, "");
  TableDispatcher tools;
  ExecEnv env{&tools};  // flat
  auto out = lib.execute_skill("outer", {}, env);
  REQUIRE_FALSE(out.success);
  CHECK(out.issue()->kind == script::IssueKind::unknown_tool);
  CHECK(out.issue()->message.find("no recursion") != std::string::npos);
}

TEST_CASE("hierarchical mode: nested dispatch, depth accounting, limit") {
  SkillLibrary lib;
  lib.save_skill("low", "result = {\"value\": base * 2, \"tag\": \"low\"}", {"base"}, "");
  lib.save_skill("mid",
                 "data = call_tool(\"execute_skill\", skill_name=\"low\", args={\"base\": n})\n"
                 "result = {\"doubled\": data.value, \"tag\": \"mid\"}",
                 {"n"}, "");
  lib.save_skill("high",
                 "data = call_tool(\"execute_skill\", skill_name=\"mid\", args={\"n\": seed})\n"
                 "result = {\"final\": data.doubled + 1, \"tag\": \"high\"}",
                 {"seed"}, "");
  TableDispatcher tools;
  ExecEnv env{&tools, /*hierarchical=*/true, /*nesting_limit=*/10};
  auto out = lib.execute_skill("high", args1("seed", Value(5)), env);
  REQUIRE(out.success);
  CHECK(out.result.as_record().find("final")->as_number() == 11);
  CHECK(out.depth_used == 3);

  // with limit 2 the innermost hop is rejected and the kind propagates
  ExecEnv tight{&tools, true, 2};
  auto blocked = lib.execute_skill("high", args1("seed", Value(5)), tight);
  REQUIRE_FALSE(blocked.success);
  CHECK(blocked.issue()->kind == script::IssueKind::depth_exceeded);
  CHECK(blocked.depth_used <= 2);
}

TEST_CASE("hierarchical mode: inner type errors keep their kind and frames") {
  SkillLibrary lib;
  lib.save_skill("low", "result = {\"stars\": null, \"name\": n}", {"n"}, "");
  lib.save_skill("mid",
                 "data = call_tool(\"execute_skill\", skill_name=\"low\", args={\"n\": n})\n"
                 "score = data.stars * 2\n"
                 "result = {\"score\": score}",
                 {"n"}, "");
  lib.save_skill("high",
                 "out = {}\n"
                 "for n in names {\n"
                 "    rec = call_tool(\"execute_skill\", skill_name=\"mid\", args={\"n\": n})\n"
                 "    out = set(out, n, rec)\n"
                 "}\n"
                 "result = out",
                 {"names"}, "");
  TableDispatcher tools;
  ExecEnv env{&tools, true, 10};
  auto out = lib.execute_skill("high", args1("names", Value(Value::List{Value("a")})), env);
  REQUIRE_FALSE(out.success);
  CHECK(out.issue()->kind == script::IssueKind::type_error);
  // three frames: the failing line in mid, then the call and loop lines in high
  REQUIRE(out.issue()->trace.size() == 3);
  CHECK(out.issue()->trace[0].first == 2);  // mid: score = data.stars * 2
  CHECK(out.issue()->trace[1].first == 3);  // high: rec = call_tool(...)
  CHECK(out.issue()->trace[2].first == 2);  // high: for n in names
}

TEST_CASE("persist/load: byte-stable identity round-trip") {
  auto cache = temp_path("roundtrip") / "skill_cache.json";
  {
    auto lib = SkillLibrary::open(cache);
    lib.persist();
    CHECK(slurp(cache) == "{\"skills\": {}}");
    lib.save_skill("s1", "result = a", {"a"}, "first skill");
    lib.save_skill("s2", "result = 2", {}, "second");
    TableDispatcher tools;
    ExecEnv env{&tools};
    lib.execute_skill("s1", args1("a", Value(5)), env);
  }
  std::string bytes = slurp(cache);
  auto lib2 = SkillLibrary::load(cache);
  REQUIRE(lib2.entries().size() == 2);
  CHECK(lib2.get_skill("s1").script == "result = a");
  CHECK(lib2.get_skill("s1").success_count == 1);
  CHECK(lib2.get_skill("s2").description == "second");
  lib2.persist();
  CHECK(slurp(cache) == bytes);

  // a copied cache loads identically from another location
  auto copy = temp_path("copydir") / "skill_cache.json";
  std::filesystem::create_directories(copy.parent_path());
  std::filesystem::copy_file(cache, copy);
  auto lib3 = SkillLibrary::load(copy);
  REQUIRE(lib3.entries().size() == 2);
  CHECK(lib3.get_skill("s1").success_count == 1);
}

TEST_CASE("load rejects malformed caches and names the first bad field") {
  auto cache = temp_path("badcache.json");
  std::ofstream(cache) << "{\"skills\": {\"x\": {\"script_code\": 5}}}";
  try {
    SkillLibrary::load(cache);
    FAIL("expected LibraryError");
  } catch (const LibraryError& e) {
    CHECK(e.kind == "bad_cache");
    CHECK(std::string(e.what()).find("script_code") != std::string::npos);
    CHECK(std::string(e.what()).find("badcache.json") != std::string::npos);
  }
}

TEST_CASE("locked library: no mutations of any kind") {
  auto cache = temp_path("locked") / "skill_cache.json";
  {
    auto lib = SkillLibrary::open(cache);
    lib.save_skill("s", "result = {\"v\": a}", {"a"}, "d");
  }
  auto lib = SkillLibrary::load(cache);
  lib.lock();
  std::string before = slurp(cache);

  auto save = lib.save_skill("s2", "result = 1", {}, "");
  CHECK_FALSE(save.ok);
  CHECK(save.error_kind == "locked_library");

  TableDispatcher tools;
  ExecEnv env{&tools};
  auto out = lib.execute_skill("s", args1("a", Value(9)), env);
  CHECK(out.success);  // execution is allowed in static-reuse mode
  CHECK(lib.get_skill("s").success_count == 0);  // but stats never move
  CHECK(slurp(cache) == before);
  CHECK(lib.entries().size() == 1);
}
