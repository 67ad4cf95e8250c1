#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <set>

#include "skillcraft/fabric.hpp"

using namespace skillcraft;
using namespace skillcraft::fabric;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() / ("skillcraft_fabric_" + tag);
  std::filesystem::remove_all(p);
  return p;
}

Record one_arg(const char* key, Value v) {
  Record r;
  r.set(key, std::move(v));
  return r;
}

}  // namespace

TEST_CASE("family table covers all 21 families with 5-7 data tools") {
  CHECK(families().size() == 21);
  for (const auto& fam : families()) {
    INFO(fam.id);
    CHECK(fam.tools.size() >= 5);
    CHECK(fam.tools.size() <= 7);
    CHECK(fam.entities.size() >= 10);
    CHECK(fam.tools[0].link == -1);
    for (std::size_t i = 1; i < fam.tools.size(); ++i) {
      // every downstream tool links to a string-valued profile field
      int link = fam.tools[i].link;
      REQUIRE(link >= 0);
      REQUIRE(link < static_cast<int>(fam.tools[0].fields.size()));
      auto kind = fam.tools[0].fields[static_cast<std::size_t>(link)].kind;
      CHECK(kind != FieldKind::Count);
      CHECK(kind != FieldKind::EntityList);
      CHECK(kind != FieldKind::PeopleList);
      CHECK(kind != FieldKind::WordList);
    }
    // oracle fields per tool stay in the documented 3-6 range
    for (const auto& t : fam.tools) {
      CHECK(t.fields.size() >= 3);
      CHECK(t.fields.size() <= 6);
    }
    // metric priority references real downstream count fields
    REQUIRE(fam.metric_priority.size() == 4);
    for (const auto& src : fam.metric_priority) {
      const ToolDef* td = find_tool(fam, src.tool);
      REQUIRE(td != nullptr);
      bool found = false;
      for (const auto& f : td->fields)
        if (std::string(f.name) == src.field && f.kind == FieldKind::Count) found = true;
      CHECK(found);
    }
    // and must be a permutation of the first four downstream tools, so every
    // level's required set yields a full weight vector
    std::set<std::string> prio, first4;
    for (const auto& src : fam.metric_priority) prio.insert(src.tool);
    for (std::size_t i = 1; i <= 4; ++i) first4.insert(fam.tools[i].name);
    CHECK(prio == first4);
  }
}

TEST_CASE("registry exposes the paper's tool sets") {
  auto gitlab = build_registry("gitlab-deep-analysis", 7);
  std::vector<std::string> names;
  for (const auto& s : gitlab.tool_specs()) names.push_back(s.name);
  for (const char* expect : {"get_project_info", "get_contributors", "get_commits",
                             "get_branches", "get_issues", "write_file", "claim_done"})
    CHECK(std::find(names.begin(), names.end(), expect) != names.end());

  auto cats = build_registry("cat-facts-collector", 7);
  names.clear();
  for (const auto& s : cats.tool_specs()) names.push_back(s.name);
  for (const char* expect : {"breed_profile", "breed_relatives", "breed_coat_family"})
    CHECK(std::find(names.begin(), names.end(), expect) != names.end());

  CHECK_THROWS(build_registry("no-such-family", 1));
}

TEST_CASE("data tools are deterministic and insensitive to argument order") {
  auto reg = build_registry("cat-facts-collector", 7);
  Workspace ws(temp_dir("det"));
  auto a = invoke(reg, ws, "breed_profile", one_arg("breed_name", Value("Persian")));
  auto b = invoke(reg, ws, "breed_profile", one_arg("breed_name", Value("Persian")));
  CHECK(serialize(a) == serialize(b));

  // different seed, different payloads
  auto reg2 = build_registry("cat-facts-collector", 8);
  auto c = invoke(reg2, ws, "breed_profile", one_arg("breed_name", Value("Persian")));
  CHECK(serialize(a) != serialize(c));
}

TEST_CASE("breed_profile returns the documented schema") {
  auto reg = build_registry("cat-facts-collector", 7);
  Workspace ws(temp_dir("schema"));
  auto v = invoke(reg, ws, "breed_profile", one_arg("breed_name", Value("Persian")));
  REQUIRE(v.is_record());
  const auto& r = v.as_record();
  CHECK(r.contains("origin"));
  CHECK(r.contains("temperament"));
  CHECK(r.contains("life_span"));
  CHECK(*r.find("breed") == Value("Persian"));
  CHECK(r.contains("verbose_context"));
}

TEST_CASE("edge-case entities degrade the profile tool to null oracle fields") {
  auto reg = build_registry("cat-facts-collector", 7, {"Persian"});
  Workspace ws(temp_dir("edge"));
  auto v = invoke(reg, ws, "breed_profile", one_arg("breed_name", Value("Persian")));
  const auto& r = v.as_record();
  CHECK(r.find("origin")->is_null());
  CHECK(r.find("breed")->is_null());
  // non-edge entities are unaffected
  auto ok = invoke(reg, ws, "breed_profile", one_arg("breed_name", Value("Siamese")));
  CHECK_FALSE(ok.as_record().find("origin")->is_null());
  // null chained argument degrades downstream tools too
  auto rel = invoke(reg, ws, "breed_relatives", one_arg("country", Value()));
  CHECK(rel.as_record().find("related_breeds")->is_null());
}

TEST_CASE("payload inflation: filler is at least 3x the oracle fields") {
  for (const auto& fam : families()) {
    auto reg = build_registry(fam.id, 13);
    Workspace ws(temp_dir(std::string("fill_") + fam.id));
    for (const auto& tool : fam.tools) {
      Value arg(fam.entities[0]);
      if (tool.link >= 0) {
        auto prof = oracle_fields(fam, fam.tools[0], Value(fam.entities[0]), 13, false);
        arg = *prof.find(fam.tools[0].fields[static_cast<std::size_t>(tool.link)].name);
      }
      Record args = one_arg(tool.param, arg);
      auto resp = invoke(reg, ws, tool.name, args);
      auto oracle_only = oracle_fields(fam, tool, arg, 13, false);
      auto total = serialized_size(resp);
      auto oracle_bytes = serialized_size(Value(oracle_only));
      CHECK(total - oracle_bytes >= 3 * oracle_bytes);
    }
  }
}

TEST_CASE("tool errors") {
  auto reg = build_registry("cat-facts-collector", 7);
  Workspace ws(temp_dir("errs"));
  CHECK_THROWS_AS(invoke(reg, ws, "no_such_tool", {}), ToolError);
  CHECK_THROWS_AS(invoke(reg, ws, "breed_profile", one_arg("wrong", Value("x"))), ToolError);
  CHECK_THROWS_AS(invoke(reg, ws, "breed_profile", one_arg("breed_name", Value(3.0))), ToolError);
}

TEST_CASE("workspace tools mutate the workspace") {
  auto reg = build_registry("cat-facts-collector", 7);
  Workspace ws(temp_dir("wstools"));
  Record wargs;
  wargs.set("path", Value("out.json"));
  wargs.set("content", Value("{}"));
  CHECK(invoke(reg, ws, "write_file", wargs) == Value("File written successfully."));
  CHECK(invoke(reg, ws, "read_file", one_arg("path", Value("out.json"))) == Value("{}"));
  auto listing = invoke(reg, ws, "list_directory", {});
  CHECK(serialize(listing) == "[\"out.json\"]");

  CHECK(invoke(reg, ws, "claim_done", one_arg("status", Value("done"))) ==
        Value("Completion recorded."));
  // at most once
  CHECK_THROWS_AS(invoke(reg, ws, "claim_done", one_arg("status", Value("again"))), ToolError);
  // sealed after done
  CHECK_THROWS_AS(invoke(reg, ws, "write_file", wargs), ToolError);
}

TEST_CASE("workspace rejects escaping paths") {
  Workspace ws(temp_dir("escape"));
  CHECK_THROWS_AS(ws.write_file("../evil", "x"), ToolError);
  CHECK_THROWS_AS(ws.write_file("/abs", "x"), ToolError);
  CHECK_THROWS_AS(ws.write_file("a/../b", "x"), ToolError);
  ws.write_file("sub/ok.txt", "x");  // nested paths under the root are fine
  CHECK(ws.read_file("sub/ok.txt") == "x");
}

TEST_CASE("workspace factory: disjoint roots, collision on reuse") {
  WorkspaceFactory factory(temp_dir("factory"));
  auto a = factory.make("cat-e1");
  auto b = factory.make("cat-e2");
  CHECK(a.root() != b.root());
  CHECK_THROWS(factory.make("cat-e1"));
}

TEST_CASE("workspace isolation") {
  WorkspaceFactory factory(temp_dir("iso"));
  auto a = factory.make("t1");
  auto b = factory.make("t2");
  a.write_file("f.txt", "alpha");
  CHECK(b.list_files().empty());
  CHECK_THROWS(b.read_file("f.txt"));
}

TEST_CASE("oracle consistency: invoke returns exactly the oracle's fields") {
  auto reg = build_registry("gitlab-deep-analysis", 21);
  Workspace ws(temp_dir("oracle"));
  std::vector<std::string> entities = {"gitaly", "cli"};
  std::vector<std::string> required = {"get_project_info", "get_contributors", "get_commits"};
  auto oracle = oracle_record(reg, entities, required, 'e');
  REQUIRE(oracle.is_record());
  for (const auto& entity : entities) {
    const Value* entry = oracle.as_record().find(entity);
    REQUIRE(entry != nullptr);
    // route 1: oracle; route 2: live tool calls chained like an agent would
    auto prof = invoke(reg, ws, "get_project_info", one_arg("project_path", Value(entity)));
    const Value* project_id = prof.as_record().find("project_id");
    REQUIRE(project_id != nullptr);
    auto contributors = invoke(reg, ws, "get_contributors", one_arg("project_id", *project_id));
    auto commits = invoke(reg, ws, "get_commits", one_arg("project_id", *project_id));
    for (const auto& [tool, resp] :
         std::vector<std::pair<std::string, Value>>{{"get_project_info", prof},
                                                    {"get_contributors", contributors},
                                                    {"get_commits", commits}}) {
      const Value* group = entry->as_record().find(tool);
      REQUIRE(group != nullptr);
      for (const auto& [field, expected] : group->as_record().items()) {
        INFO(entity << "/" << tool << "/" << field);
        const Value* got = resp.as_record().find(field);
        REQUIRE(got != nullptr);
        CHECK(*got == expected);
      }
    }
  }
}

TEST_CASE("oracle includes derived metrics at medium and hard levels") {
  auto reg = build_registry("gitlab-deep-analysis", 21);
  std::vector<std::string> entities = {"gitaly"};
  std::vector<std::string> required = {"get_project_info", "get_contributors", "get_commits",
                                       "get_branches", "get_issues"};
  auto oracle = oracle_record(reg, entities, required, 'h');
  const auto& entry = oracle.as_record().find("gitaly")->as_record();
  REQUIRE(entry.contains("activity_score"));
  REQUIRE(entry.contains("health_status"));

  // independently recompute: commits 40%, contributors 30%, issues 20%, branches 10%
  auto get_count = [&](const char* tool, const char* field) {
    return entry.find(tool)->as_record().find(field)->as_number();
  };
  double expect = get_count("get_commits", "commit_count") * 0.4;
  expect = expect + get_count("get_contributors", "contributor_count") * 0.3;
  expect = expect + get_count("get_issues", "open_issue_count") * 0.2;
  expect = expect + get_count("get_branches", "branch_count") * 0.1;
  CHECK(entry.find("activity_score")->as_number() == expect);
  std::string band = expect >= 70 ? "healthy" : expect >= 40 ? "moderate" : "inactive";
  CHECK(entry.find("health_status")->as_string() == band);
}

TEST_CASE("oracle on an edge entity carries null profile fields and null metrics") {
  auto reg = build_registry("gitlab-deep-analysis", 21, {"gitaly"});
  std::vector<std::string> required = {"get_project_info", "get_contributors", "get_commits",
                                       "get_branches", "get_issues"};
  auto oracle = oracle_record(reg, {"gitaly"}, required, 'h');
  const auto& entry = oracle.as_record().find("gitaly")->as_record();
  CHECK(entry.find("get_project_info")->as_record().find("stars")->is_null());
  CHECK(entry.find("get_commits")->as_record().find("commit_count")->is_null());
  CHECK(entry.find("activity_score")->is_null());
  CHECK(entry.find("health_status")->is_null());
}

TEST_CASE("oracle of an empty entity list is an empty record") {
  auto reg = build_registry("cat-facts-collector", 7);
  auto oracle = oracle_record(reg, {}, {"breed_profile"}, 'e');
  REQUIRE(oracle.is_record());
  CHECK(oracle.as_record().empty());
}
