#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <map>

#include "skillcraft/suite.hpp"

using namespace skillcraft;
using namespace skillcraft::suite;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() / ("skillcraft_suite_" + tag);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("suite shape: 126 tasks, 63/42/21, six per family") {
  auto tasks = generate_suite(fabric::family_ids(), 7);
  CHECK(tasks.size() == 126);
  std::map<char, int> by_class;
  std::map<std::string, int> by_family;
  for (const auto& t : tasks) {
    by_class[t.level_class()]++;
    by_family[t.family]++;
  }
  CHECK(by_class['e'] == 63);
  CHECK(by_class['m'] == 42);
  CHECK(by_class['h'] == 21);
  for (const auto& [fam, count] : by_family) CHECK(count == 6);
}

TEST_CASE("one family yields e1,e2,e3,m1,m2,h1 with the 3/4/5 scaling") {
  auto tasks = generate_suite({"cocktail-menu-generator"}, 3);
  REQUIRE(tasks.size() == 6);
  std::vector<std::string> levels;
  for (const auto& t : tasks) levels.push_back(t.level);
  CHECK(levels == std::vector<std::string>{"e1", "e2", "e3", "m1", "m2", "h1"});
  for (const auto& t : tasks) {
    int n = t.level_class() == 'e' ? 3 : t.level_class() == 'm' ? 4 : 5;
    CHECK(t.entity_count == n);
    CHECK(t.complexity == n);
    CHECK(static_cast<int>(t.entities.size()) == n);
    CHECK(static_cast<int>(t.required_tools.size()) == n);
    CHECK(t.output_file == "cocktail_menu.json");
    CHECK(t.id == "cocktail-menu-generator/" + t.level);
  }
  // easy triples are pairwise disjoint
  std::set<std::string> seen;
  for (int i = 0; i < 3; ++i)
    for (const auto& e : tasks[static_cast<std::size_t>(i)].entities)
      CHECK(seen.insert(e).second);
  CHECK_THROWS(generate_suite({"nope"}, 3));
}

TEST_CASE("suite generation is deterministic in the seed") {
  auto a = tasks_to_json(generate_suite(fabric::family_ids(), 11));
  auto b = tasks_to_json(generate_suite(fabric::family_ids(), 11));
  auto c = tasks_to_json(generate_suite(fabric::family_ids(), 12));
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("tasks.json round-trips") {
  auto tasks = generate_suite(fabric::family_ids(), 7);
  auto text = tasks_to_json(tasks);
  auto back = tasks_from_json(text);
  REQUIRE(back.size() == tasks.size());
  CHECK(tasks_to_json(back) == text);
  CHECK(back[0].entity_count == tasks[0].entity_count);
  CHECK_THROWS(tasks_from_json("{\"nope\": 1}"));
}

TEST_CASE("prompt: names entities, endpoints, output file; never the primitives") {
  auto tasks = generate_suite(fabric::family_ids(), 7);
  const Task* h1 = find_task(tasks, "gitlab-deep-analysis/h1");
  REQUIRE(h1 != nullptr);
  auto p = render_prompt(*h1);
  CHECK(p.find("5 repositories") != std::string::npos);
  for (const auto& e : h1->entities) CHECK(p.find(e) != std::string::npos);
  CHECK(p.find("get_project_info") != std::string::npos);
  CHECK(p.find("get_issues") != std::string::npos);
  CHECK(p.find("gitlab_analysis_results.json") != std::string::npos);
  // the h1 weights from the activity-score formula
  CHECK(p.find("commit_count from get_commits (40%)") != std::string::npos);
  CHECK(p.find("contributor_count from get_contributors (30%)") != std::string::npos);
  CHECK(p.find("open_issue_count from get_issues (20%)") != std::string::npos);
  CHECK(p.find("branch_count from get_branches (10%)") != std::string::npos);
  CHECK(p.find("healthy") != std::string::npos);
  CHECK(p.find("25 total calls") != std::string::npos);

  const Task* e1 = find_task(tasks, "cat-facts-collector/e1");
  auto pe = render_prompt(*e1);
  CHECK(pe.find("3 cat breeds") != std::string::npos);
  CHECK(pe.find("cat_encyclopedia.json") != std::string::npos);
  CHECK(pe.find("9 total calls") != std::string::npos);
  // easy tasks have no derived metric
  CHECK(pe.find("popularity_score") == std::string::npos);

  for (const auto& t : tasks) {
    auto prompt = render_prompt(t);
    CHECK(prompt.find("save_skill") == std::string::npos);
    CHECK(prompt.find("execute_skill") == std::string::npos);
  }
  // rendering is deterministic
  CHECK(render_prompt(*h1) == p);
}

TEST_CASE("cross-task summary injection") {
  library::SkillLibrary lib;
  std::string prompt = "Do the task.";
  auto empty = inject_cross_summary(prompt, lib);
  CHECK(empty.substr(0, prompt.size()) == prompt);
  CHECK(empty.find("No skills available.") != std::string::npos);

  lib.save_skill("process_cocktail_complete", "result = name", {"name"}, "One cocktail");
  auto& entry = const_cast<library::SkillEntry&>(lib.get_skill("process_cocktail_complete"));
  entry.success_count = 5;
  auto one = inject_cross_summary(prompt, lib);
  CHECK(one.find("process_cocktail_complete(name)") != std::string::npos);
  CHECK(one.find("[5 successes, 0 failures]") != std::string::npos);

  lib.save_skill("another", "result = 1", {}, "Second one");
  auto two = inject_cross_summary(prompt, lib);
  CHECK(two.find("Skill 1: process_cocktail_complete") != std::string::npos);
  CHECK(two.find("Skill 2: another") != std::string::npos);
}

TEST_CASE("score: perfect output earns 100") {
  auto tasks = generate_suite({"cat-facts-collector"}, 7);
  const Task* e1 = find_task(tasks, "cat-facts-collector/e1");
  auto reg = fabric::build_registry(e1->family, 7);
  auto expected = oracle(reg, *e1);
  fabric::Workspace ws(temp_dir("perfect"));
  ws.write_file(e1->output_file, serialize(expected));
  auto report = score(*e1, ws, expected);
  CHECK(report.total == 100.0);
  CHECK(report.success);
}

TEST_CASE("score: missing output file scores zero") {
  auto tasks = generate_suite({"cat-facts-collector"}, 7);
  const Task* e1 = find_task(tasks, "cat-facts-collector/e1");
  auto reg = fabric::build_registry(e1->family, 7);
  fabric::Workspace ws(temp_dir("missing"));
  auto report = score(*e1, ws, oracle(reg, *e1));
  CHECK(report.total == 0.0);
  CHECK_FALSE(report.success);
}

TEST_CASE("score: invalid JSON earns only the existence point") {
  auto tasks = generate_suite({"cat-facts-collector"}, 7);
  const Task* e1 = find_task(tasks, "cat-facts-collector/e1");
  auto reg = fabric::build_registry(e1->family, 7);
  fabric::Workspace ws(temp_dir("badjson"));
  ws.write_file(e1->output_file, "{not json");
  auto report = score(*e1, ws, oracle(reg, *e1));
  CHECK(report.total == 10.0);
}

TEST_CASE("score: dropping one of five entities sinks a hard task to 84") {
  auto tasks = generate_suite({"gitlab-deep-analysis"}, 7);
  const Task* h1 = find_task(tasks, "gitlab-deep-analysis/h1");
  auto reg = fabric::build_registry(h1->family, 7);
  auto expected = oracle(reg, *h1);

  // oracle leaves split evenly per entity, so removing one leaves 4/5
  Value partial = expected;
  partial.as_record().items().pop_back();
  REQUIRE(partial.as_record().size() == 4);

  fabric::Workspace ws(temp_dir("partial"));
  ws.write_file(h1->output_file, serialize(partial));
  auto report = score(*h1, ws, expected);
  CHECK(report.per_criterion[0].earned == 10.0);
  CHECK(report.per_criterion[1].earned == 10.0);
  CHECK(report.per_criterion[2].earned == 24.0);
  CHECK(report.per_criterion[3].earned == 40.0);
  CHECK(report.total == 84.0);
  CHECK_FALSE(report.success);
}

TEST_CASE("score monotonicity: adding a correct entity never lowers a criterion") {
  auto tasks = generate_suite({"dog-breeds-encyclopedia"}, 7);
  const Task* e1 = find_task(tasks, "dog-breeds-encyclopedia/e1");
  auto reg = fabric::build_registry(e1->family, 7);
  auto expected = oracle(reg, *e1);

  Value partial(Record{});
  fabric::Workspace ws1(temp_dir("mono1"));
  ws1.write_file(e1->output_file, serialize(partial));
  auto before = score(*e1, ws1, expected);

  partial.as_record().set(expected.as_record().items()[0].first,
                          expected.as_record().items()[0].second);
  fabric::Workspace ws2(temp_dir("mono2"));
  ws2.write_file(e1->output_file, serialize(partial));
  auto after = score(*e1, ws2, expected);

  for (std::size_t i = 0; i < before.per_criterion.size(); ++i)
    CHECK(after.per_criterion[i].earned >= before.per_criterion[i].earned);
}

TEST_CASE("score: number tolerance absorbs serialization jitter only") {
  Task t;
  t.id = "x/e1";
  t.family = "cat-facts-collector";
  t.level = "e1";
  t.entity_count = 1;
  t.entities = {"A"};
  t.output_file = "o.json";
  Value expected = *parse_json("{\"A\": {\"g\": {\"v\": 1.5}}}");
  fabric::Workspace ws(temp_dir("tol"));
  ws.write_file("o.json", "{\"A\": {\"g\": {\"v\": 1.5000000001}}}");
  auto near = score(t, ws, expected);
  CHECK(near.per_criterion[3].earned == 50.0);

  fabric::Workspace ws2(temp_dir("tol2"));
  ws2.write_file("o.json", "{\"A\": {\"g\": {\"v\": 1.51}}}");
  auto far = score(t, ws2, expected);
  CHECK(far.per_criterion[3].earned == 0.0);
}
