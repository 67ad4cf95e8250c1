// skillcraft: generate the task suite, run a mode over it, compare runs,
// or serve the wire protocol for external agents.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "skillcraft/harness.hpp"
#include "skillcraft/wire.hpp"

namespace {

using namespace skillcraft;

std::vector<std::string> parse_families(const std::string& spec) {
  if (spec.empty() || spec == "all") return fabric::family_ids();
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t comma = spec.find(',', start);
    std::string id = spec.substr(start, comma == std::string::npos ? comma : comma - start);
    if (!id.empty()) out.push_back(id);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::map<std::string, std::set<std::string>> load_edge_cases(const std::string& path) {
  std::map<std::string, std::set<std::string>> edges;
  if (path.empty()) return edges;
  auto parsed = parse_json(harness::read_text_file(path));
  if (!parsed || !parsed->is_record())
    throw std::runtime_error("edge-cases file must be a JSON object of task_id -> [entities]");
  for (const auto& [task_id, list] : parsed->as_record().items()) {
    if (!list.is_list())
      throw std::runtime_error("edge-cases entry for '" + task_id + "' must be a list");
    for (const auto& name : list.as_list()) {
      if (!name.is_string())
        throw std::runtime_error("edge-cases entities must be strings");
      edges[task_id].insert(name.as_string());
    }
  }
  return edges;
}

int cmd_gen_suite(const std::string& families, std::uint64_t seed, const std::string& out) {
  auto tasks = suite::generate_suite(parse_families(families), seed);
  std::string text = suite::tasks_to_json(tasks);
  if (out.empty() || out == "-") {
    std::cout << text << "\n";
  } else {
    harness::write_text_file(out, text);
    std::cerr << "wrote " << tasks.size() << " tasks to " << out << "\n";
  }
  return 0;
}

int cmd_run(const std::string& mode, const std::string& tasks_path, std::uint64_t seed,
            const std::string& out_dir, const std::string& edge_path, int nesting_limit,
            int jobs, long long bytes_per_token, double price_in, double price_out,
            const std::string& transfer) {
  auto tasks = suite::tasks_from_json(harness::read_text_file(tasks_path));
  harness::RunConfig config;
  config.mode = mode;
  config.seed = seed;
  config.run_dir = out_dir;
  config.edge_cases = load_edge_cases(edge_path);
  config.nesting_limit = nesting_limit;
  config.jobs = jobs;
  config.tokens.bytes_per_token = bytes_per_token;
  config.tokens.price_in = price_in;
  config.tokens.price_out = price_out;
  if (transfer.size() == 3 && transfer[1] == ':') {
    config.static_source = transfer[0];
    config.static_target = transfer[2];
  } else if (!transfer.empty()) {
    throw std::runtime_error("--transfer must look like e:h (source:target level class)");
  }

  auto metrics = harness::run_suite(tasks, config);
  long long passed = 0;
  for (const auto& r : metrics.rows) passed += r.success ? 1 : 0;
  std::cerr << "mode " << mode << ": " << passed << "/" << metrics.rows.size()
            << " tasks succeeded; metrics at " << (config.run_dir / "metrics.json").string()
            << "\n";
  return 0;
}

int cmd_compare(const std::string& base_dir, const std::string& variant_dir,
                const std::string& format) {
  auto base = harness::load_metrics(base_dir);
  auto variant = harness::load_metrics(variant_dir);
  auto table = harness::compare(base, variant);
  std::string report = harness::emit_report(table, format);
  std::cout << report;
  auto out = std::filesystem::path(variant_dir) / (format == "csv" ? "report.csv" : "report.md");
  harness::write_text_file(out, report);
  std::cerr << "report written to " << out.string() << "\n";
  return 0;
}

int cmd_serve(bool use_stdio, const std::string& socket_path, const std::string& workspace,
              const std::string& tasks_path, std::uint64_t seed, bool locked, bool hier,
              int nesting_limit) {
  wire::SessionConfig config;
  config.root = workspace;
  config.seed = seed;
  config.locked = locked;
  config.hierarchical = hier;
  config.nesting_limit = nesting_limit;
  config.tasks = tasks_path.empty()
                     ? suite::generate_suite(fabric::family_ids(), seed)
                     : suite::tasks_from_json(harness::read_text_file(tasks_path));
  if (use_stdio) {
    wire::Session session(config);
    wire::serve_stream(session, std::cin, std::cout);
    return 0;
  }
  std::cerr << "listening on " << socket_path << "\n";
  wire::serve_unix_socket(socket_path, config);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SkillCraft benchmark simulator: skill library, task suite, synthetic agents"};
  app.require_subcommand(1);

  // gen-suite
  std::string families = "all";
  std::uint64_t seed = 0;
  std::string out_path;
  auto* gen = app.add_subcommand("gen-suite", "Generate the scaled task suite manifest");
  gen->add_option("--families", families, "Comma-separated family ids, or 'all'");
  gen->add_option("--seed", seed, "Entity-selection seed")->required();
  gen->add_option("--out", out_path, "Output file (tasks.json); '-' for stdout");

  // run
  std::string mode, tasks_path, run_dir, edge_path, transfer;
  int nesting_limit = 10, jobs = 1;
  long long bytes_per_token = 4;
  double price_in = 3.0, price_out = 15.0;
  auto* run = app.add_subcommand("run", "Run one mode over a task suite");
  run->add_option("--mode", mode, "base|skill|hier|direct|static")
      ->required()
      ->check(CLI::IsMember({"base", "skill", "hier", "direct", "static"}));
  run->add_option("--tasks", tasks_path, "tasks.json manifest")->required();
  run->add_option("--seed", seed, "Backend seed")->required();
  run->add_option("--out", run_dir, "Run directory")->required();
  run->add_option("--edge-cases", edge_path, "JSON file: task_id -> [entity names]");
  run->add_option("--nesting-limit", nesting_limit, "Skill nesting depth limit (default 10)");
  run->add_option("--jobs", jobs, "Parallel episodes (default 1)");
  run->add_option("--bytes-per-token", bytes_per_token, "Token model: bytes per token");
  run->add_option("--price-in", price_in, "Cost per 1M input tokens");
  run->add_option("--price-out", price_out, "Cost per 1M output tokens");
  run->add_option("--transfer", transfer,
                  "static mode source:target level classes, e.g. e:h (default)");

  // compare
  std::string base_dir, variant_dir, format = "md";
  auto* cmp = app.add_subcommand("compare", "Compare two run directories");
  cmp->add_option("--base", base_dir, "Baseline run directory")->required();
  cmp->add_option("--variant", variant_dir, "Variant run directory")->required();
  cmp->add_option("--format", format, "md|csv")->check(CLI::IsMember({"md", "csv"}));

  // serve
  bool use_stdio = false, locked = false, hier = false;
  std::string socket_path, workspace = "wire_session";
  std::string serve_tasks;
  auto* serve = app.add_subcommand("serve", "Serve the NDJSON wire protocol");
  serve->add_flag("--stdio", use_stdio, "Serve one session over stdin/stdout");
  serve->add_option("--socket", socket_path, "Unix socket path");
  serve->add_option("--workspace", workspace, "Session directory");
  serve->add_option("--tasks", serve_tasks, "tasks.json (default: generate from --seed)");
  serve->add_option("--seed", seed, "Backend seed");
  serve->add_flag("--locked", locked, "Static-reuse session: skills execute but never save");
  serve->add_flag("--hier", hier, "Allow skills to invoke skills (hierarchical dispatch)");
  serve->add_option("--nesting-limit", nesting_limit, "Skill nesting depth limit");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_suite(families, seed, out_path);
    if (run->parsed())
      return cmd_run(mode, tasks_path, seed, run_dir, edge_path, nesting_limit, jobs,
                     bytes_per_token, price_in, price_out, transfer);
    if (cmp->parsed()) return cmd_compare(base_dir, variant_dir, format);
    if (serve->parsed()) {
      if (!use_stdio && socket_path.empty()) {
        std::cerr << "serve needs --stdio or --socket PATH\n";
        return 2;
      }
      return cmd_serve(use_stdio, socket_path, workspace, serve_tasks, seed, locked, hier,
                       nesting_limit);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
