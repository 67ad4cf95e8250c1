// Newline-delimited JSON protocol for external agents. One request per line:
//   {"id": <int>, "method": "<name>", "params": {...}}
// answered by
//   {"id": <int>, "ok": true, "value": ...}
//   {"id": <int>, "ok": false, "error": {"kind": ..., "detail": ...}}
// Methods: save_skill, execute_skill, list_skills, get_skill, call_tool,
// render_prompt, score_task. The macro_* spellings are accepted as aliases.
// Requests on one connection are processed in order; each connection gets an
// independent session over an independent workspace tree.
#pragma once

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <atomic>
#include <thread>

#include "skillcraft/harness.hpp"
#include "skillcraft/policies.hpp"
#include "skillcraft/suite.hpp"

namespace skillcraft::wire {

struct SessionConfig {
  std::filesystem::path root;  // session directory: skill_cache.json + task envs
  std::vector<suite::Task> tasks;
  std::uint64_t seed = 0;
  bool hierarchical = false;
  int nesting_limit = 10;
  bool locked = false;  // static-reuse sessions
};

namespace detail {

struct WireError {
  std::string kind;
  Value detail;
};

}  // namespace detail

class Session {
 public:
  explicit Session(SessionConfig config)
      : config_(std::move(config)),
        lib_(library::SkillLibrary::open(config_.root / "skill_cache.json")) {
    if (config_.locked) lib_.lock();
  }

  library::SkillLibrary& lib() { return lib_; }

  // Parses one frame and produces one response line (no trailing newline).
  std::string handle_line(const std::string& line) {
    Value id;  // null until a well-formed frame supplies one
    try {
      auto frame = parse_json(line);
      if (!frame || !frame->is_record())
        throw detail::WireError{"bad_frame", Value("request is not a JSON object")};
      const auto& req = frame->as_record();
      if (const Value* got = req.find("id")) id = *got;
      const Value* method = req.find("method");
      if (!method || !method->is_string())
        throw detail::WireError{"bad_frame", Value("missing string 'method'")};
      Record params;
      if (const Value* p = req.find("params")) {
        if (!p->is_record())
          throw detail::WireError{"bad_frame", Value("'params' must be an object")};
        params = p->as_record();
      }
      Value value = dispatch(method->as_string(), params);
      Record resp;
      resp.set("id", id);
      resp.set("ok", Value(true));
      resp.set("value", std::move(value));
      return serialize(Value(std::move(resp)));
    } catch (const detail::WireError& err) {
      return error_response(id, err.kind, err.detail);
    } catch (const std::exception& e) {
      return error_response(id, "internal_error", Value(std::string(e.what())));
    }
  }

 private:
  static std::string error_response(const Value& id, const std::string& kind,
                                    const Value& detail) {
    Record err;
    err.set("kind", Value(kind));
    err.set("detail", detail);
    Record resp;
    resp.set("id", id);
    resp.set("ok", Value(false));
    resp.set("error", Value(std::move(err)));
    return serialize(Value(std::move(resp)));
  }

  struct TaskEnv {
    fabric::Registry registry;
    fabric::Workspace workspace;
    policy::FabricDispatcher dispatcher;
    TaskEnv(fabric::Registry reg, fabric::Workspace ws)
        : registry(std::move(reg)), workspace(std::move(ws)), dispatcher(registry, workspace) {}
  };

  const suite::Task& task_for(const std::string& task_id) {
    const suite::Task* task = suite::find_task(config_.tasks, task_id);
    if (!task) throw detail::WireError{"unknown_task", Value("no task '" + task_id + "'")};
    return *task;
  }

  TaskEnv& env_for(const std::string& task_id) {
    auto it = envs_.find(task_id);
    if (it == envs_.end()) {
      const suite::Task& task = task_for(task_id);
      auto env = std::make_unique<TaskEnv>(
          fabric::build_registry(task.family, config_.seed),
          fabric::Workspace(config_.root / task_id / "workspace"));
      it = envs_.emplace(task_id, std::move(env)).first;
    }
    return *it->second;
  }

  static std::string want_string(const Record& params, const char* key) {
    const Value* v = params.find(key);
    if (!v || !v->is_string())
      throw detail::WireError{"bad_params",
                              Value(std::string("missing string param '") + key + "'")};
    return v->as_string();
  }

  Value dispatch(const std::string& method, const Record& params) {
    if (method == "save_skill" || method == "save_macro") return do_save(params);
    if (method == "execute_skill" || method == "execute_macro") return do_execute(params);
    if (method == "list_skills" || method == "list_macros") return Value(lib_.list_skills());
    if (method == "get_skill" || method == "get_macro") return do_get(params);
    if (method == "call_tool") return do_call_tool(params);
    if (method == "render_prompt") return do_render_prompt(params);
    if (method == "score_task") return do_score(params);
    throw detail::WireError{"unknown_method", Value("no method '" + method + "'")};
  }

  Value do_save(const Record& params) {
    std::string name = want_string(params, "skill_name");
    std::string source = want_string(params, "script_code");
    std::vector<std::string> parameters;
    if (const Value* ps = params.find("parameters")) {
      if (!ps->is_list())
        throw detail::WireError{"bad_params", Value("'parameters' must be a list")};
      for (const auto& p : ps->as_list()) {
        if (!p.is_string())
          throw detail::WireError{"bad_params", Value("'parameters' must hold strings")};
        parameters.push_back(p.as_string());
      }
    }
    std::string description;
    if (const Value* d = params.find("description"); d && d->is_string())
      description = d->as_string();

    auto result = lib_.save_skill(name, source, parameters, description);
    if (result.ok) return Value(result.ack);
    if (result.error_kind == "syntax") {
      const auto& issue = *result.report->syntax_detail;
      Record detail;
      detail.set("line", Value(issue.line));
      detail.set("message", Value(issue.message));
      detail.set("context", Value(issue.context_snippet));
      throw detail::WireError{"syntax", Value(std::move(detail))};
    }
    if (result.error_kind == "parameter_mismatch") {
      Value::List missing;
      for (const auto& m : result.missing_parameters) missing.push_back(Value(m));
      Record detail;
      detail.set("missing_parameters", Value(std::move(missing)));
      throw detail::WireError{"parameter_mismatch", Value(std::move(detail))};
    }
    throw detail::WireError{"locked_library", Value("library is in static-reuse mode")};
  }

  Value do_execute(const Record& params) {
    std::string name = want_string(params, "skill_name");
    Record args;
    if (const Value* a = params.find("args")) {
      if (!a->is_record()) throw detail::WireError{"bad_params", Value("'args' must be an object")};
      args = a->as_record();
    }
    if (!lib_.has(name))
      throw detail::WireError{"unknown_skill", Value("no skill named '" + name + "'")};

    script::NullDispatcher no_tools;
    script::ToolDispatcher* tools = &no_tools;
    if (const Value* t = params.find("task_id"); t && t->is_string())
      tools = &env_for(t->as_string()).dispatcher;
    auto outcome = lib_.execute_skill(
        name, args, {tools, config_.hierarchical, config_.nesting_limit});
    return outcome.to_value();
  }

  Value do_get(const Record& params) {
    std::string name = want_string(params, "skill_name");
    if (!lib_.has(name))
      throw detail::WireError{"unknown_skill", Value("no skill named '" + name + "'")};
    const auto& e = lib_.get_skill(name);
    Record r;
    r.set("script_code", Value(e.script));
    Value::List ps;
    for (const auto& p : e.parameters) ps.push_back(Value(p));
    r.set("parameters", Value(std::move(ps)));
    r.set("version", Value(e.version));
    return Value(std::move(r));
  }

  Value do_call_tool(const Record& params) {
    std::string task_id = want_string(params, "task_id");
    std::string tool = want_string(params, "tool");
    Record args;
    if (const Value* a = params.find("args")) {
      if (!a->is_record()) throw detail::WireError{"bad_params", Value("'args' must be an object")};
      args = a->as_record();
    }
    TaskEnv& env = env_for(task_id);
    try {
      return fabric::invoke(env.registry, env.workspace, tool, args);
    } catch (const fabric::ToolError& e) {
      std::string kind = e.kind == fabric::ToolError::Kind::unknown_tool ? "unknown_tool"
                                                                         : "tool_error";
      throw detail::WireError{kind, Value(std::string(e.what()))};
    }
  }

  Value do_render_prompt(const Record& params) {
    const suite::Task& task = task_for(want_string(params, "task_id"));
    return Value(suite::render_prompt(task));
  }

  Value do_score(const Record& params) {
    std::string task_id = want_string(params, "task_id");
    const suite::Task& task = task_for(task_id);
    TaskEnv& env = env_for(task_id);
    auto report = suite::score(task, env.workspace, suite::oracle(env.registry, task));
    return report.to_value();
  }

  SessionConfig config_;
  library::SkillLibrary lib_;
  std::map<std::string, std::unique_ptr<TaskEnv>> envs_;
};

// ---------------------------------------------------------------------------
// Transports

inline void serve_stream(Session& session, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out << session.handle_line(line) << "\n";
    out.flush();
  }
}

// One session per accepted connection; the session roots live under
// <root>/conn<N>/ so concurrent clients never share state.
inline void serve_connection_fd(int fd, Session& session) {
  std::string buffer;
  char chunk[4096];
  for (;;) {
    ssize_t n = ::read(fd, chunk, sizeof chunk);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (;;) {
      std::size_t nl = buffer.find('\n', start);
      if (nl == std::string::npos) break;
      std::string line = buffer.substr(start, nl - start);
      start = nl + 1;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::string response = session.handle_line(line) + "\n";
      std::size_t off = 0;
      while (off < response.size()) {
        ssize_t w = ::write(fd, response.data() + off, response.size() - off);
        if (w <= 0) return;
        off += static_cast<std::size_t>(w);
      }
    }
    buffer.erase(0, start);
  }
}

// Runs until accept fails (e.g. the socket file is removed). Returns the
// number of connections served.
inline int serve_unix_socket(const std::string& socket_path, const SessionConfig& base,
                             int max_connections = -1) {
  ::unlink(socket_path.c_str());
  int listener = ::socket(AF_UNIX, SOCK_STREAM, 0);
  if (listener < 0) throw std::runtime_error("socket() failed");
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  if (socket_path.size() >= sizeof addr.sun_path)
    throw std::runtime_error("socket path too long");
  std::copy(socket_path.begin(), socket_path.end(), addr.sun_path);
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    ::close(listener);
    throw std::runtime_error("bind() failed for " + socket_path);
  }
  if (::listen(listener, 8) != 0) {
    ::close(listener);
    throw std::runtime_error("listen() failed");
  }

  std::atomic<int> served{0};
  std::vector<std::thread> workers;
  while (max_connections < 0 || served < max_connections) {
    int fd = ::accept(listener, nullptr, nullptr);
    if (fd < 0) break;
    int n = served++;
    SessionConfig config = base;
    config.root = base.root / ("conn" + std::to_string(n));
    workers.emplace_back([fd, config = std::move(config)]() {
      Session session(config);
      serve_connection_fd(fd, session);
      ::close(fd);
    });
  }
  for (auto& w : workers) w.join();
  ::close(listener);
  return served;
}

}  // namespace skillcraft::wire
