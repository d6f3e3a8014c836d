#include "odesys/service.hpp"

#include <httplib.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <regex>

#include "odesys/app.hpp"

namespace odesys::service {

namespace fs = std::filesystem;
using io::Json;

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::queued:
      return "queued";
    case RunStatus::running:
      return "running";
    case RunStatus::done:
      return "done";
    case RunStatus::failed:
      return "failed";
  }
  return "failed";
}

RunStatus parse_run_status(const std::string& text) {
  if (text == "queued") return RunStatus::queued;
  if (text == "running") return RunStatus::running;
  if (text == "done") return RunStatus::done;
  if (text == "failed") return RunStatus::failed;
  throw ValidationError("unknown run status '" + text + "'");
}

namespace {

constexpr std::size_t kDefaultTracePage = 50;
constexpr std::size_t kMaxTracePage = 1000;

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Response json_response(int status, const Json& body) { return {status, body.dump(2) + "\n"}; }

Response error_response(int status, const std::string& code, int exit, const std::string& message,
                        Json extra = Json::object()) {
  Json err = {{"code", code}, {"exit_code", exit}, {"message", message}};
  for (auto it = extra.begin(); it != extra.end(); ++it) err[it.key()] = *it;
  return json_response(status, {{"error", std::move(err)}});
}

Response error_response(int status, const std::exception& e) {
  return json_response(status, {{"error", app::error_json(e)}});
}

Response not_found(const std::string& what) {
  return error_response(404, "not_found", app::kExitInput, what + " not found");
}

std::string short_hash(const std::string& text) { return io::sha256_hex(text).substr(0, 16); }

Json record_header(const RunRecord& r) {
  Json j = {{"run_id", r.run_id},
            {"problem_id", r.problem_id},
            {"seed", r.seed},
            {"config", r.config},
            {"status", to_string(r.status)},
            {"created_at", r.created_at}};
  if (r.base_run) {
    j["base_run"] = *r.base_run;
    j["overrides"] = r.overrides;
  }
  return j;
}

// Append-only files under the store directory.
void append_line(const fs::path& path, const Json& event) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw Error("cannot append to '" + path.string() + "'");
  out << event.dump() << '\n';
}

void write_once(const fs::path& path, const std::string& content) {
  if (fs::exists(path)) return;
  const fs::path tmp = path.string() + ".tmp";
  io::write_file(tmp.string(), content);
  fs::rename(tmp, path);
}

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  if (options_.workers == 0) options_.workers = 1;
  if (!options_.store_dir.empty()) {
    fs::create_directories(fs::path(options_.store_dir) / "problems");
    fs::create_directories(fs::path(options_.store_dir) / "runs");
    load_store();
  }
  for (std::size_t i = 0; i < options_.workers; ++i) {
    workers_.emplace_back([this](std::stop_token st) { worker(st); });
  }
}

Service::~Service() {
  for (auto& w : workers_) w.request_stop();
  queue_cv_.notify_all();
  workers_.clear();
}

std::shared_ptr<const RunRecord> Service::run(const std::string& run_id) const {
  std::shared_lock lock(mu_);
  auto it = runs_.find(run_id);
  return it == runs_.end() ? nullptr : it->second;
}

void Service::wait_idle() {
  std::unique_lock lock(queue_mu_);
  idle_cv_.wait(lock, [&] { return queue_.empty() && active_ == 0; });
}

Response Service::handle(const std::string& method, const std::string& path,
                         const std::map<std::string, std::string>& query, const std::string& body) {
  static const std::regex problem_re(R"(^/v1/problems/([0-9a-f]{16})$)");
  static const std::regex run_re(R"(^/v1/runs/([0-9a-f]{16})$)");
  static const std::regex result_re(R"(^/v1/runs/([0-9a-f]{16})/result$)");
  static const std::regex whatif_re(R"(^/v1/runs/([0-9a-f]{16})/whatif$)");
  std::smatch m;
  try {
    auto method_not_allowed = [&] {
      return error_response(405, "method_not_allowed", app::kExitInput, method + " " + path);
    };
    if (path == "/v1/health") return method == "GET" ? health() : method_not_allowed();
    if (path == "/v1/problems") return method == "POST" ? create_problem(body) : method_not_allowed();
    if (path == "/v1/runs") return method == "POST" ? start_run(body) : method_not_allowed();
    if (std::regex_match(path, m, problem_re)) {
      return method == "GET" ? get_problem(m[1]) : method_not_allowed();
    }
    if (std::regex_match(path, m, run_re)) {
      return method == "GET" ? get_run(m[1], query) : method_not_allowed();
    }
    if (std::regex_match(path, m, result_re)) {
      return method == "GET" ? get_result(m[1]) : method_not_allowed();
    }
    if (std::regex_match(path, m, whatif_re)) {
      return method == "POST" ? whatif(m[1], body) : method_not_allowed();
    }
    return not_found("route " + path);
  } catch (const std::exception& e) {
    return error_response(500, "internal_error", app::kExitFailure, e.what());
  }
}

Response Service::health() const {
  std::size_t queued = 0;
  {
    std::shared_lock lock(mu_);
    for (const auto& [id, r] : runs_) queued += r->status == RunStatus::queued;
  }
  return json_response(200, {{"status", "ok"},
                             {"api", "v1"},
                             {"problem_kinds", io::registered_kinds()},
                             {"workers", options_.workers},
                             {"queued", queued}});
}

Response Service::create_problem(const std::string& body) {
  std::shared_ptr<const io::LoadedProblem> loaded;
  try {
    loaded = std::make_shared<const io::LoadedProblem>(io::load(body, "body"));
  } catch (const io::InputError& e) {
    return error_response(422, e);
  } catch (const Error& e) {
    return error_response(422, e);
  }
  const std::string id = io::problem_id(loaded->file);
  bool created = false;
  {
    std::unique_lock lock(mu_);
    if (!problems_.count(id)) {
      if (!options_.store_dir.empty()) {
        write_once(fs::path(options_.store_dir) / "problems" / (id + ".json"),
                   io::serialize_problem(loaded->file));
      }
      problems_[id] = loaded;
      created = true;
    }
  }
  return json_response(created ? 201 : 200, {{"problem_id", id}, {"problem_kind", loaded->file.kind}});
}

Response Service::get_problem(const std::string& id) const {
  std::shared_ptr<const io::LoadedProblem> p;
  {
    std::shared_lock lock(mu_);
    auto it = problems_.find(id);
    if (it == problems_.end()) return not_found("problem " + id);
    p = it->second;
  }
  return {200, io::serialize_problem(p->file)};
}

Response Service::start_run(const std::string& body) {
  std::string problem;
  std::optional<std::uint64_t> seed;
  const Json* config = nullptr;
  Json doc;
  try {
    doc = io::parse_json(body, "body");
    if (!doc.is_object()) throw io::InputError("body", "", 0, 0, "expected an object");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (it.key() != "problem_id" && it.key() != "seed" && it.key() != "config") {
        throw io::InputError("body", "/" + it.key(), 0, 0, "unknown field '" + it.key() + "'");
      }
    }
    if (!doc.contains("problem_id") || !doc["problem_id"].is_string()) {
      throw io::InputError("body", "/problem_id", 0, 0, "problem_id must be a string");
    }
    problem = doc["problem_id"].get<std::string>();
    if (doc.contains("seed")) {
      if (!doc["seed"].is_number_unsigned()) {
        throw io::InputError("body", "/seed", 0, 0, "expected a non-negative integer seed");
      }
      seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("config")) config = &doc["config"];
  } catch (const io::InputError& e) {
    return error_response(422, e);
  }

  std::shared_ptr<const io::LoadedProblem> base;
  {
    std::shared_lock lock(mu_);
    auto it = problems_.find(problem);
    if (it == problems_.end()) return not_found("problem " + problem);
    base = it->second;
  }
  std::shared_ptr<const io::LoadedProblem> effective;
  try {
    effective = std::make_shared<const io::LoadedProblem>(app::with_run_settings(*base, seed, config));
  } catch (const io::InputError& e) {
    try {
      io::rethrow_located(e, body, "body");
    } catch (const io::InputError& located) {
      return error_response(422, located);
    }
  }
  RunRecord r;
  r.run_id = short_hash("run\n" + io::problem_to_json(effective->file).dump());
  r.problem_id = problem;
  r.config = io::config_to_json(effective->file.solver);
  r.seed = effective->file.seed;
  return enqueue(std::move(r), std::move(effective));
}

Response Service::whatif(const std::string& id, const std::string& body) {
  std::shared_ptr<const RunRecord> base;
  std::shared_ptr<const io::LoadedProblem> base_problem;
  {
    std::shared_lock lock(mu_);
    auto it = runs_.find(id);
    if (it == runs_.end()) return not_found("run " + id);
    base = it->second;
    base_problem = run_problems_.at(id);
  }
  if (base->status != RunStatus::done) {
    return error_response(409, "conflict", app::kExitInput,
                          "base run is " + to_string(base->status) + ", not done",
                          {{"run_id", id}, {"status", to_string(base->status)}});
  }
  io::Override o;
  std::shared_ptr<const io::LoadedProblem> alt;
  try {
    o = io::parse_override(body, "body");
  } catch (const io::InputError& e) {
    return error_response(422, e);
  }
  try {
    alt = std::make_shared<const io::LoadedProblem>(app::apply_whatif(*base_problem, o));
  } catch (const io::InputError& e) {
    return error_response(422, io::InputError("body", "", 0, 0,
                                              "override yields an invalid problem: " + e.message() +
                                                  (e.pointer().empty() ? "" : " (at " + e.pointer() + ")")));
  } catch (const Error& e) {
    return error_response(422, e);
  }
  RunRecord r;
  r.run_id = short_hash("whatif\n" + id + "\n" + io::override_to_json(o).dump());
  r.problem_id = base->problem_id;
  r.base_run = id;
  r.overrides = io::override_to_json(o);
  r.config = io::config_to_json(alt->file.solver);
  r.seed = alt->file.seed;
  return enqueue(std::move(r), std::move(alt));
}

Response Service::enqueue(RunRecord record, std::shared_ptr<const io::LoadedProblem> problem) {
  const std::string id = record.run_id;
  {
    std::unique_lock lock(mu_);
    if (auto it = runs_.find(id); it != runs_.end()) {
      const auto status = it->second->status;
      const Json info = {{"run_id", id}, {"status", to_string(status)}};
      if (status == RunStatus::done || status == RunStatus::failed) {
        return error_response(409, "conflict", app::kExitInput, "identical run already exists", info);
      }
      return json_response(202, info);
    }
    record.status = RunStatus::queued;
    record.created_at = utc_now();
    if (!options_.store_dir.empty()) {
      const auto dir = fs::path(options_.store_dir) / "runs";
      write_once(dir / (id + ".problem.json"), io::serialize_problem(problem->file));
      Json created = record_header(record);
      created["event"] = "created";
      append_line(dir / (id + ".jsonl"), created);
    }
    runs_[id] = std::make_shared<const RunRecord>(record);
    run_problems_[id] = problem;
  }
  {
    std::lock_guard lock(queue_mu_);
    queue_.push_back({id, std::move(problem)});
  }
  queue_cv_.notify_one();
  return json_response(202, {{"run_id", id}, {"status", "queued"}});
}

void Service::publish(std::shared_ptr<const RunRecord> record) {
  if (!options_.store_dir.empty()) {
    const auto dir = fs::path(options_.store_dir) / "runs";
    if (record->result) write_once(dir / (record->run_id + ".result.json"), *record->result);
    Json event = {{"event", "status"}, {"status", to_string(record->status)}};
    if (record->status == RunStatus::failed) event["error"] = record->error;
    append_line(dir / (record->run_id + ".jsonl"), event);
  }
  std::unique_lock lock(mu_);
  runs_[record->run_id] = std::move(record);
}

void Service::worker(std::stop_token stop) {
  while (true) {
    Job job;
    {
      std::unique_lock lock(queue_mu_);
      if (!queue_cv_.wait(lock, stop, [&] { return !queue_.empty(); })) return;
      job = std::move(queue_.front());
      queue_.pop_front();
      ++active_;
    }
    execute(job);
    {
      std::lock_guard lock(queue_mu_);
      --active_;
    }
    idle_cv_.notify_all();
  }
}

void Service::execute(const Job& job) {
  auto current = run(job.run_id);
  auto running = std::make_shared<RunRecord>(*current);
  running->status = RunStatus::running;
  publish(running);

  auto finished = std::make_shared<RunRecord>(*running);
  try {
    finished->result = app::run_solve(*job.problem).document;
    finished->status = RunStatus::done;
  } catch (const std::exception& e) {
    finished->status = RunStatus::failed;
    finished->error = app::error_json(e);
  }
  publish(finished);
}

Response Service::get_run(const std::string& id, const std::map<std::string, std::string>& query) const {
  const auto rec = run(id);
  if (!rec) return not_found("run " + id);
  std::size_t offset = 0;
  std::size_t limit = kDefaultTracePage;
  try {
    if (auto it = query.find("offset"); it != query.end()) offset = std::stoul(it->second);
    if (auto it = query.find("limit"); it != query.end()) limit = std::stoul(it->second);
  } catch (const std::exception&) {
    return error_response(422, "invalid_input", app::kExitInput, "offset and limit must be integers");
  }
  limit = std::min(limit, kMaxTracePage);

  Json j = record_header(*rec);
  if (rec->status == RunStatus::failed) j["error"] = rec->error;
  if (rec->result) {
    Json result = Json::parse(*rec->result);
    const Json trace = result["trace"];
    result.erase("trace");
    Json rows = Json::array();
    for (std::size_t i = offset; i < trace.size() && i < offset + limit; ++i) rows.push_back(trace[i]);
    j["result"] = std::move(result);
    j["trace"] = {{"offset", offset}, {"limit", limit}, {"total", trace.size()}, {"rows", std::move(rows)}};
  }
  return json_response(200, j);
}

Response Service::get_result(const std::string& id) const {
  const auto rec = run(id);
  if (!rec) return not_found("run " + id);
  if (!rec->result) {
    return error_response(409, "conflict", app::kExitInput, "run is " + to_string(rec->status),
                          {{"run_id", id}, {"status", to_string(rec->status)}});
  }
  return {200, *rec->result};
}

void Service::load_store() {
  const fs::path root(options_.store_dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(root / "problems")) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    if (p.extension() != ".json") continue;
    auto loaded = std::make_shared<const io::LoadedProblem>(io::load(io::read_file(p.string()), p.string()));
    problems_[p.stem().string()] = std::move(loaded);
  }

  files.clear();
  for (const auto& entry : fs::directory_iterator(root / "runs")) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<std::pair<RunRecord, std::shared_ptr<const io::LoadedProblem>>> pending;
  for (const auto& p : files) {
    if (p.extension() != ".jsonl") continue;
    const std::string id = p.stem().string();
    RunRecord r;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const Json ev = Json::parse(line);
      if (ev.at("event") == "created") {
        r.run_id = ev.at("run_id");
        r.problem_id = ev.at("problem_id");
        r.seed = ev.at("seed");
        r.config = ev.at("config");
        r.created_at = ev.at("created_at");
        if (ev.contains("base_run")) {
          r.base_run = ev.at("base_run").get<std::string>();
          r.overrides = ev.at("overrides");
        }
      } else {
        r.status = parse_run_status(ev.at("status"));
        if (ev.contains("error")) r.error = ev.at("error");
      }
    }
    const auto problem_path = root / "runs" / (id + ".problem.json");
    auto problem = std::make_shared<const io::LoadedProblem>(
        io::load(io::read_file(problem_path.string()), problem_path.string()));
    if (r.status == RunStatus::done) {
      r.result = io::read_file((root / "runs" / (id + ".result.json")).string());
    }
    run_problems_[id] = problem;
    if (r.status == RunStatus::queued || r.status == RunStatus::running) {
      r.status = RunStatus::queued;
      pending.emplace_back(r, problem);
    }
    runs_[id] = std::make_shared<const RunRecord>(std::move(r));
  }
  std::sort(pending.begin(), pending.end(),
            [](const auto& a, const auto& b) { return a.first.created_at < b.first.created_at; });
  for (auto& [r, problem] : pending) queue_.push_back({r.run_id, problem});
}

void Service::bind(httplib::Server& server) {
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    const Response r = handle(req.method, req.path, query, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get(R"(/v1/.*)", route);
  server.Post(R"(/v1/.*)", route);
  server.Put(R"(/v1/.*)", route);
  server.Delete(R"(/v1/.*)", route);
}

int serve(const ServiceOptions& options, const std::string& host, int port) {
  Service service(options);
  httplib::Server server;
  service.bind(server);
  if (!server.bind_to_port(host, port)) return 1;
  return server.listen_after_bind() ? 0 : 1;
}

}  // namespace odesys::service
