#pragma once

// HTTP service under /v1: problem upload, queued solve runs, run
// inspection and what-if re-solves, persisted in an append-only store.

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include "odesys/io.hpp"

namespace httplib {
class Server;
}

namespace odesys::service {

enum class RunStatus { queued, running, done, failed };

std::string to_string(RunStatus s);
RunStatus parse_run_status(const std::string& text);

struct RunRecord {
  std::string run_id;
  std::string problem_id;            ///< uploaded problem the run derives from
  std::optional<std::string> base_run;  ///< set for what-if runs
  io::Json overrides = nullptr;      ///< what-if override document
  io::Json config;                   ///< effective solver settings
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::queued;
  std::optional<std::string> result; ///< exact result document, iff done
  io::Json error = nullptr;          ///< diagnostic, iff failed
  std::string created_at;            ///< UTC, ISO 8601
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct ServiceOptions {
  std::string store_dir;   ///< empty keeps everything in memory
  std::size_t workers = 1;
};

class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Routes one request. `query` holds decoded query parameters.
  Response handle(const std::string& method, const std::string& path,
                  const std::map<std::string, std::string>& query, const std::string& body);

  /// Snapshot of a run record, if it exists.
  std::shared_ptr<const RunRecord> run(const std::string& run_id) const;
  /// Blocks until the queue is empty and no run is executing.
  void wait_idle();

  /// Installs the /v1 routes on `server`.
  void bind(httplib::Server& server);

 private:
  struct Job {
    std::string run_id;
    std::shared_ptr<const io::LoadedProblem> problem;
  };

  Response create_problem(const std::string& body);
  Response get_problem(const std::string& id) const;
  Response start_run(const std::string& body);
  Response get_run(const std::string& id, const std::map<std::string, std::string>& query) const;
  Response get_result(const std::string& id) const;
  Response whatif(const std::string& id, const std::string& body);
  Response health() const;

  Response enqueue(RunRecord record, std::shared_ptr<const io::LoadedProblem> problem);
  void worker(std::stop_token stop);
  void execute(const Job& job);
  void publish(std::shared_ptr<const RunRecord> record);
  void load_store();

  ServiceOptions options_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<const io::LoadedProblem>> problems_;
  std::map<std::string, std::shared_ptr<const io::LoadedProblem>> run_problems_;
  std::map<std::string, std::shared_ptr<const RunRecord>> runs_;

  std::mutex queue_mu_;
  std::condition_variable_any queue_cv_;
  std::condition_variable_any idle_cv_;
  std::deque<Job> queue_;
  std::size_t active_ = 0;
  std::vector<std::jthread> workers_;
};

/// Serves until the process is stopped. Returns non-zero if binding fails.
int serve(const ServiceOptions& options, const std::string& host, int port);

}  // namespace odesys::service
