#pragma once

#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <thread>

#include "cyberseg/exact_solver.hpp"
#include "cyberseg/instances.hpp"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace cyberseg::service {

struct StoredInstance {
  std::string id;
  std::string name;
  std::string created_at;  // ISO-8601 UTC
  Instance instance;
};

enum class JobState { kQueued, kRunning, kDone, kTimeout, kFailed };

const char* to_string(JobState state);

struct SolveParams {
  std::string algo = "direct";  // direct | greedy | oracle
  std::uint32_t k = 0;
  std::uint32_t x = 3;
  ObjectiveMode mode = ObjectiveMode::kSnpv;
  double timeout_seconds = 600.0;
  bool filter = true;
  unsigned jobs = 1;

  nlohmann::json to_json() const;
  /// Throws std::invalid_argument on unknown keys or bad values.
  static SolveParams from_json(const nlohmann::json& body);
};

struct SolveJob {
  std::string id;
  std::string instance_id;
  SolveParams params;
  JobState state = JobState::kQueued;
  nlohmann::json result;  // null until done or timeout
  std::string error;
};

/// Status code plus JSON body; errors carry {"error", "detail"}.
struct Reply {
  int status = 200;
  nlohmann::json body;
};

/// Instance store, what-if scoring and background solve jobs behind the
/// HTTP routes. Instances persist as JSON files under the data directory;
/// jobs only leave a tombstone that reads as failed after a restart.
class ApiService {
 public:
  explicit ApiService(std::filesystem::path data_dir);
  ~ApiService();

  ApiService(const ApiService&) = delete;
  ApiService& operator=(const ApiService&) = delete;

  Reply create_instance(const nlohmann::json& body);
  Reply list_instances() const;
  Reply get_instance(const std::string& id) const;
  Reply delete_instance(const std::string& id);
  Reply whatif(const std::string& id, const nlohmann::json& body) const;
  Reply submit_solve(const std::string& id, const nlohmann::json& body);
  Reply get_job(const std::string& id) const;

  /// Registers the /api routes on `server`.
  void mount(httplib::Server& server);

  /// Blocks until no job is queued or running.
  void wait_idle();

 private:
  std::shared_ptr<const StoredInstance> find_instance(const std::string& id) const;
  void persist_job(const SolveJob& job) const;
  void run_job(std::string job_id, std::shared_ptr<const StoredInstance> inst,
               std::stop_token stop);

  std::filesystem::path data_dir_;

  mutable std::shared_mutex store_mutex_;
  std::map<std::string, std::shared_ptr<const StoredInstance>> instances_;

  mutable std::mutex jobs_mutex_;
  std::condition_variable jobs_changed_;
  std::map<std::string, SolveJob> jobs_;
  std::map<std::string, std::string> active_by_key_;
  std::vector<std::jthread> workers_;
};

/// Serves until the process is interrupted.
int serve(const std::filesystem::path& data_dir, const std::string& host, int port);

}  // namespace cyberseg::service
