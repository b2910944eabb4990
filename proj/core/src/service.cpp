#include "cyberseg/service.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include "cyberseg/greedy_solver.hpp"
#include "cyberseg/report_json.hpp"
#include "httplib.h"

namespace cyberseg::service {

using nlohmann::json;
namespace fs = std::filesystem;

const char* to_string(JobState state) {
  switch (state) {
    case JobState::kQueued:
      return "queued";
    case JobState::kRunning:
      return "running";
    case JobState::kDone:
      return "done";
    case JobState::kTimeout:
      return "timeout";
    case JobState::kFailed:
      return "failed";
  }
  return "failed";
}

namespace {

constexpr std::size_t kOracleDeviceLimit = 16;

Reply error_reply(int status, std::string error, std::string detail) {
  return Reply{status, json{{"error", std::move(error)}, {"detail", std::move(detail)}}};
}

std::string new_id(const char* prefix) {
  static std::mutex mutex;
  static std::mt19937_64 gen{std::random_device{}()};
  std::lock_guard lock(mutex);
  std::ostringstream out;
  out << prefix << std::hex << gen();
  return out.str();
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

json summary_json(const StoredInstance& s) {
  return {{"id", s.id},
          {"name", s.name},
          {"created_at", s.created_at},
          {"devices", s.instance.graph.device_count()},
          {"connections", s.instance.graph.connection_count()},
          {"attacked", s.instance.attacked.size()}};
}

json job_json(const SolveJob& job) {
  json out{{"id", job.id},
           {"instance_id", job.instance_id},
           {"params", job.params.to_json()},
           {"state", to_string(job.state)},
           {"result", job.result}};
  if (!job.error.empty()) out["error"] = job.error;
  return out;
}

template <typename T>
T get_number(const json& body, const char* key, T fallback) {
  if (!body.contains(key)) return fallback;
  const auto& v = body[key];
  if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw std::invalid_argument(std::string(key) + " must be a number");
  } else {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw std::invalid_argument(std::string(key) + " must be a non-negative integer");
    }
  }
  return v.get<T>();
}

}  // namespace

json SolveParams::to_json() const {
  return {{"algo", algo},       {"k", k},
          {"x", x},             {"mode", cyberseg::to_string(mode)},
          {"timeout", timeout_seconds}, {"filter", filter},
          {"jobs", jobs}};
}

SolveParams SolveParams::from_json(const json& body) {
  if (!body.is_object()) throw std::invalid_argument("solve parameters must be a JSON object");
  for (const auto& [key, value] : body.items()) {
    if (key != "algo" && key != "k" && key != "x" && key != "mode" && key != "timeout" &&
        key != "filter" && key != "jobs") {
      throw std::invalid_argument("unknown solve parameter '" + key + "'");
    }
  }
  SolveParams p;
  if (body.contains("algo")) {
    if (!body["algo"].is_string()) throw std::invalid_argument("algo must be a string");
    p.algo = body["algo"].get<std::string>();
    if (p.algo != "direct" && p.algo != "greedy" && p.algo != "oracle") {
      throw std::invalid_argument("algo must be direct, greedy or oracle");
    }
  }
  if (!body.contains("k")) throw std::invalid_argument("budget k is required");
  p.k = get_number<std::uint32_t>(body, "k", 0);
  p.x = get_number<std::uint32_t>(body, "x", 3);
  if (p.x < 1) throw std::invalid_argument("x must be at least 1");
  if (body.contains("mode")) {
    auto mode = body["mode"].is_string()
                    ? parse_objective_mode(body["mode"].get<std::string>())
                    : std::nullopt;
    if (!mode) throw std::invalid_argument("mode must be snpv or cnpv");
    p.mode = *mode;
  }
  p.timeout_seconds = get_number<double>(body, "timeout", 600.0);
  if (!(p.timeout_seconds > 0)) throw std::invalid_argument("timeout must be positive");
  if (body.contains("filter")) {
    if (!body["filter"].is_boolean()) throw std::invalid_argument("filter must be a boolean");
    p.filter = body["filter"].get<bool>();
  }
  p.jobs = get_number<unsigned>(body, "jobs", 1);
  return p;
}

ApiService::ApiService(fs::path data_dir) : data_dir_(std::move(data_dir)) {
  fs::create_directories(data_dir_ / "instances");
  fs::create_directories(data_dir_ / "jobs");

  for (const auto& entry : fs::directory_iterator(data_dir_ / "instances")) {
    if (entry.path().extension() != ".json") continue;
    const auto text = read_file(entry.path());
    auto stored = std::make_shared<StoredInstance>();
    stored->instance = parse_instance_json(text);
    const auto meta = json::parse(text);
    stored->id = entry.path().stem().string();
    stored->name = meta.value("name", stored->id);
    stored->created_at = meta.value("created_at", "");
    instances_.emplace(stored->id, std::move(stored));
  }

  // Jobs never survive a restart.
  for (const auto& entry : fs::directory_iterator(data_dir_ / "jobs")) {
    if (entry.path().extension() != ".json") continue;
    try {
      const auto doc = json::parse(read_file(entry.path()));
      SolveJob job;
      job.id = doc.at("id").get<std::string>();
      job.instance_id = doc.at("instance_id").get<std::string>();
      job.params = SolveParams::from_json(doc.at("params"));
      job.state = JobState::kFailed;
      job.error = "service restarted; job results are not persisted";
      jobs_.emplace(job.id, job);
      persist_job(job);
    } catch (const std::exception&) {
      // Unreadable tombstones are skipped.
    }
  }
}

ApiService::~ApiService() {
  std::vector<std::jthread> workers;
  {
    std::lock_guard lock(jobs_mutex_);
    workers.swap(workers_);
  }
  for (auto& w : workers) w.request_stop();
}

std::shared_ptr<const StoredInstance> ApiService::find_instance(const std::string& id) const {
  std::shared_lock lock(store_mutex_);
  auto it = instances_.find(id);
  return it == instances_.end() ? nullptr : it->second;
}

Reply ApiService::create_instance(const json& body) {
  if (!body.is_object()) return error_reply(400, "bad_request", "body must be a JSON object");
  auto stored = std::make_shared<StoredInstance>();
  try {
    if (body.contains("source")) {
      const auto source = body["source"].is_string() ? body["source"].get<std::string>() : "";
      InstanceSpec spec;
      if (source == "karate") {
        spec.source = KarateSource{};
      } else if (source == "tree") {
        spec.source = TreeSource{get_number<std::uint32_t>(body, "n", 50),
                                 get_number<std::uint32_t>(body, "branching", 5)};
      } else {
        return error_reply(400, "bad_request", "source must be \"karate\" or \"tree\"");
      }
      spec.attack_fraction = get_number<double>(body, "p", 0.0);
      spec.seed = get_number<std::uint64_t>(body, "seed", 0);
      if (body.contains("rounding")) {
        auto r = body["rounding"].is_string() ? parse_rounding(body["rounding"].get<std::string>())
                                              : std::nullopt;
        if (!r) return error_reply(400, "bad_request", "rounding must be half_even, floor or ceil");
        spec.rounding = *r;
      }
      stored->instance = make_instance(spec);
      if (body.contains("attacked")) {
        std::vector<DeviceId> ids;
        for (const auto& a : body["attacked"]) {
          if (!a.is_number_integer() || a.get<std::int64_t>() < 0) {
            return error_reply(400, "bad_request", "attacked must hold device ids");
          }
          ids.push_back(a.get<DeviceId>());
        }
        stored->instance.attacked = AttackSet(std::move(ids));
        stored->instance.attacked.check_against(stored->instance.graph);
      }
      if (body.contains("budget")) stored->instance.budget = get_number<std::uint32_t>(body, "budget", 0);
      stored->name = body.value("name", source);
    } else {
      stored->instance = parse_instance_json(body.dump());
      stored->name = body.value("name", "");
    }
  } catch (const std::exception& e) {
    return error_reply(400, "invalid_instance", e.what());
  }

  stored->created_at = utc_now();
  {
    std::unique_lock lock(store_mutex_);
    do {
      stored->id = new_id("inst-");
    } while (instances_.count(stored->id));
    if (stored->name.empty()) stored->name = stored->id;
    auto doc = json::parse(to_json_text(stored->instance));
    doc["name"] = stored->name;
    doc["created_at"] = stored->created_at;
    write_file(data_dir_ / "instances" / (stored->id + ".json"), doc.dump() + "\n");
    instances_.emplace(stored->id, stored);
  }
  return Reply{201, summary_json(*stored)};
}

Reply ApiService::list_instances() const {
  std::shared_lock lock(store_mutex_);
  json out = json::array();
  for (const auto& [id, inst] : instances_) out.push_back(summary_json(*inst));
  return Reply{200, out};
}

Reply ApiService::get_instance(const std::string& id) const {
  auto inst = find_instance(id);
  if (!inst) return error_reply(404, "not_found", "no instance " + id);
  json out = summary_json(*inst);
  out["instance"] = json::parse(to_json_text(inst->instance));
  return Reply{200, out};
}

Reply ApiService::delete_instance(const std::string& id) {
  std::unique_lock lock(store_mutex_);
  auto it = instances_.find(id);
  if (it == instances_.end()) return error_reply(404, "not_found", "no instance " + id);
  fs::remove(data_dir_ / "instances" / (id + ".json"));
  instances_.erase(it);
  return Reply{200, json{{"deleted", id}}};
}

Reply ApiService::whatif(const std::string& id, const json& body) const {
  auto inst = find_instance(id);
  if (!inst) return error_reply(404, "not_found", "no instance " + id);
  if (!body.is_object() || !body.contains("isolate") || !body["isolate"].is_array()) {
    return error_reply(400, "bad_request", "body must be {\"isolate\": [device ids]}");
  }
  std::vector<DeviceId> isolate;
  for (const auto& v : body["isolate"]) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      return error_reply(400, "bad_request", "isolate must hold device ids");
    }
    isolate.push_back(v.get<DeviceId>());
  }
  std::sort(isolate.begin(), isolate.end());
  isolate.erase(std::unique(isolate.begin(), isolate.end()), isolate.end());

  const auto& g = inst->instance.graph;
  Graph residual;
  try {
    residual = remove_devices(g, isolate);
  } catch (const std::invalid_argument& e) {
    return error_reply(400, "unknown_device", e.what());
  }
  json out = score_breakdown_json(residual, inst->instance.attacked.restricted_to(residual),
                                  g.device_count());
  out["isolate"] = isolate;
  return Reply{200, out};
}

void ApiService::persist_job(const SolveJob& job) const {
  json doc{{"id", job.id},
           {"instance_id", job.instance_id},
           {"params", job.params.to_json()},
           {"state", to_string(job.state)}};
  write_file(data_dir_ / "jobs" / (job.id + ".json"), doc.dump() + "\n");
}

Reply ApiService::submit_solve(const std::string& id, const json& body) {
  auto inst = find_instance(id);
  if (!inst) return error_reply(404, "not_found", "no instance " + id);
  SolveParams params;
  try {
    params = SolveParams::from_json(body);
  } catch (const std::exception& e) {
    return error_reply(400, "bad_request", e.what());
  }
  if (params.algo == "oracle" && inst->instance.graph.device_count() > kOracleDeviceLimit) {
    return error_reply(400, "bad_request",
                       "oracle solves are limited to " + std::to_string(kOracleDeviceLimit) +
                           " devices");
  }

  const std::string key = id + "|" + params.to_json().dump();
  SolveJob job;
  {
    std::lock_guard lock(jobs_mutex_);
    if (auto it = active_by_key_.find(key); it != active_by_key_.end()) {
      return error_reply(409, "duplicate_job", it->second);
    }
    do {
      job.id = new_id("job-");
    } while (jobs_.count(job.id));
    job.instance_id = id;
    job.params = params;
    jobs_.emplace(job.id, job);
    active_by_key_.emplace(key, job.id);
    persist_job(job);
    workers_.emplace_back([this, job_id = job.id, inst](std::stop_token stop) {
      run_job(job_id, inst, stop);
    });
  }
  return Reply{202, job_json(job)};
}

void ApiService::run_job(std::string job_id, std::shared_ptr<const StoredInstance> inst,
                         std::stop_token stop) {
  SolveParams params;
  {
    std::lock_guard lock(jobs_mutex_);
    auto& job = jobs_.at(job_id);
    job.state = JobState::kRunning;
    params = job.params;
  }

  const auto& g = inst->instance.graph;
  const auto& a = inst->instance.attacked;
  JobState final_state = JobState::kFailed;
  json result;
  std::string error;
  try {
    SolveConfig config;
    config.budget_k = params.k;
    config.objective_mode = params.mode;
    config.use_degree_one_filter = params.filter;
    config.timeout = std::chrono::milliseconds(
        std::max<std::int64_t>(1, static_cast<std::int64_t>(params.timeout_seconds * 1000.0)));
    config.parallelism = params.jobs;
    config.stop = stop;

    Solution solution;
    if (params.algo == "greedy") {
      solution = solve_greedy(g, a, GreedyConfig{params.k, params.x, config});
    } else if (params.algo == "oracle") {
      solution = solve_oracle(g, a, params.k, params.mode);
    } else {
      solution = solve_direct(g, a, config);
    }
    result = to_json(solution, g);
    result["algo"] = params.algo;
    result["k"] = params.k;
    result["mode"] = cyberseg::to_string(params.mode);
    final_state = solution.status == SolveStatus::kOptimal ? JobState::kDone : JobState::kTimeout;
  } catch (const std::exception& e) {
    error = e.what();
  }

  std::lock_guard lock(jobs_mutex_);
  auto& job = jobs_.at(job_id);
  job.state = final_state;
  job.result = std::move(result);
  job.error = std::move(error);
  active_by_key_.erase(job.instance_id + "|" + job.params.to_json().dump());
  try {
    persist_job(job);
  } catch (const std::exception&) {
    // Tombstones are best effort; the in-memory job is authoritative.
  }
  jobs_changed_.notify_all();
}

Reply ApiService::get_job(const std::string& id) const {
  std::lock_guard lock(jobs_mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return error_reply(404, "not_found", "no job " + id);
  return Reply{200, job_json(it->second)};
}

void ApiService::wait_idle() {
  std::unique_lock lock(jobs_mutex_);
  jobs_changed_.wait(lock, [this] { return active_by_key_.empty(); });
}

void ApiService::mount(httplib::Server& server) {
  auto send = [](httplib::Response& res, const Reply& reply) {
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json");
  };
  auto parse_body = [](const httplib::Request& req, json& out) {
    try {
      out = req.body.empty() ? json::object() : json::parse(req.body);
      return true;
    } catch (const json::parse_error&) {
      return false;
    }
  };
  auto bad_json = error_reply(400, "bad_request", "request body is not valid JSON");

  server.Post("/api/instances", [=, this](const httplib::Request& req, httplib::Response& res) {
    json body;
    send(res, parse_body(req, body) ? create_instance(body) : bad_json);
  });
  server.Get("/api/instances", [=, this](const httplib::Request&, httplib::Response& res) {
    send(res, list_instances());
  });
  server.Get(R"(/api/instances/([^/]+))",
             [=, this](const httplib::Request& req, httplib::Response& res) {
               send(res, get_instance(req.matches[1]));
             });
  server.Delete(R"(/api/instances/([^/]+))",
                [=, this](const httplib::Request& req, httplib::Response& res) {
                  send(res, delete_instance(req.matches[1]));
                });
  server.Post(R"(/api/instances/([^/]+)/whatif)",
              [=, this](const httplib::Request& req, httplib::Response& res) {
                json body;
                send(res, parse_body(req, body) ? whatif(req.matches[1], body) : bad_json);
              });
  server.Post(R"(/api/instances/([^/]+)/solve)",
              [=, this](const httplib::Request& req, httplib::Response& res) {
                json body;
                send(res, parse_body(req, body) ? submit_solve(req.matches[1], body) : bad_json);
              });
  server.Get(R"(/api/jobs/([^/]+))", [=, this](const httplib::Request& req, httplib::Response& res) {
    send(res, get_job(req.matches[1]));
  });
}

int serve(const fs::path& data_dir, const std::string& host, int port) {
  ApiService api(data_dir);
  httplib::Server server;
  api.mount(server);
  if (!server.listen(host, port)) return 1;
  return 0;
}

}  // namespace cyberseg::service
