#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "cli.hpp"
#include "cyberseg/instances.hpp"
#include "cyberseg/service.hpp"
#include "httplib.h"
#include "json.hpp"

namespace cyberseg::service {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace std::chrono_literals;

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cyberseg_service_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static json wait_for_job(ApiService& api, const std::string& id) {
    for (int i = 0; i < 1000; ++i) {
      auto r = api.get_job(id);
      const auto state = r.body["state"].get<std::string>();
      if (state != "queued" && state != "running") return r.body;
      std::this_thread::sleep_for(10ms);
    }
    return {};
  }

  static json karate_body() {
    return json{{"source", "karate"}, {"attacked", {0, 16, 33}}, {"name", "club"}};
  }

  fs::path dir_;
};

TEST_F(ServiceTest, CreateAndFetch) {
  ApiService api(dir_);
  auto created = api.create_instance(
      json::parse(R"({"devices":[0,1,2],"connections":[[0,1],[1,2]],"attacked":[1],"name":"line"})"));
  ASSERT_EQ(created.status, 201) << created.body.dump();
  const auto id = created.body["id"].get<std::string>();
  EXPECT_EQ(created.body["devices"], 3);
  EXPECT_EQ(created.body["name"], "line");

  auto fetched = api.get_instance(id);
  EXPECT_EQ(fetched.status, 200);
  EXPECT_EQ(fetched.body["instance"]["attacked"], json::array({1}));
  EXPECT_EQ(api.list_instances().body.size(), 1u);
  EXPECT_TRUE(fs::exists(dir_ / "instances" / (id + ".json")));

  EXPECT_EQ(api.delete_instance(id).status, 200);
  EXPECT_EQ(api.get_instance(id).status, 404);
  EXPECT_EQ(api.delete_instance(id).status, 404);
}

TEST_F(ServiceTest, CreateRejectsInvalidInstances) {
  ApiService api(dir_);
  auto dangling = api.create_instance(
      json::parse(R"({"devices":[0,1],"connections":[[0,5]],"attacked":[]})"));
  EXPECT_EQ(dangling.status, 400);
  EXPECT_TRUE(dangling.body.contains("error"));
  EXPECT_TRUE(dangling.body.contains("detail"));
  EXPECT_EQ(api.create_instance(json::array()).status, 400);
  EXPECT_EQ(api.create_instance(json{{"source", "moon"}}).status, 400);
  EXPECT_EQ(api.create_instance(json{{"source", "karate"}, {"attacked", {99}}}).status, 400);
  EXPECT_TRUE(api.list_instances().body.empty());
}

TEST_F(ServiceTest, KarateShortcut) {
  ApiService api(dir_);
  auto created = api.create_instance(json{{"source", "karate"}, {"p", 0.1}, {"seed", 3}});
  ASSERT_EQ(created.status, 201);
  EXPECT_EQ(created.body["devices"], 34);
  EXPECT_EQ(created.body["connections"], 78);
  EXPECT_EQ(created.body["attacked"], 3);
  auto tree = api.create_instance(json{{"source", "tree"}, {"n", 50}, {"branching", 5}, {"p", 0.25}});
  EXPECT_EQ(tree.body["attacked"], 12);
}

TEST_F(ServiceTest, WhatIf) {
  ApiService api(dir_);
  const auto id = api.create_instance(karate_body()).body["id"].get<std::string>();

  auto baseline = api.whatif(id, json{{"isolate", json::array()}});
  ASSERT_EQ(baseline.status, 200);
  EXPECT_EQ(baseline.body["vulnerability"], 96);
  EXPECT_EQ(baseline.body["healthiness"], 465);
  EXPECT_EQ(baseline.body["multiplier_base"], 34);

  auto isolated = api.whatif(id, json{{"isolate", {33, 0, 16}}});
  EXPECT_EQ(isolated.body["vulnerability"], 0);
  EXPECT_EQ(isolated.body["multiplier_base"], 34);

  json all = json::array();
  for (int i = 0; i < 34; ++i) all.push_back(i);
  auto everything = api.whatif(id, json{{"isolate", all}});
  EXPECT_EQ(everything.body["vulnerability"], 0);
  EXPECT_EQ(everything.body["healthiness"], 0);

  EXPECT_EQ(api.whatif("nope", json{{"isolate", json::array()}}).status, 404);
  EXPECT_EQ(api.whatif(id, json{{"isolate", {99}}}).status, 400);
  EXPECT_EQ(api.whatif(id, json{{"isolate", "0"}}).status, 400);
}

TEST_F(ServiceTest, WhatIfMatchesCliScore) {
  ApiService api(dir_);
  const auto id = api.create_instance(karate_body()).body["id"].get<std::string>();
  const auto path = dir_ / "karate.json";
  std::ofstream(path) << to_json_text(Instance{load_karate(), AttackSet({0, 16, 33}), std::nullopt});

  for (const auto& cut : {std::vector<int>{}, std::vector<int>{0}, std::vector<int>{2, 8, 31, 32}}) {
    std::string list;
    for (int v : cut) list += (list.empty() ? "" : ",") + std::to_string(v);
    std::istringstream in;
    std::ostringstream out;
    std::ostringstream err;
    ASSERT_EQ(cli::run({"score", "--instance", path.string(), "--isolate", list}, in, out, err), 0);
    EXPECT_EQ(api.whatif(id, json{{"isolate", cut}}).body, json::parse(out.str()));
  }
}

TEST_F(ServiceTest, ConcurrentWhatIfAgree) {
  ApiService api(dir_);
  const auto id = api.create_instance(karate_body()).body["id"].get<std::string>();
  const json body{{"isolate", {2, 31}}};
  const auto expected = api.whatif(id, body).body;
  std::vector<std::future<json>> futures;
  for (int i = 0; i < 16; ++i) {
    futures.push_back(std::async(std::launch::async, [&] { return api.whatif(id, body).body; }));
  }
  for (auto& f : futures) EXPECT_EQ(f.get(), expected);
}

TEST_F(ServiceTest, SolveJobs) {
  ApiService api(dir_);
  const auto id = api.create_instance(karate_body()).body["id"].get<std::string>();

  auto zero = api.submit_solve(id, json{{"k", 0}});
  ASSERT_EQ(zero.status, 202);
  auto done = wait_for_job(api, zero.body["id"]);
  EXPECT_EQ(done["state"], "done");
  EXPECT_EQ(done["result"]["chosen"], json::array());

  auto direct = wait_for_job(api, api.submit_solve(id, json{{"k", 2}}).body["id"]);
  auto greedy = wait_for_job(
      api, api.submit_solve(id, json{{"k", 2}, {"algo", "greedy"}, {"x", 2}}).body["id"]);
  EXPECT_EQ(direct["state"], "done");
  EXPECT_EQ(greedy["result"]["chosen"], direct["result"]["chosen"]);
  EXPECT_EQ(greedy["result"]["phi"], direct["result"]["phi"]);
  EXPECT_EQ(greedy["result"]["healthiness"], direct["result"]["healthiness"]);

  EXPECT_EQ(api.submit_solve("nope", json{{"k", 1}}).status, 404);
  EXPECT_EQ(api.submit_solve(id, json{{"k", 1}, {"colour", "red"}}).status, 400);
  EXPECT_EQ(api.submit_solve(id, json::object()).status, 400);
  EXPECT_EQ(api.submit_solve(id, json{{"k", 1}, {"algo", "oracle"}}).status, 400);
  EXPECT_EQ(api.get_job("nope").status, 404);
}

TEST_F(ServiceTest, OversizedSolveTimesOutAndDuplicatesConflict) {
  ApiService api(dir_);
  const auto id =
      api.create_instance(json{{"source", "tree"}, {"n", 60}, {"branching", 2}, {"p", 0.5}, {"seed", 4}})
          .body["id"]
          .get<std::string>();
  const json params{{"k", 6}, {"timeout", 1.0}};
  auto first = api.submit_solve(id, params);
  ASSERT_EQ(first.status, 202);
  auto dup = api.submit_solve(id, params);
  EXPECT_EQ(dup.status, 409);
  EXPECT_EQ(dup.body["error"], "duplicate_job");

  const auto start = std::chrono::steady_clock::now();
  auto finished = wait_for_job(api, first.body["id"]);
  EXPECT_LT(std::chrono::steady_clock::now() - start, 5s);
  EXPECT_EQ(finished["state"], "timeout");
  EXPECT_EQ(finished["result"]["status"], "timeout_best_effort");
  EXPECT_LE(finished["result"]["chosen"].size(), 6u);

  // The key is free again once the first job finished.
  auto again = api.submit_solve(id, json{{"k", 6}, {"timeout", 0.05}});
  EXPECT_EQ(again.status, 202);
  api.wait_idle();
}

TEST_F(ServiceTest, RestartKeepsInstancesAndFailsJobs) {
  std::string inst_id;
  std::string job_id;
  {
    ApiService api(dir_);
    inst_id = api.create_instance(karate_body()).body["id"].get<std::string>();
    job_id = api.submit_solve(inst_id, json{{"k", 1}}).body["id"].get<std::string>();
    api.wait_idle();
  }
  ApiService api(dir_);
  auto inst = api.get_instance(inst_id);
  ASSERT_EQ(inst.status, 200);
  EXPECT_EQ(inst.body["name"], "club");
  EXPECT_EQ(inst.body["instance"]["attacked"], json::array({0, 16, 33}));
  auto job = api.get_job(job_id);
  ASSERT_EQ(job.status, 200);
  EXPECT_EQ(job.body["state"], "failed");
  EXPECT_TRUE(job.body["result"].is_null());
}

TEST_F(ServiceTest, HttpRoutes) {
  ApiService api(dir_);
  httplib::Server server;
  api.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto created = client.Post("/api/instances", karate_body().dump(), "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  const auto id = json::parse(created->body)["id"].get<std::string>();

  auto listed = client.Get("/api/instances");
  ASSERT_TRUE(listed);
  EXPECT_EQ(json::parse(listed->body).size(), 1u);

  auto whatif = client.Post("/api/instances/" + id + "/whatif", R"({"isolate":[0,16,33]})",
                            "application/json");
  ASSERT_TRUE(whatif);
  EXPECT_EQ(whatif->status, 200);
  EXPECT_EQ(json::parse(whatif->body)["vulnerability"], 0);

  auto bad = client.Post("/api/instances/" + id + "/whatif", "{not json", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_TRUE(json::parse(bad->body).contains("detail"));

  auto solve = client.Post("/api/instances/" + id + "/solve", R"({"k":1})", "application/json");
  ASSERT_TRUE(solve);
  EXPECT_EQ(solve->status, 202);
  const auto job_id = json::parse(solve->body)["id"].get<std::string>();
  api.wait_idle();
  auto job = client.Get("/api/jobs/" + job_id);
  ASSERT_TRUE(job);
  EXPECT_EQ(json::parse(job->body)["state"], "done");

  EXPECT_EQ(client.Get("/api/instances/missing")->status, 404);
  EXPECT_EQ(client.Get("/api/jobs/missing")->status, 404);
  auto removed = client.Delete("/api/instances/" + id);
  ASSERT_TRUE(removed);
  EXPECT_EQ(removed->status, 200);

  server.stop();
  listener.join();
}

}  // namespace
}  // namespace cyberseg::service
