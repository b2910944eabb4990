// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cyberseg/exact_solver.hpp"
#include "cyberseg/greedy_solver.hpp"
#include "cyberseg/ilp.hpp"
#include "cyberseg/instances.hpp"
#include "cyberseg/score.hpp"
#include "support/random_instances.hpp"

namespace {

using namespace cyberseg;
using Clock = std::chrono::steady_clock;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool condition, const std::string& what) {
    if (!condition && ok) detail << "first failure: " << what << "; ";
    ok = ok && condition;
  }
};

struct Criterion {
  std::string name;
  std::chrono::milliseconds limit;
  std::function<void(Check&)> body;
};

// Connected 288-device stand-in: a path with a few chords.
Graph surrogate_288() {
  std::vector<Connection> connections;
  for (DeviceId v = 1; v < 288; ++v) connections.emplace_back(v - 1, v);
  for (DeviceId v = 0; v + 17 < 288; v += 17) connections.emplace_back(v, v + 17);
  return Graph::with_ids(288, std::move(connections));
}

void dataset_baselines(Check& c) {
  struct Row {
    const char* dataset;
    double p;
    std::uint64_t vul;
    std::uint64_t heal;
  };
  const std::vector<Row> rows{
      {"karate", 0.1, 96, 465},     {"karate", 0.25, 236, 325},    {"karate", 0.5, 425, 136},
      {"synthetic", 0.1, 235, 990}, {"synthetic", 0.25, 522, 703}, {"synthetic", 0.5, 925, 300},
      {"sfowl", 0.1, 7917, 33411},  {"sfowl", 0.25, 18108, 23220}, {"sfowl", 0.5, 31032, 10296},
  };
  const Graph karate = load_karate();
  const Graph tree = generate_full_ary_tree(50, 5);
  const Graph sfowl = surrogate_288();
  for (const auto& row : rows) {
    const std::string ds = row.dataset;
    const Graph& g = ds == "karate" ? karate : ds == "synthetic" ? tree : sfowl;
    c.expect(components(g, AttackSet{}).size() == 1, ds + " graph is connected");
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      auto a = sample_attacked(g, row.p, seed);
      auto r = score(g, a);
      std::ostringstream what;
      what << ds << " p=" << row.p << " seed " << seed << " gave (" << r.vulnerability << ", "
           << r.healthiness << ")";
      c.expect(r.vulnerability == row.vul && r.healthiness == row.heal, what.str());
    }
  }
  c.detail << "9 rows x 3 attack samples";
}

void nine_device_count(Check& c) {
  // Any connected 9-device graph with 3 attacked devices.
  const Graph path = testing::path_graph(9);
  const auto r = score(path, AttackSet({1, 4, 6}));
  c.expect(r.vulnerability == 21, "path scores 21");
  const Graph star = Graph::with_ids(9, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {0, 6}, {0, 7}, {0, 8}});
  c.expect(score(star, AttackSet({0, 7, 8})).vulnerability == 21, "star scores 21");
  c.detail << "vulnerable pairs " << r.vulnerability;
}

std::vector<testing::RandomInstance> oracle_suite() {
  std::mt19937_64 gen(20230901);
  std::vector<testing::RandomInstance> suite;
  for (int i = 0; i < 1000; ++i) suite.push_back(testing::random_instance(gen, 9, 4, 3));
  return suite;
}

void oracle_equivalence(Check& c) {
  std::size_t count = 0;
  for (const auto& inst : oracle_suite()) {
    SolveConfig cfg;
    cfg.budget_k = inst.k;
    const auto direct = solve_direct(inst.graph, inst.attacked, cfg);
    const auto oracle = solve_oracle(inst.graph, inst.attacked, inst.k, ObjectiveMode::kSnpv);
    const auto cnpv = solve_oracle(inst.graph, inst.attacked, inst.k, ObjectiveMode::kCnpv);
    c.expect(direct.report.phi == oracle.report.phi,
             "direct phi equals oracle phi on instance " + std::to_string(count));
    c.expect(direct.report.vulnerability == cnpv.report.vulnerability,
             "snpv vulnerability equals cnpv optimum on instance " + std::to_string(count));
    ++count;
  }
  c.detail << count << " instances";
}

void kernel_equivalence(Check& c) {
  std::mt19937_64 gen(77);
  std::size_t count = 0;
  for (int i = 0; i < 1000; ++i) {
    auto inst = testing::random_instance(gen, 10, 10, 0);
    const auto base = inst.graph.device_count();
    c.expect(score(inst.graph, inst.attacked, base) == score_bruteforce(inst.graph, inst.attacked, base),
             "kernel equals brute force on graph " + std::to_string(i));
    ++count;
  }
  c.detail << count << " graphs";
}

void greedy_properties(Check& c) {
  std::size_t count = 0;
  for (const auto& inst : oracle_suite()) {
    SolveConfig direct_cfg;
    direct_cfg.budget_k = inst.k;
    const auto direct = solve_direct(inst.graph, inst.attacked, direct_cfg);
    for (std::uint32_t x = 1; x <= 4; ++x) {
      GreedyConfig cfg;
      cfg.budget_k = inst.k;
      cfg.chunk_x = x;
      const auto greedy = solve_greedy(inst.graph, inst.attacked, cfg);
      c.expect(greedy.report.phi >= direct.report.phi,
               "greedy never beats exact on instance " + std::to_string(count));
      if (x >= inst.k) {
        c.expect(greedy.chosen == direct.chosen && greedy.report == direct.report &&
                     greedy.subsets_evaluated == direct.subsets_evaluated,
                 "greedy with x >= k is identical on instance " + std::to_string(count));
      }
    }
    ++count;
  }

  Graph path = testing::path_graph(40);
  std::vector<DeviceId> attacked;
  for (DeviceId v = 0; v < 40; v += 2) attacked.push_back(v);
  GreedyConfig cfg;
  cfg.budget_k = 10;
  cfg.chunk_x = 3;
  const auto traced = solve_greedy_traced(path, AttackSet(attacked), cfg);
  c.expect(traced.chunk_budgets == std::vector<std::uint32_t>{3, 3, 3, 1}, "trace is 3,3,3,1");
  c.detail << count << " instances, trace";
  for (auto b : traced.chunk_budgets) c.detail << ' ' << b;
}

void ilp_certification(Check& c) {
  std::mt19937_64 gen(31);
  std::size_t count = 0;
  for (int i = 0; i < 250; ++i) {
    auto inst = testing::random_instance(gen, 8, 4, 3);
    const std::uint64_t n = inst.graph.device_count();
    const std::uint64_t m = inst.graph.connection_count();
    SolveConfig cfg;
    cfg.budget_k = inst.k;
    const auto s = solve_direct(inst.graph, inst.attacked, cfg);
    for (auto kind : {ilp::ObjectiveKind::kLexicographic, ilp::ObjectiveKind::kVulnerabilityOnly}) {
      const auto model = ilp::build_model(inst.graph, inst.attacked, inst.k, kind);
      const std::uint64_t triples = n < 3 ? 0 : n * (n - 1) * (n - 2) / 6;
      c.expect(model.rows().size() == 1 + 2 * m + 3 * triples + n * (n - 1),
               "row count formula on instance " + std::to_string(i));
      c.expect(model.variables().size() == n + n * (n - 1) / 2,
               "variable count formula on instance " + std::to_string(i));
      const auto report = ilp::validate_assignment(
          model, ilp::assignment_from_cut(model, inst.graph, s.chosen), inst.graph, inst.attacked);
      c.expect(report.violated_constraints.empty(), "no violations on instance " + std::to_string(i));
      c.expect(report.objective_gap == 0, "zero gap on instance " + std::to_string(i));
    }
    ++count;
  }
  c.detail << count << " instances, both objectives";
}

void karate_isolation(Check& c) {
  const Graph karate = load_karate();
  std::size_t connected_sets = 0;
  std::size_t other_sets = 0;
  for (std::uint64_t seed = 0; connected_sets < 20 && seed < 500; ++seed) {
    const auto a = sample_attacked(karate, 0.1, seed);
    c.expect(a.size() == 3, "three attacked devices");
    SolveConfig cfg;
    cfg.budget_k = 3;
    cfg.parallelism = 0;
    const auto s = solve_direct(karate, a, cfg);
    const std::string tag = " (seed " + std::to_string(seed) + ")";
    c.expect(s.status == SolveStatus::kOptimal, "optimal" + tag);
    c.expect(s.report.vulnerability == 0, "vulnerability 0" + tag);

    const Graph naive = remove_devices(karate, a.ids());
    const auto baseline = score(naive, AttackSet{}, 34);
    c.expect(s.report.healthiness >= baseline.healthiness, "at least the naive C = A" + tag);
    // 465 = C(31, 2) needs every healthy device kept in one component.
    if (components(naive, AttackSet{}).size() == 1) {
      c.expect(s.report.healthiness == 465, "healthiness 465" + tag);
      ++connected_sets;
    } else {
      c.expect(s.report.healthiness < 465, "healthiness below 465 when G - A splits" + tag);
      ++other_sets;
    }
  }
  c.expect(connected_sets >= 20, "found 20 attack sets");
  c.detail << connected_sets << " sets reach (0, 465); " << other_sets
           << " sets where G - A splits reach vul 0 above the naive baseline";
}

void timeout_behaviour(Check& c) {
  InstanceSpec spec;
  spec.source = TreeSource{60, 2};
  spec.attack_fraction = 0.5;
  spec.seed = 4;
  const auto inst = make_instance(spec);
  SolveConfig cfg;
  cfg.budget_k = 6;
  cfg.timeout = std::chrono::seconds(1);
  const auto start = Clock::now();
  const auto s = solve_direct(inst.graph, inst.attacked, cfg);
  const auto wall = std::chrono::duration<double>(Clock::now() - start).count();
  c.expect(s.status == SolveStatus::kTimeoutBestEffort, "status timeout_best_effort");
  c.expect(wall < 2.0, "returned within 2 s");
  c.expect(s.chosen.size() <= 6, "best-effort cut within budget");
  c.detail << "returned after " << wall << " s with " << s.subsets_evaluated << " subsets";
}

}  // namespace

int main() {
  using std::chrono::milliseconds;
  const std::vector<Criterion> criteria{
      {"dataset_baselines", milliseconds(1000), dataset_baselines},
      {"nine_device_vulnerable_count", milliseconds(1), nine_device_count},
      {"oracle_equivalence", milliseconds(60000), oracle_equivalence},
      {"scoring_kernel_equivalence", milliseconds(10000), kernel_equivalence},
      {"greedy_properties", milliseconds(60000), greedy_properties},
      {"ilp_certification", milliseconds(30000), ilp_certification},
      {"karate_isolation_property", milliseconds(120000), karate_isolation},
      {"timeout_behaviour", milliseconds(2000), timeout_behaviour},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    Check check;
    const auto start = Clock::now();
    try {
      criterion.body(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const auto elapsed = std::chrono::duration<double, std::milli>(Clock::now() - start);
    if (elapsed > criterion.limit) {
      check.expect(false, "runtime over " + std::to_string(criterion.limit.count()) + " ms");
    }
    failures += !check.ok;
    std::printf("%s %s (%.3f ms) %s\n", check.ok ? "PASS" : "FAIL", criterion.name.c_str(),
                elapsed.count(), check.detail.str().c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
