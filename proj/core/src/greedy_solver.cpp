#include "cyberseg/greedy_solver.hpp"

#include <algorithm>
#include <stdexcept>

namespace cyberseg {

void GreedyConfig::validate() const {
  if (chunk_x < 1) throw std::invalid_argument("chunk size x must be at least 1");
  inner.validate();
}

GreedySolution solve_greedy_traced(const Graph& g, const AttackSet& a, const GreedyConfig& config) {
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  const auto deadline = started + config.inner.timeout;
  config.validate();
  a.check_against(g);

  const std::uint64_t base = config.inner.multiplier_base.value_or(g.device_count());
  GreedySolution out;
  Solution& total = out.solution;
  Graph residual = g;
  std::uint32_t remaining = config.budget_k;

  auto run_chunk = [&](std::uint32_t budget) {
    SolveConfig sub = config.inner;
    sub.budget_k = budget;
    sub.multiplier_base = base;
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    sub.timeout = std::max(left, std::chrono::milliseconds(1));
    out.chunk_budgets.push_back(budget);

    Solution step = solve_direct(residual, a.restricted_to(residual), sub);
    total.subsets_evaluated += step.subsets_evaluated;
    if (step.status == SolveStatus::kTimeoutBestEffort) total.status = step.status;
    total.chosen.insert(total.chosen.end(), step.chosen.begin(), step.chosen.end());
    total.report = step.report;
    residual = remove_devices(residual, step.chosen);
    return step;
  };

  total.report = score(g, a, base);
  bool stopped = false;
  while (config.chunk_x < remaining) {
    Solution step = run_chunk(config.chunk_x);
    remaining -= config.chunk_x;
    if (total.status == SolveStatus::kTimeoutBestEffort ||
        (step.chosen.empty() && step.report.vulnerability == 0)) {
      stopped = true;
      break;
    }
  }
  if (!stopped) run_chunk(remaining);

  std::sort(total.chosen.begin(), total.chosen.end());
  total.elapsed = Clock::now() - started;
  return out;
}

Solution solve_greedy(const Graph& g, const AttackSet& a, const GreedyConfig& config) {
  return solve_greedy_traced(g, a, config).solution;
}

}  // namespace cyberseg
