#pragma once

#include <cstdint>
#include <vector>

#include "cyberseg/exact_solver.hpp"

namespace cyberseg {

struct GreedyConfig {
  std::uint32_t budget_k = 0;
  std::uint32_t chunk_x = 3;
  /// Template for the exact subcalls; its budget is overwritten per chunk.
  SolveConfig inner;

  void validate() const;
};

struct GreedySolution {
  Solution solution;
  /// Budget handed to each exact subcall, in order.
  std::vector<std::uint32_t> chunk_budgets;
};

/// Repeatedly removes the best cut of size at most `chunk_x` while the
/// remaining budget exceeds it, then spends the rest in one final call.
/// The returned report is scored on the original instance size. Stops early
/// once vulnerability is zero and a chunk chose nothing.
GreedySolution solve_greedy_traced(const Graph& g, const AttackSet& a, const GreedyConfig& config);

Solution solve_greedy(const Graph& g, const AttackSet& a, const GreedyConfig& config);

}  // namespace cyberseg
