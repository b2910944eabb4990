#pragma once

#include "cyberseg/exact_solver.hpp"
#include "cyberseg/graph.hpp"
#include "cyberseg/score.hpp"
#include "json.hpp"

namespace cyberseg {

// Shared result encoding for the command line and the HTTP service.

nlohmann::json to_json(const ScoreReport& report);

/// Score plus per-component breakdown of `g` under `a`.
nlohmann::json score_breakdown_json(const Graph& g, const AttackSet& a,
                                    std::uint64_t multiplier_base);

/// `g` supplies labels for the chosen devices when it has any.
nlohmann::json to_json(const Solution& solution, const Graph& g);

}  // namespace cyberseg
