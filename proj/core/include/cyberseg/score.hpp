#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cyberseg/graph.hpp"

namespace cyberseg {

struct ComponentSummary {
  std::uint64_t size = 0;
  std::uint64_t attacked_count = 0;

  friend bool operator==(const ComponentSummary&, const ComponentSummary&) = default;
};

struct Component {
  std::vector<DeviceId> devices;  // sorted
  ComponentSummary summary;
};

/// Vulnerability, healthiness and the lexicographic objective
/// phi = (base^2 + 1) * vulnerability - healthiness of one residual graph.
struct ScoreReport {
  std::uint64_t vulnerability = 0;
  std::uint64_t healthiness = 0;
  std::int64_t phi = 0;
  std::uint64_t multiplier_base = 0;

  friend bool operator==(const ScoreReport&, const ScoreReport&) = default;
};

/// Maximal connected device sets ordered by their smallest id.
std::vector<Component> components(const Graph& g, const AttackSet& a);

std::uint64_t pairs(std::uint64_t n);

/// C(attacked, 2) + attacked * (size - attacked).
std::uint64_t component_vulnerable_pairs(std::uint64_t size, std::uint64_t attacked_count);

/// Assembles a report; throws std::overflow_error if phi leaves int64.
ScoreReport make_report(std::uint64_t vulnerability, std::uint64_t healthiness,
                        std::uint64_t multiplier_base);

/// Component-formula scoring. `multiplier_base` must be at least the device
/// count of `g`; pass the original instance size when scoring residuals.
ScoreReport score(const Graph& g, const AttackSet& a, std::uint64_t multiplier_base);
ScoreReport score(const Graph& g, const AttackSet& a);

/// Pair-by-pair reference scoring through are_connected().
ScoreReport score_bruteforce(const Graph& g, const AttackSet& a, std::uint64_t multiplier_base);

/// Reusable scratch space that scores G - C without materializing G - C.
/// One instance per thread.
class ResidualScorer {
 public:
  ResidualScorer(const Graph& g, const AttackSet& a, std::uint64_t multiplier_base);

  /// `removed` holds dense device indices of `g`.
  ScoreReport score_without(std::span<const std::size_t> removed);

 private:
  const Graph* graph_;
  std::uint64_t multiplier_base_;
  std::vector<char> attacked_;
  std::vector<char> blocked_;
  std::vector<std::uint32_t> seen_;
  std::uint32_t epoch_ = 0;
  std::vector<std::size_t> stack_;
};

}  // namespace cyberseg
