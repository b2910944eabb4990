#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stop_token>
#include <string_view>
#include <vector>

#include "cyberseg/graph.hpp"
#include "cyberseg/score.hpp"

namespace cyberseg {

enum class ObjectiveMode {
  kSnpv,  // lexicographic phi
  kCnpv,  // vulnerability only
};

enum class SolveStatus { kOptimal, kTimeoutBestEffort };

const char* to_string(ObjectiveMode mode);
const char* to_string(SolveStatus status);
std::optional<ObjectiveMode> parse_objective_mode(std::string_view text);

struct SolveConfig {
  std::uint32_t budget_k = 0;
  ObjectiveMode objective_mode = ObjectiveMode::kSnpv;
  bool use_degree_one_filter = true;
  std::chrono::milliseconds timeout{std::chrono::seconds(600)};
  unsigned parallelism = 1;
  /// Overrides the multiplier base; defaults to the graph's device count.
  std::optional<std::uint64_t> multiplier_base;
  /// Cancellation behaves like an early timeout.
  std::stop_token stop;

  void validate() const;
};

struct Solution {
  std::vector<DeviceId> chosen;  // sorted
  ScoreReport report;
  SolveStatus status = SolveStatus::kOptimal;
  std::uint64_t subsets_evaluated = 0;
  std::chrono::nanoseconds elapsed{0};
};

/// Value minimized under `mode`: phi, or plain vulnerability.
std::int64_t objective_value(const ScoreReport& report, ObjectiveMode mode);

/// Strict total order used to pick among candidates: objective value, then
/// cut size, then lexicographic sorted ids.
bool better_candidate(std::int64_t objective, std::span<const DeviceId> ids,
                      std::int64_t incumbent_objective, std::span<const DeviceId> incumbent_ids);

/// Non-attacked devices of degree one; some optimal cut avoids all of them.
std::vector<DeviceId> excludable_devices(const Graph& g, const AttackSet& a);

/// Sum of C(n, i) for i = 0..k, saturating at UINT64_MAX.
std::uint64_t candidate_count(std::uint64_t n, std::uint64_t k);

/// Lazily yields every subset of `eligible` with at most `k` elements:
/// by size, then lexicographically on sorted ids.
class CandidateEnumerator {
 public:
  CandidateEnumerator(std::vector<DeviceId> eligible, std::uint32_t k);

  /// Returns false once exhausted; otherwise `out` holds the next subset.
  bool next(std::vector<DeviceId>& out);

 private:
  std::vector<DeviceId> eligible_;
  std::uint32_t max_size_;
  std::uint32_t size_ = 0;
  std::vector<std::size_t> positions_;
  bool started_ = false;
  bool done_ = false;
};

/// Exhaustive search over cuts of size at most k, optionally skipping the
/// excludable devices. Honors the configured timeout; on expiry the best cut
/// seen so far is returned with status kTimeoutBestEffort.
Solution solve_direct(const Graph& g, const AttackSet& a, const SolveConfig& config);

/// Reference brute force over all subsets of V of size at most k, scored
/// with score_bruteforce on materialized residual graphs. For tiny inputs.
Solution solve_oracle(const Graph& g, const AttackSet& a, std::uint32_t k, ObjectiveMode mode);

}  // namespace cyberseg
