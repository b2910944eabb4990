#include "cyberseg/exact_solver.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace cyberseg {

const char* to_string(ObjectiveMode mode) {
  return mode == ObjectiveMode::kSnpv ? "snpv" : "cnpv";
}

const char* to_string(SolveStatus status) {
  return status == SolveStatus::kOptimal ? "optimal" : "timeout_best_effort";
}

std::optional<ObjectiveMode> parse_objective_mode(std::string_view text) {
  if (text == "snpv") return ObjectiveMode::kSnpv;
  if (text == "cnpv") return ObjectiveMode::kCnpv;
  return std::nullopt;
}

void SolveConfig::validate() const {
  if (timeout.count() <= 0) throw std::invalid_argument("timeout must be positive");
}

std::int64_t objective_value(const ScoreReport& report, ObjectiveMode mode) {
  return mode == ObjectiveMode::kSnpv ? report.phi
                                      : static_cast<std::int64_t>(report.vulnerability);
}

bool better_candidate(std::int64_t objective, std::span<const DeviceId> ids,
                      std::int64_t incumbent_objective, std::span<const DeviceId> incumbent_ids) {
  if (objective != incumbent_objective) return objective < incumbent_objective;
  if (ids.size() != incumbent_ids.size()) return ids.size() < incumbent_ids.size();
  return std::lexicographical_compare(ids.begin(), ids.end(), incumbent_ids.begin(),
                                      incumbent_ids.end());
}

std::vector<DeviceId> excludable_devices(const Graph& g, const AttackSet& a) {
  a.check_against(g);
  std::vector<DeviceId> out;
  for (std::size_t i = 0; i < g.device_count(); ++i) {
    if (g.neighbor_indices(i).size() == 1 && !a.contains(g.id_at(i))) out.push_back(g.id_at(i));
  }
  return out;
}

std::uint64_t candidate_count(std::uint64_t n, std::uint64_t k) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  unsigned __int128 term = 1;
  unsigned __int128 total = 0;
  for (std::uint64_t i = 0; i <= std::min(n, k); ++i) {
    if (i > 0) term = term * (n - i + 1) / i;
    total += term;
    if (total > kMax) return kMax;
  }
  return static_cast<std::uint64_t>(total);
}

CandidateEnumerator::CandidateEnumerator(std::vector<DeviceId> eligible, std::uint32_t k)
    : eligible_(std::move(eligible)),
      max_size_(static_cast<std::uint32_t>(std::min<std::size_t>(k, eligible_.size()))) {
  std::sort(eligible_.begin(), eligible_.end());
  eligible_.erase(std::unique(eligible_.begin(), eligible_.end()), eligible_.end());
  max_size_ = static_cast<std::uint32_t>(std::min<std::size_t>(k, eligible_.size()));
}

bool CandidateEnumerator::next(std::vector<DeviceId>& out) {
  if (done_) return false;
  if (!started_) {
    started_ = true;
  } else {
    const auto m = eligible_.size();
    // Advance to the next combination of the current size, or grow.
    std::size_t i = size_;
    while (i > 0 && positions_[i - 1] == m - size_ + i - 1) --i;
    if (i == 0) {
      if (size_ == max_size_) {
        done_ = true;
        return false;
      }
      ++size_;
      positions_.resize(size_);
      for (std::size_t j = 0; j < size_; ++j) positions_[j] = j;
    } else {
      ++positions_[i - 1];
      for (std::size_t j = i; j < size_; ++j) positions_[j] = positions_[j - 1] + 1;
    }
  }
  out.clear();
  for (auto p : positions_) out.push_back(eligible_[p]);
  return true;
}

namespace {

using Clock = std::chrono::steady_clock;

// A block fixes the cut size and up to two leading positions; blocks are
// the unit of work handed to threads.
struct Block {
  std::uint32_t size = 0;
  std::uint32_t prefix_len = 0;
  std::size_t prefix[2] = {0, 0};
};

std::vector<Block> make_blocks(std::size_t m, std::uint32_t k) {
  std::vector<Block> blocks;
  blocks.push_back(Block{});
  for (std::uint32_t s = 1; s <= k && s <= m; ++s) {
    if (s == 1) {
      blocks.push_back(Block{1, 0, {0, 0}});
      continue;
    }
    for (std::size_t a = 0; a + s <= m; ++a) {
      for (std::size_t b = a + 1; b + s - 1 <= m; ++b) blocks.push_back(Block{s, 2, {a, b}});
    }
  }
  return blocks;
}

struct Incumbent {
  bool valid = false;
  std::int64_t objective = 0;
  std::vector<DeviceId> ids;
  ScoreReport report;

  void offer(std::int64_t obj, std::span<const DeviceId> cut, const ScoreReport& r) {
    if (valid && !better_candidate(obj, cut, objective, ids)) return;
    valid = true;
    objective = obj;
    ids.assign(cut.begin(), cut.end());
    report = r;
  }
};

class DirectSearch {
 public:
  DirectSearch(const Graph& g, const AttackSet& a, const SolveConfig& config,
               std::vector<std::size_t> eligible)
      : graph_(g),
        attack_(a),
        config_(config),
        base_(config.multiplier_base.value_or(g.device_count())),
        eligible_(std::move(eligible)),
        blocks_(make_blocks(eligible_.size(), config.budget_k)),
        deadline_(Clock::now() + config.timeout) {}

  Solution run() {
    unsigned workers = config_.parallelism == 0 ? std::thread::hardware_concurrency()
                                                : config_.parallelism;
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(blocks_.size())));
    if (workers == 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned i = 0; i < workers; ++i) pool.emplace_back([this] { work(); });
    }

    Solution s;
    s.chosen = best_.ids;
    s.report = best_.report;
    s.subsets_evaluated = evaluated_.load();
    s.status = finished_blocks_.load() == blocks_.size() ? SolveStatus::kOptimal
                                                         : SolveStatus::kTimeoutBestEffort;
    return s;
  }

 private:
  void work() {
    ResidualScorer scorer(graph_, attack_, base_);
    Incumbent local;
    std::vector<std::size_t> pos;
    std::vector<std::size_t> removed;
    std::vector<DeviceId> ids;
    std::uint64_t count = 0;

    auto evaluate = [&]() {
      removed.clear();
      ids.clear();
      for (auto p : pos) {
        removed.push_back(eligible_[p]);
        ids.push_back(graph_.id_at(eligible_[p]));
      }
      auto report = scorer.score_without(removed);
      local.offer(objective_value(report, config_.objective_mode), ids, report);
      ++count;
    };
    auto expired = [&]() {
      if (stop_.load(std::memory_order_relaxed)) return true;
      if ((count & 255) == 0 &&
          (Clock::now() >= deadline_ || config_.stop.stop_requested())) {
        stop_.store(true);
      }
      return stop_.load(std::memory_order_relaxed);
    };

    const std::size_t m = eligible_.size();
    for (;;) {
      auto b = next_block_.fetch_add(1);
      if (b >= blocks_.size()) break;
      // The empty cut is always scored so a timed-out run still has an answer.
      if (b != 0 && expired()) break;
      const Block& block = blocks_[b];
      const std::size_t s = block.size;
      pos.assign(block.prefix, block.prefix + block.prefix_len);
      const std::size_t start = pos.empty() ? 0 : pos.back() + 1;
      for (std::size_t j = pos.size(); j < s; ++j) pos.push_back(start + (j - block.prefix_len));

      bool aborted = false;
      for (;;) {
        if (count > 0 && b != 0 && expired()) {
          aborted = true;
          break;
        }
        evaluate();
        // Advance only the free tail positions.
        std::size_t i = s;
        while (i > block.prefix_len && pos[i - 1] == m - s + i - 1) --i;
        if (i == block.prefix_len) break;
        ++pos[i - 1];
        for (std::size_t j = i; j < s; ++j) pos[j] = pos[j - 1] + 1;
      }
      if (aborted) break;
      finished_blocks_.fetch_add(1);
    }

    evaluated_.fetch_add(count);
    std::lock_guard lock(merge_mutex_);
    if (local.valid) best_.offer(local.objective, local.ids, local.report);
  }

  const Graph& graph_;
  const AttackSet& attack_;
  const SolveConfig& config_;
  std::uint64_t base_;
  std::vector<std::size_t> eligible_;
  std::vector<Block> blocks_;
  Clock::time_point deadline_;

  std::atomic<std::size_t> next_block_{0};
  std::atomic<std::size_t> finished_blocks_{0};
  std::atomic<std::uint64_t> evaluated_{0};
  std::atomic<bool> stop_{false};
  std::mutex merge_mutex_;
  Incumbent best_;
};

}  // namespace

Solution solve_direct(const Graph& g, const AttackSet& a, const SolveConfig& config) {
  const auto started = Clock::now();
  config.validate();
  a.check_against(g);
  if (config.multiplier_base && *config.multiplier_base < g.device_count()) {
    throw std::invalid_argument("multiplier base is smaller than the device count");
  }

  std::vector<char> excluded(g.device_count(), 0);
  if (config.use_degree_one_filter) {
    for (auto id : excludable_devices(g, a)) excluded[*g.index_of(id)] = 1;
  }
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < g.device_count(); ++i) {
    if (!excluded[i]) eligible.push_back(i);
  }

  DirectSearch search(g, a, config, std::move(eligible));
  Solution s = search.run();
  s.elapsed = Clock::now() - started;
  return s;
}

Solution solve_oracle(const Graph& g, const AttackSet& a, std::uint32_t k, ObjectiveMode mode) {
  const auto started = Clock::now();
  a.check_against(g);
  const auto base = g.device_count();
  Incumbent best;
  std::uint64_t count = 0;
  CandidateEnumerator candidates(g.device_ids(), k);
  std::vector<DeviceId> cut;
  while (candidates.next(cut)) {
    Graph residual = remove_devices(g, cut);
    auto report = score_bruteforce(residual, a.restricted_to(residual), base);
    best.offer(objective_value(report, mode), cut, report);
    ++count;
  }
  Solution s;
  s.chosen = best.ids;
  s.report = best.report;
  s.subsets_evaluated = count;
  s.elapsed = Clock::now() - started;
  return s;
}

}  // namespace cyberseg
