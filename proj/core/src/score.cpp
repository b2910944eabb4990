#include "cyberseg/score.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace cyberseg {

namespace {

void check_base(const Graph& g, std::uint64_t multiplier_base) {
  if (multiplier_base < g.device_count()) {
    throw std::invalid_argument("multiplier base " + std::to_string(multiplier_base) +
                                " is smaller than the device count " +
                                std::to_string(g.device_count()));
  }
}

}  // namespace

std::uint64_t pairs(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

std::uint64_t component_vulnerable_pairs(std::uint64_t size, std::uint64_t attacked_count) {
  if (attacked_count > size) {
    throw std::invalid_argument("attacked count " + std::to_string(attacked_count) +
                                " exceeds component size " + std::to_string(size));
  }
  return pairs(attacked_count) + attacked_count * (size - attacked_count);
}

ScoreReport make_report(std::uint64_t vulnerability, std::uint64_t healthiness,
                        std::uint64_t multiplier_base) {
  constexpr auto kMax = static_cast<unsigned __int128>(std::numeric_limits<std::int64_t>::max());
  const auto base = static_cast<unsigned __int128>(multiplier_base);
  if (vulnerability != 0 && multiplier_base > (std::uint64_t{1} << 32)) {
    throw std::overflow_error("objective value exceeds 64-bit range");
  }
  const auto weighted = vulnerability == 0 ? 0 : (base * base + 1) * vulnerability;
  if (weighted > kMax) {
    throw std::overflow_error("objective value exceeds 64-bit range");
  }
  ScoreReport r;
  r.vulnerability = vulnerability;
  r.healthiness = healthiness;
  r.multiplier_base = multiplier_base;
  r.phi = static_cast<std::int64_t>(weighted) - static_cast<std::int64_t>(healthiness);
  return r;
}

std::vector<Component> components(const Graph& g, const AttackSet& a) {
  a.check_against(g);
  std::vector<Component> out;
  std::vector<char> seen(g.device_count(), 0);
  std::vector<std::size_t> stack;
  // Indices are id-sorted, so roots come out in smallest-id order.
  for (std::size_t root = 0; root < g.device_count(); ++root) {
    if (seen[root]) continue;
    Component comp;
    seen[root] = 1;
    stack.push_back(root);
    while (!stack.empty()) {
      auto cur = stack.back();
      stack.pop_back();
      comp.devices.push_back(g.id_at(cur));
      for (auto next : g.neighbor_indices(cur)) {
        if (!seen[next]) {
          seen[next] = 1;
          stack.push_back(next);
        }
      }
    }
    std::sort(comp.devices.begin(), comp.devices.end());
    comp.summary.size = comp.devices.size();
    for (auto id : comp.devices) comp.summary.attacked_count += a.contains(id) ? 1 : 0;
    out.push_back(std::move(comp));
  }
  return out;
}

ScoreReport score(const Graph& g, const AttackSet& a, std::uint64_t multiplier_base) {
  check_base(g, multiplier_base);
  std::uint64_t vul = 0;
  std::uint64_t heal = 0;
  for (const auto& comp : components(g, a)) {
    auto b = component_vulnerable_pairs(comp.summary.size, comp.summary.attacked_count);
    vul += b;
    heal += pairs(comp.summary.size) - b;
  }
  return make_report(vul, heal, multiplier_base);
}

ScoreReport score(const Graph& g, const AttackSet& a) { return score(g, a, g.device_count()); }

ScoreReport score_bruteforce(const Graph& g, const AttackSet& a, std::uint64_t multiplier_base) {
  check_base(g, multiplier_base);
  a.check_against(g);
  std::uint64_t vul = 0;
  std::uint64_t heal = 0;
  const auto& devices = g.devices();
  for (std::size_t i = 0; i < devices.size(); ++i) {
    for (std::size_t j = i + 1; j < devices.size(); ++j) {
      auto u = devices[i].id;
      auto v = devices[j].id;
      if (are_connected(g, u, v) == ConnectionKind::kNone) continue;
      if (a.contains(u) || a.contains(v)) {
        ++vul;
      } else {
        ++heal;
      }
    }
  }
  return make_report(vul, heal, multiplier_base);
}

ResidualScorer::ResidualScorer(const Graph& g, const AttackSet& a, std::uint64_t multiplier_base)
    : graph_(&g),
      multiplier_base_(multiplier_base),
      attacked_(g.device_count(), 0),
      blocked_(g.device_count(), 0),
      seen_(g.device_count(), 0) {
  check_base(g, multiplier_base);
  a.check_against(g);
  for (auto id : a.ids()) attacked_[*g.index_of(id)] = 1;
  stack_.reserve(g.device_count());
}

ScoreReport ResidualScorer::score_without(std::span<const std::size_t> removed) {
  const auto n = graph_->device_count();
  if (++epoch_ == 0) {
    std::fill(seen_.begin(), seen_.end(), 0);
    epoch_ = 1;
  }
  for (auto idx : removed) blocked_[idx] = 1;

  std::uint64_t vul = 0;
  std::uint64_t heal = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (blocked_[root] || seen_[root] == epoch_) continue;
    std::uint64_t size = 0;
    std::uint64_t hit = 0;
    seen_[root] = epoch_;
    stack_.push_back(root);
    while (!stack_.empty()) {
      auto cur = stack_.back();
      stack_.pop_back();
      ++size;
      hit += attacked_[cur];
      for (auto next : graph_->neighbor_indices(cur)) {
        if (!blocked_[next] && seen_[next] != epoch_) {
          seen_[next] = epoch_;
          stack_.push_back(next);
        }
      }
    }
    auto b = pairs(hit) + hit * (size - hit);
    vul += b;
    heal += pairs(size) - b;
  }

  for (auto idx : removed) blocked_[idx] = 0;
  return make_report(vul, heal, multiplier_base_);
}

}  // namespace cyberseg
