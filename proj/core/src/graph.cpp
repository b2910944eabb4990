#include "cyberseg/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace cyberseg {

Connection::Connection(DeviceId a, DeviceId b) : lo(std::min(a, b)), hi(std::max(a, b)) {}

const char* to_string(ConnectionKind kind) {
  switch (kind) {
    case ConnectionKind::kDirect:
      return "direct";
    case ConnectionKind::kIndirect:
      return "indirect";
    case ConnectionKind::kNone:
      return "none";
  }
  return "none";
}

Graph::Graph(std::vector<Device> devices, std::vector<Connection> connections)
    : devices_(std::move(devices)), connections_(std::move(connections)) {
  std::sort(devices_.begin(), devices_.end(),
            [](const Device& x, const Device& y) { return x.id < y.id; });
  for (std::size_t i = 1; i < devices_.size(); ++i) {
    if (devices_[i].id == devices_[i - 1].id) {
      throw std::invalid_argument("duplicate device id " + std::to_string(devices_[i].id));
    }
  }
  for (auto& c : connections_) {
    c = Connection(c.lo, c.hi);
    if (c.lo == c.hi) {
      throw std::invalid_argument("self-loop on device " + std::to_string(c.lo));
    }
  }
  std::sort(connections_.begin(), connections_.end());
  for (std::size_t i = 1; i < connections_.size(); ++i) {
    if (connections_[i] == connections_[i - 1]) {
      throw std::invalid_argument("duplicate connection {" + std::to_string(connections_[i].lo) +
                                  ", " + std::to_string(connections_[i].hi) + "}");
    }
  }

  std::vector<std::size_t> degree(devices_.size(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> ends;
  ends.reserve(connections_.size());
  for (const auto& c : connections_) {
    auto lo = index_of(c.lo);
    auto hi = index_of(c.hi);
    if (!lo || !hi) {
      throw std::invalid_argument("connection {" + std::to_string(c.lo) + ", " +
                                  std::to_string(c.hi) + "} has an unknown endpoint");
    }
    ++degree[*lo];
    ++degree[*hi];
    ends.emplace_back(*lo, *hi);
  }
  offsets_.assign(devices_.size() + 1, 0);
  for (std::size_t i = 0; i < devices_.size(); ++i) offsets_[i + 1] = offsets_[i] + degree[i];
  adjacency_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (auto [lo, hi] : ends) {
    adjacency_[fill[lo]++] = hi;
    adjacency_[fill[hi]++] = lo;
  }
  for (std::size_t i = 0; i < devices_.size(); ++i) {
    std::sort(adjacency_.begin() + offsets_[i], adjacency_.begin() + offsets_[i + 1]);
  }
}

Graph Graph::with_ids(std::size_t n, std::vector<Connection> connections) {
  std::vector<Device> devices(n);
  for (std::size_t i = 0; i < n; ++i) devices[i].id = static_cast<DeviceId>(i);
  return Graph(std::move(devices), std::move(connections));
}

std::vector<DeviceId> Graph::device_ids() const {
  std::vector<DeviceId> ids;
  ids.reserve(devices_.size());
  for (const auto& d : devices_) ids.push_back(d.id);
  return ids;
}

std::optional<std::size_t> Graph::index_of(DeviceId id) const {
  auto it = std::lower_bound(devices_.begin(), devices_.end(), id,
                             [](const Device& d, DeviceId v) { return d.id < v; });
  if (it == devices_.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - devices_.begin());
}

std::size_t Graph::checked_index(DeviceId id) const {
  auto idx = index_of(id);
  if (!idx) throw std::invalid_argument("unknown device id " + std::to_string(id));
  return *idx;
}

bool Graph::has_connection(DeviceId a, DeviceId b) const {
  return std::binary_search(connections_.begin(), connections_.end(), Connection(a, b));
}

std::size_t Graph::degree(DeviceId id) const {
  auto idx = checked_index(id);
  return offsets_[idx + 1] - offsets_[idx];
}

std::vector<DeviceId> Graph::neighbors(DeviceId id) const {
  std::vector<DeviceId> out;
  for (auto n : neighbor_indices(checked_index(id))) out.push_back(devices_[n].id);
  return out;
}

AttackSet::AttackSet(std::vector<DeviceId> attacked) : attacked_(std::move(attacked)) {
  std::sort(attacked_.begin(), attacked_.end());
  attacked_.erase(std::unique(attacked_.begin(), attacked_.end()), attacked_.end());
}

bool AttackSet::contains(DeviceId id) const {
  return std::binary_search(attacked_.begin(), attacked_.end(), id);
}

void AttackSet::check_against(const Graph& g) const {
  for (auto id : attacked_) {
    if (!g.contains(id)) {
      throw std::invalid_argument("attacked device " + std::to_string(id) + " is not in the graph");
    }
  }
}

AttackSet AttackSet::restricted_to(const Graph& g) const {
  std::vector<DeviceId> kept;
  for (auto id : attacked_) {
    if (g.contains(id)) kept.push_back(id);
  }
  return AttackSet(std::move(kept));
}

Graph remove_devices(const Graph& g, std::span<const DeviceId> removed) {
  std::vector<char> gone(g.device_count(), 0);
  for (auto id : removed) {
    auto idx = g.index_of(id);
    if (!idx) throw std::invalid_argument("cannot remove unknown device " + std::to_string(id));
    gone[*idx] = 1;
  }
  std::vector<Device> devices;
  for (std::size_t i = 0; i < g.device_count(); ++i) {
    if (!gone[i]) devices.push_back(g.devices()[i]);
  }
  std::vector<Connection> connections;
  for (const auto& c : g.connections()) {
    if (!gone[*g.index_of(c.lo)] && !gone[*g.index_of(c.hi)]) connections.push_back(c);
  }
  return Graph(std::move(devices), std::move(connections));
}

ConnectionKind are_connected(const Graph& g, DeviceId u, DeviceId v) {
  if (u == v) throw std::invalid_argument("are_connected needs two distinct devices");
  auto from = g.index_of(u);
  auto to = g.index_of(v);
  if (!from || !to) {
    throw std::invalid_argument("unknown device id " + std::to_string(from ? v : u));
  }
  if (g.has_connection(u, v)) return ConnectionKind::kDirect;

  std::vector<char> seen(g.device_count(), 0);
  std::vector<std::size_t> stack{*from};
  seen[*from] = 1;
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    for (auto next : g.neighbor_indices(cur)) {
      if (next == *to) return ConnectionKind::kIndirect;
      if (!seen[next]) {
        seen[next] = 1;
        stack.push_back(next);
      }
    }
  }
  return ConnectionKind::kNone;
}

}  // namespace cyberseg
