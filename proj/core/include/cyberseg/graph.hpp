#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cyberseg {

using DeviceId = std::uint32_t;

struct Device {
  DeviceId id = 0;
  std::string label;

  friend bool operator==(const Device&, const Device&) = default;
};

/// Unordered device pair, normalized so that `lo < hi`.
struct Connection {
  DeviceId lo = 0;
  DeviceId hi = 0;

  Connection() = default;
  Connection(DeviceId a, DeviceId b);

  friend bool operator==(const Connection&, const Connection&) = default;
  friend auto operator<=>(const Connection&, const Connection&) = default;
};

enum class ConnectionKind { kDirect, kIndirect, kNone };

const char* to_string(ConnectionKind kind);

/// Immutable undirected simple graph over sparse device ids.
///
/// Devices are kept sorted by id and addressed internally by dense index;
/// ids survive device removal unchanged.
class Graph {
 public:
  Graph() = default;

  /// Throws std::invalid_argument on duplicate ids, self-loops, duplicate
  /// connections or endpoints that are not devices.
  Graph(std::vector<Device> devices, std::vector<Connection> connections);

  /// Devices 0..n-1 without labels.
  static Graph with_ids(std::size_t n, std::vector<Connection> connections);

  std::size_t device_count() const { return devices_.size(); }
  std::size_t connection_count() const { return connections_.size(); }

  const std::vector<Device>& devices() const { return devices_; }
  const std::vector<Connection>& connections() const { return connections_; }
  std::vector<DeviceId> device_ids() const;

  bool contains(DeviceId id) const { return index_of(id).has_value(); }
  std::optional<std::size_t> index_of(DeviceId id) const;
  DeviceId id_at(std::size_t index) const { return devices_[index].id; }

  bool has_connection(DeviceId a, DeviceId b) const;
  std::size_t degree(DeviceId id) const;
  std::vector<DeviceId> neighbors(DeviceId id) const;

  std::span<const std::size_t> neighbor_indices(std::size_t index) const {
    return {adjacency_.data() + offsets_[index], adjacency_.data() + offsets_[index + 1]};
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.devices_ == b.devices_ && a.connections_ == b.connections_;
  }

 private:
  std::size_t checked_index(DeviceId id) const;

  std::vector<Device> devices_;
  std::vector<Connection> connections_;
  // CSR adjacency over dense indices.
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> adjacency_;
};

/// The attacked devices A, sorted and deduplicated.
class AttackSet {
 public:
  AttackSet() = default;
  explicit AttackSet(std::vector<DeviceId> attacked);

  const std::vector<DeviceId>& ids() const { return attacked_; }
  std::size_t size() const { return attacked_.size(); }
  bool empty() const { return attacked_.empty(); }
  bool contains(DeviceId id) const;

  /// Throws std::invalid_argument naming the first id absent from `g`.
  void check_against(const Graph& g) const;

  /// Attacked devices that survive in `g`.
  AttackSet restricted_to(const Graph& g) const;

  friend bool operator==(const AttackSet&, const AttackSet&) = default;

 private:
  std::vector<DeviceId> attacked_;
};

/// Copy of `g` without the devices in `removed` and their incident
/// connections. Throws std::invalid_argument for ids not in `g`.
Graph remove_devices(const Graph& g, std::span<const DeviceId> removed);

/// Throws std::invalid_argument if `u == v` or either device is missing.
ConnectionKind are_connected(const Graph& g, DeviceId u, DeviceId v);

}  // namespace cyberseg
