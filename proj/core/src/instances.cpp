#include "cyberseg/instances.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"

namespace cyberseg {

using nlohmann::json;

const char* to_string(Rounding rounding) {
  switch (rounding) {
    case Rounding::kHalfEven:
      return "half_even";
    case Rounding::kFloor:
      return "floor";
    case Rounding::kCeil:
      return "ceil";
  }
  return "half_even";
}

std::optional<Rounding> parse_rounding(std::string_view text) {
  if (text == "half_even") return Rounding::kHalfEven;
  if (text == "floor") return Rounding::kFloor;
  if (text == "ceil") return Rounding::kCeil;
  return std::nullopt;
}

Graph generate_full_ary_tree(std::uint32_t n, std::uint32_t r) {
  if (n < 1 || r < 1) throw std::invalid_argument("tree needs n >= 1 and r >= 1");
  std::vector<Connection> connections;
  connections.reserve(n - 1);
  for (std::uint64_t parent = 0; parent < n; ++parent) {
    for (std::uint64_t c = 1; c <= r; ++c) {
      const std::uint64_t child = r * parent + c;
      if (child >= n) break;
      connections.emplace_back(static_cast<DeviceId>(parent), static_cast<DeviceId>(child));
    }
  }
  return Graph::with_ids(n, std::move(connections));
}

std::uint32_t attacked_count(std::uint32_t n, double p, Rounding rounding) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("attack fraction must lie in [0, 1]");
  double x = p * n;
  // Snap products like 0.3 * 5 = 1.4999999999999998 onto the exact half.
  const double halves = std::round(x * 2.0) / 2.0;
  if (std::abs(x - halves) < 1e-9) x = halves;
  double rounded = 0.0;
  switch (rounding) {
    case Rounding::kHalfEven: {
      rounded = std::floor(x);
      const double frac = x - rounded;
      if (frac > 0.5 || (frac == 0.5 && std::fmod(rounded, 2.0) != 0.0)) rounded += 1.0;
      break;
    }
    case Rounding::kFloor:
      rounded = std::floor(x);
      break;
    case Rounding::kCeil:
      rounded = std::ceil(x);
      break;
  }
  return static_cast<std::uint32_t>(std::clamp(rounded, 0.0, static_cast<double>(n)));
}

namespace {

// Uniform draw from [0, bound) that only depends on mt19937_64's raw
// output, unlike std::uniform_int_distribution.
std::uint64_t draw_below(std::mt19937_64& gen, std::uint64_t bound) {
  const std::uint64_t reject_from = -bound % bound;  // 2^64 mod bound
  for (;;) {
    const std::uint64_t x = gen();
    if (x >= reject_from) return x % bound;
  }
}

}  // namespace

AttackSet sample_attacked(const Graph& g, double p, std::uint64_t seed, Rounding rounding) {
  const auto count = attacked_count(static_cast<std::uint32_t>(g.device_count()), p, rounding);
  auto ids = g.device_ids();
  std::mt19937_64 gen(seed);
  for (std::size_t i = ids.size(); i > 1; --i) {
    std::swap(ids[i - 1], ids[draw_below(gen, i)]);
  }
  ids.resize(count);
  return AttackSet(std::move(ids));
}

Graph load_karate() {
  static constexpr std::array<std::array<DeviceId, 2>, 78> kEdges{{
      {0, 1},   {0, 2},   {0, 3},   {0, 4},   {0, 5},   {0, 6},   {0, 7},   {0, 8},
      {0, 10},  {0, 11},  {0, 12},  {0, 13},  {0, 17},  {0, 19},  {0, 21},  {0, 31},
      {1, 2},   {1, 3},   {1, 7},   {1, 13},  {1, 17},  {1, 19},  {1, 21},  {1, 30},
      {2, 3},   {2, 7},   {2, 8},   {2, 9},   {2, 13},  {2, 27},  {2, 28},  {2, 32},
      {3, 7},   {3, 12},  {3, 13},  {4, 6},   {4, 10},  {5, 6},   {5, 10},  {5, 16},
      {6, 16},  {8, 30},  {8, 32},  {8, 33},  {9, 33},  {13, 33}, {14, 32}, {14, 33},
      {15, 32}, {15, 33}, {18, 32}, {18, 33}, {19, 33}, {20, 32}, {20, 33}, {22, 32},
      {22, 33}, {23, 25}, {23, 27}, {23, 29}, {23, 32}, {23, 33}, {24, 25}, {24, 27},
      {24, 31}, {25, 31}, {26, 29}, {26, 33}, {27, 33}, {28, 31}, {28, 33}, {29, 32},
      {29, 33}, {30, 32}, {30, 33}, {31, 32}, {31, 33}, {32, 33},
  }};
  std::vector<Connection> connections;
  connections.reserve(kEdges.size());
  for (const auto& e : kEdges) connections.emplace_back(e[0], e[1]);
  return Graph::with_ids(34, std::move(connections));
}

Instance make_instance(const InstanceSpec& spec) {
  if (!(spec.attack_fraction >= 0.0 && spec.attack_fraction <= 1.0)) {
    throw std::invalid_argument("attack fraction must lie in [0, 1]");
  }
  Instance inst;
  if (const auto* tree = std::get_if<TreeSource>(&spec.source)) {
    inst.graph = generate_full_ary_tree(tree->devices, tree->branching);
  } else if (std::holds_alternative<KarateSource>(spec.source)) {
    inst.graph = load_karate();
  } else {
    inst.graph = load_instance(std::get<FileSource>(spec.source).path).graph;
  }
  inst.attacked = sample_attacked(inst.graph, spec.attack_fraction, spec.seed, spec.rounding);
  return inst;
}

namespace {

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

DeviceId as_device_id(const json& value, const char* where) {
  if (!value.is_number_integer()) {
    throw ParseError(std::string(where) + " must hold integer device ids", 0);
  }
  const auto raw = value.get<std::int64_t>();
  if (raw < 0 || raw > static_cast<std::int64_t>(std::numeric_limits<DeviceId>::max())) {
    throw ValidationError(std::string(where) + " holds out-of-range device id " +
                          std::to_string(raw));
  }
  return static_cast<DeviceId>(raw);
}

}  // namespace

Instance parse_instance_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), line_of(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  if (!doc.is_object()) throw ParseError("instance must be a JSON object", 1);
  for (const char* key : {"devices", "connections", "attacked"}) {
    if (!doc.contains(key) || !doc[key].is_array()) {
      throw ParseError(std::string("missing array \"") + key + "\"", 0);
    }
  }

  std::vector<Device> devices;
  for (const auto& d : doc["devices"]) {
    if (d.is_object()) {
      if (!d.contains("id")) throw ParseError("device object without \"id\"", 0);
      Device dev{as_device_id(d["id"], "devices"), {}};
      if (d.contains("label")) {
        if (!d["label"].is_string()) throw ParseError("device label must be a string", 0);
        dev.label = d["label"].get<std::string>();
      }
      devices.push_back(std::move(dev));
    } else {
      devices.push_back(Device{as_device_id(d, "devices"), {}});
    }
  }
  std::vector<Connection> connections;
  for (const auto& c : doc["connections"]) {
    if (!c.is_array() || c.size() != 2) {
      throw ParseError("connections must be arrays of two device ids", 0);
    }
    connections.emplace_back(as_device_id(c[0], "connections"), as_device_id(c[1], "connections"));
  }
  std::vector<DeviceId> attacked;
  for (const auto& a : doc["attacked"]) attacked.push_back(as_device_id(a, "attacked"));

  Instance inst;
  try {
    inst.graph = Graph(std::move(devices), std::move(connections));
    inst.attacked = AttackSet(std::move(attacked));
    inst.attacked.check_against(inst.graph);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  if (doc.contains("budget") && !doc["budget"].is_null()) {
    const auto& b = doc["budget"];
    if (!b.is_number_integer() || b.get<std::int64_t>() < 0) {
      throw ValidationError("budget must be a non-negative integer");
    }
    inst.budget = b.get<std::uint32_t>();
  }
  return inst;
}

std::string to_json_text(const Instance& instance) {
  json doc = json::object();
  const bool labelled = std::any_of(instance.graph.devices().begin(), instance.graph.devices().end(),
                                    [](const Device& d) { return !d.label.empty(); });
  json devices = json::array();
  for (const auto& d : instance.graph.devices()) {
    if (labelled) {
      devices.push_back({{"id", d.id}, {"label", d.label}});
    } else {
      devices.push_back(d.id);
    }
  }
  json connections = json::array();
  for (const auto& c : instance.graph.connections()) connections.push_back({c.lo, c.hi});
  doc["devices"] = std::move(devices);
  doc["connections"] = std::move(connections);
  doc["attacked"] = instance.attacked.ids();
  if (instance.budget) doc["budget"] = *instance.budget;
  return doc.dump() + "\n";
}

Graph parse_edge_list(std::string_view text) {
  std::vector<Device> devices;
  std::vector<Connection> connections;
  std::vector<DeviceId> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;

  auto read_id = [&](std::istringstream& fields) {
    std::string token;
    if (!(fields >> token)) throw ParseError("expected a device id", line_no);
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() ||
        value > std::numeric_limits<DeviceId>::max()) {
      throw ParseError("'" + token + "' is not a device id", line_no);
    }
    seen.push_back(static_cast<DeviceId>(value));
    return static_cast<DeviceId>(value);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    if (first == "node") {
      read_id(fields);
    } else {
      fields.clear();
      fields.str(line);
      auto u = read_id(fields);
      auto v = read_id(fields);
      if (u == v) throw ParseError("self-loop on device " + std::to_string(u), line_no);
      connections.emplace_back(u, v);
    }
    std::string extra;
    if (fields >> extra) throw ParseError("unexpected token '" + extra + "'", line_no);
  }

  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  for (auto id : seen) devices.push_back(Device{id, {}});
  try {
    return Graph(std::move(devices), std::move(connections));
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
}

Instance parse_instance_text(std::string_view text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') return parse_instance_json(text);
  Instance inst;
  inst.graph = parse_edge_list(text);
  return inst;
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_instance_text(buffer.str());
}

void save_instance(const Instance& instance, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json_text(instance);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace cyberseg
