#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "cyberseg/graph.hpp"

namespace cyberseg {

/// One SNP-V problem: a graph, its attacked devices and an optional budget.
struct Instance {
  Graph graph;
  AttackSet attacked;
  std::optional<std::uint32_t> budget;

  friend bool operator==(const Instance&, const Instance&) = default;
};

enum class Rounding { kHalfEven, kFloor, kCeil };

const char* to_string(Rounding rounding);
std::optional<Rounding> parse_rounding(std::string_view text);

struct TreeSource {
  std::uint32_t devices = 50;
  std::uint32_t branching = 5;
};
struct KarateSource {};
struct FileSource {
  std::filesystem::path path;
};

struct InstanceSpec {
  std::variant<TreeSource, KarateSource, FileSource> source;
  double attack_fraction = 0.0;
  std::uint64_t seed = 0;
  Rounding rounding = Rounding::kHalfEven;
};

/// Malformed input; `line()` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input describing an invalid instance.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Devices 0..n-1; device i has children r*i+1 .. r*i+r below n.
Graph generate_full_ary_tree(std::uint32_t n, std::uint32_t r);

/// p*n rounded per `rounding`.
std::uint32_t attacked_count(std::uint32_t n, double p, Rounding rounding = Rounding::kHalfEven);

/// Fisher-Yates shuffle of the sorted ids driven by mt19937_64 with
/// rejection-sampled bounds, then the first attacked_count ids.
AttackSet sample_attacked(const Graph& g, double p, std::uint64_t seed,
                          Rounding rounding = Rounding::kHalfEven);

/// Zachary's karate club: 34 devices, 78 connections, ids 0..33.
Graph load_karate();

/// Builds the graph named by `spec` and samples its attacked set.
Instance make_instance(const InstanceSpec& spec);

Instance parse_instance_json(std::string_view text);
std::string to_json_text(const Instance& instance);

/// "u v" per line, '#' comments, "node u" declares an isolated device.
Graph parse_edge_list(std::string_view text);

/// Dispatches on content: a leading '{' means JSON, anything else an edge list.
Instance parse_instance_text(std::string_view text);

Instance load_instance(const std::filesystem::path& path);
void save_instance(const Instance& instance, const std::filesystem::path& path);

}  // namespace cyberseg
