#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cyberseg/graph.hpp"
#include "cyberseg/score.hpp"

namespace cyberseg::ilp {

enum class ObjectiveKind {
  kLexicographic,      // (n^2+1) * vulnerable pairs - healthy pairs
  kVulnerabilityOnly,  // vulnerable pairs only
};

const char* to_string(ObjectiveKind kind);

enum class Sense { kLessEqual, kGreaterEqual };

enum class RowFamily { kBudget, kEdgeLower, kEdgeUpper, kTriangle, kStrengthening };

const char* to_string(RowFamily family);

struct Term {
  std::size_t var = 0;
  std::int64_t coeff = 0;
};

/// sum(terms) + constant  (sense)  bound
struct Row {
  RowFamily family = RowFamily::kBudget;
  std::vector<Term> terms;
  std::int64_t constant = 0;
  Sense sense = Sense::kLessEqual;
  std::int64_t bound = 0;
};

struct Variable {
  std::string name;
  // Node variables carry one device; pair variables carry both endpoints.
  DeviceId first = 0;
  DeviceId second = 0;
  bool is_pair = false;
};

/// Binary program over one v variable per device and one u variable per
/// unordered device pair. Variables are laid out as all v (by device id)
/// followed by all u (by (min id, max id)).
class IlpModel {
 public:
  ObjectiveKind kind() const { return kind_; }
  std::uint64_t multiplier_base() const { return multiplier_base_; }
  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<Term>& objective() const { return objective_; }

  std::size_t node_var_count() const { return node_vars_; }
  std::size_t pair_var_count() const { return variables_.size() - node_vars_; }
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t pair_var(DeviceId a, DeviceId b) const;

  std::size_t count_rows(RowFamily family) const;
  std::int64_t objective_coefficient(std::size_t var) const;

 private:
  friend IlpModel build_model(const Graph&, const AttackSet&, std::uint32_t, ObjectiveKind);

  ObjectiveKind kind_ = ObjectiveKind::kLexicographic;
  std::uint64_t multiplier_base_ = 0;
  std::size_t node_vars_ = 0;
  std::vector<DeviceId> ids_;
  std::vector<Variable> variables_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
  std::vector<Row> rows_;
  std::vector<Term> objective_;
};

/// Rows in construction order: budget, two edge-coupling rows per connection,
/// three transitivity rows per unordered triple, then u <= 1 - v for both
/// endpoints of every pair.
IlpModel build_model(const Graph& g, const AttackSet& a, std::uint32_t k, ObjectiveKind kind);

/// Closed-form row count for `n` devices and `m` connections.
std::uint64_t expected_row_count(std::uint64_t n, std::uint64_t m);
std::uint64_t expected_variable_count(std::uint64_t n);

/// CPLEX LP text; rows named c1..cm, variables v_<id> and u_<lo>_<hi>.
std::string emit_lp(const IlpModel& model);

struct Assignment {
  std::map<DeviceId, int> node_values;
  /// Keyed by normalized (lo, hi); missing pairs are derived on validation.
  std::map<Connection, int> pair_values;
};

/// Parses "name value" lines. Blank lines and '#' comments are skipped.
/// Throws std::invalid_argument for unknown variables or non-binary values.
Assignment parse_assignment(std::string_view text, const IlpModel& model);

/// Assignment describing cut `chosen` with u set to true connectivity.
Assignment assignment_from_cut(const IlpModel& model, const Graph& g,
                               std::span<const DeviceId> chosen);

struct Violation {
  std::size_t row = 0;  // 1-based, matches cN in the LP text
  std::int64_t lhs = 0;
  std::int64_t bound = 0;
};

struct ValidationReport {
  std::vector<Violation> violated_constraints;
  std::vector<DeviceId> implied_cut;
  ScoreReport recomputed;
  std::int64_t model_objective = 0;
  std::int64_t objective_gap = 0;

  bool certified() const { return violated_constraints.empty() && objective_gap == 0; }
};

/// Evaluates every row and recomputes the score of G - {i : v_i = 1}. The gap
/// compares the model objective with phi (lexicographic) or vulnerability.
ValidationReport validate_assignment(const IlpModel& model, const Assignment& asg, const Graph& g,
                                     const AttackSet& a);

}  // namespace cyberseg::ilp
