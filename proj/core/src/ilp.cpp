#include "cyberseg/ilp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cyberseg::ilp {

const char* to_string(ObjectiveKind kind) {
  return kind == ObjectiveKind::kLexicographic ? "lexicographic" : "vulnerability_only";
}

const char* to_string(RowFamily family) {
  switch (family) {
    case RowFamily::kBudget:
      return "budget";
    case RowFamily::kEdgeLower:
      return "edge_lower";
    case RowFamily::kEdgeUpper:
      return "edge_upper";
    case RowFamily::kTriangle:
      return "triangle";
    case RowFamily::kStrengthening:
      return "strengthening";
  }
  return "unknown";
}

std::optional<std::size_t> IlpModel::find(std::string_view name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::size_t dense_pair_offset(std::size_t n, std::size_t i, std::size_t j) {
  // Pairs (i, j), i < j, in row-major order.
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

std::size_t dense_index(const std::vector<DeviceId>& ids, DeviceId id) {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) {
    throw std::invalid_argument("unknown device id " + std::to_string(id));
  }
  return static_cast<std::size_t>(it - ids.begin());
}

}  // namespace

std::size_t IlpModel::pair_var(DeviceId a, DeviceId b) const {
  if (a == b) throw std::invalid_argument("pair variable needs two distinct devices");
  auto i = dense_index(ids_, std::min(a, b));
  auto j = dense_index(ids_, std::max(a, b));
  return node_vars_ + dense_pair_offset(ids_.size(), i, j);
}

std::size_t IlpModel::count_rows(RowFamily family) const {
  return static_cast<std::size_t>(
      std::count_if(rows_.begin(), rows_.end(), [&](const Row& r) { return r.family == family; }));
}

std::int64_t IlpModel::objective_coefficient(std::size_t var) const {
  for (const auto& t : objective_) {
    if (t.var == var) return t.coeff;
  }
  return 0;
}

IlpModel build_model(const Graph& g, const AttackSet& a, std::uint32_t k, ObjectiveKind kind) {
  a.check_against(g);
  IlpModel m;
  m.kind_ = kind;
  m.ids_ = g.device_ids();
  const std::size_t n = m.ids_.size();
  m.node_vars_ = n;
  m.multiplier_base_ = n;

  for (auto id : m.ids_) {
    m.variables_.push_back(Variable{"v_" + std::to_string(id), id, id, false});
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      auto lo = m.ids_[i];
      auto hi = m.ids_[j];
      m.variables_.push_back(
          Variable{"u_" + std::to_string(lo) + "_" + std::to_string(hi), lo, hi, true});
    }
  }
  for (std::size_t v = 0; v < m.variables_.size(); ++v) m.by_name_.emplace(m.variables_[v].name, v);

  auto u = [&](std::size_t i, std::size_t j) { return n + dense_pair_offset(n, i, j); };

  const auto weight = static_cast<std::int64_t>(make_report(1, 0, n).phi);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool vulnerable = a.contains(m.ids_[i]) || a.contains(m.ids_[j]);
      std::int64_t coeff = 0;
      if (kind == ObjectiveKind::kLexicographic) {
        coeff = vulnerable ? weight : -1;
      } else {
        coeff = vulnerable ? 1 : 0;
      }
      if (coeff != 0) m.objective_.push_back(Term{u(i, j), coeff});
    }
  }

  Row budget;
  budget.family = RowFamily::kBudget;
  for (std::size_t i = 0; i < n; ++i) budget.terms.push_back(Term{i, 1});
  budget.sense = Sense::kLessEqual;
  budget.bound = k;
  m.rows_.push_back(std::move(budget));

  for (const auto& c : g.connections()) {
    auto i = dense_index(m.ids_, c.lo);
    auto j = dense_index(m.ids_, c.hi);
    // (1 - v_i) + (1 - v_j) - 2 u_ij >= 0, and <= 1.
    std::vector<Term> terms{{i, -1}, {j, -1}, {u(i, j), -2}};
    m.rows_.push_back(Row{RowFamily::kEdgeLower, terms, 2, Sense::kGreaterEqual, 0});
    m.rows_.push_back(Row{RowFamily::kEdgeUpper, terms, 2, Sense::kLessEqual, 1});
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t l = j + 1; l < n; ++l) {
        const auto ij = u(i, j);
        const auto jl = u(j, l);
        const auto il = u(i, l);
        m.rows_.push_back(
            Row{RowFamily::kTriangle, {{ij, 1}, {jl, 1}, {il, -1}}, 0, Sense::kLessEqual, 1});
        m.rows_.push_back(
            Row{RowFamily::kTriangle, {{ij, 1}, {jl, -1}, {il, 1}}, 0, Sense::kLessEqual, 1});
        m.rows_.push_back(
            Row{RowFamily::kTriangle, {{ij, -1}, {jl, 1}, {il, 1}}, 0, Sense::kLessEqual, 1});
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      m.rows_.push_back(Row{RowFamily::kStrengthening, {{u(i, j), 1}, {i, 1}}, 0,
                            Sense::kLessEqual, 1});
      m.rows_.push_back(Row{RowFamily::kStrengthening, {{u(i, j), 1}, {j, 1}}, 0,
                            Sense::kLessEqual, 1});
    }
  }
  return m;
}

std::uint64_t expected_row_count(std::uint64_t n, std::uint64_t m) {
  const std::uint64_t triples = n < 3 ? 0 : n * (n - 1) * (n - 2) / 6;
  return 1 + 2 * m + 3 * triples + 2 * pairs(n);
}

std::uint64_t expected_variable_count(std::uint64_t n) { return n + pairs(n); }

namespace {

void write_terms(std::ostream& out, const IlpModel& model, const std::vector<Term>& terms) {
  bool first = true;
  for (const auto& t : terms) {
    if (t.coeff == 0) continue;
    const auto mag = t.coeff < 0 ? -t.coeff : t.coeff;
    if (first) {
      if (t.coeff < 0) out << "- ";
    } else {
      out << (t.coeff < 0 ? " - " : " + ");
    }
    if (mag != 1) out << mag << ' ';
    out << model.variables()[t.var].name;
    first = false;
  }
  if (first) out << '0';
}

}  // namespace

std::string emit_lp(const IlpModel& model) {
  std::ostringstream out;
  out << "\\ security node isolation model (" << to_string(model.kind()) << ")\n";
  out << "Minimize\n obj: ";
  if (model.objective().empty() && !model.variables().empty()) {
    out << "0 " << model.variables().front().name;
  } else {
    write_terms(out, model, model.objective());
  }
  out << "\nSubject To\n";
  std::size_t row_no = 0;
  for (const auto& row : model.rows()) {
    out << " c" << ++row_no << ": ";
    write_terms(out, model, row.terms);
    out << (row.sense == Sense::kLessEqual ? " <= " : " >= ") << (row.bound - row.constant)
        << '\n';
  }
  out << "Binary\n";
  for (const auto& v : model.variables()) out << ' ' << v.name << '\n';
  out << "End\n";
  return out.str();
}

namespace {

int parse_binary(std::string_view token, std::string_view name) {
  double value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw std::invalid_argument("value '" + std::string(token) + "' for " + std::string(name) +
                                " is not a number");
  }
  if (std::abs(value) <= 1e-6) return 0;
  if (std::abs(value - 1.0) <= 1e-6) return 1;
  throw std::invalid_argument("value " + std::string(token) + " for " + std::string(name) +
                              " is not binary");
}

}  // namespace

Assignment parse_assignment(std::string_view text, const IlpModel& model) {
  Assignment asg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string name;
    std::string value;
    if (!(fields >> name)) continue;
    if (!(fields >> value)) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": missing value for " +
                                  name);
    }
    auto var = model.find(name);
    if (!var) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": unknown variable " +
                                  name);
    }
    const auto& info = model.variables()[*var];
    const int bit = parse_binary(value, name);
    if (info.is_pair) {
      asg.pair_values[Connection(info.first, info.second)] = bit;
    } else {
      asg.node_values[info.first] = bit;
    }
  }
  return asg;
}

namespace {

// Component label per device of G - cut, or -1 for removed devices.
std::map<DeviceId, long> residual_labels(const Graph& g, std::span<const DeviceId> cut) {
  Graph residual = remove_devices(g, cut);
  std::map<DeviceId, long> labels;
  for (auto id : g.device_ids()) labels[id] = -1;
  long next = 0;
  for (const auto& comp : components(residual, AttackSet{})) {
    for (auto id : comp.devices) labels[id] = next;
    ++next;
  }
  return labels;
}

}  // namespace

Assignment assignment_from_cut(const IlpModel& model, const Graph& g,
                               std::span<const DeviceId> chosen) {
  Assignment asg;
  for (auto id : g.device_ids()) asg.node_values[id] = 0;
  for (auto id : chosen) asg.node_values.at(id) = 1;
  auto labels = residual_labels(g, chosen);
  for (std::size_t v = model.node_var_count(); v < model.variables().size(); ++v) {
    const auto& info = model.variables()[v];
    const auto la = labels.at(info.first);
    asg.pair_values[Connection(info.first, info.second)] = (la >= 0 && la == labels.at(info.second));
  }
  return asg;
}

ValidationReport validate_assignment(const IlpModel& model, const Assignment& asg, const Graph& g,
                                     const AttackSet& a) {
  a.check_against(g);
  const auto ids = g.device_ids();
  if (ids.size() != model.node_var_count()) {
    throw std::invalid_argument("model and graph disagree on the device count");
  }
  for (const auto& [id, value] : asg.node_values) {
    if (!std::binary_search(ids.begin(), ids.end(), id)) {
      throw std::invalid_argument("assignment references unknown device " + std::to_string(id));
    }
  }
  for (const auto& [pair, value] : asg.pair_values) {
    if (!g.contains(pair.lo) || !g.contains(pair.hi) || pair.lo == pair.hi) {
      throw std::invalid_argument("assignment references unknown pair u_" +
                                  std::to_string(pair.lo) + "_" + std::to_string(pair.hi));
    }
  }

  ValidationReport report;
  std::vector<std::int64_t> values(model.variables().size(), 0);
  for (std::size_t v = 0; v < model.node_var_count(); ++v) {
    auto it = asg.node_values.find(model.variables()[v].first);
    if (it == asg.node_values.end()) {
      throw std::invalid_argument("assignment is missing " + model.variables()[v].name);
    }
    values[v] = it->second;
    if (it->second == 1) report.implied_cut.push_back(it->first);
  }

  auto labels = residual_labels(g, report.implied_cut);
  for (std::size_t v = model.node_var_count(); v < model.variables().size(); ++v) {
    const auto& info = model.variables()[v];
    auto it = asg.pair_values.find(Connection(info.first, info.second));
    if (it != asg.pair_values.end()) {
      values[v] = it->second;
    } else {
      const auto la = labels.at(info.first);
      values[v] = la >= 0 && la == labels.at(info.second);
    }
  }

  for (std::size_t r = 0; r < model.rows().size(); ++r) {
    const auto& row = model.rows()[r];
    std::int64_t lhs = row.constant;
    for (const auto& t : row.terms) lhs += t.coeff * values[t.var];
    const bool ok = row.sense == Sense::kLessEqual ? lhs <= row.bound : lhs >= row.bound;
    if (!ok) report.violated_constraints.push_back(Violation{r + 1, lhs, row.bound});
  }

  for (const auto& t : model.objective()) report.model_objective += t.coeff * values[t.var];

  Graph residual = remove_devices(g, report.implied_cut);
  report.recomputed = score(residual, a.restricted_to(residual), model.multiplier_base());
  const std::int64_t reference = model.kind() == ObjectiveKind::kLexicographic
                                     ? report.recomputed.phi
                                     : static_cast<std::int64_t>(report.recomputed.vulnerability);
  report.objective_gap = report.model_objective - reference;
  return report;
}

}  // namespace cyberseg::ilp
