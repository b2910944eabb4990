#include "cyberseg/report_json.hpp"

#include <algorithm>
#include <chrono>

namespace cyberseg {

using nlohmann::json;

json to_json(const ScoreReport& report) {
  return {{"vulnerability", report.vulnerability},
          {"healthiness", report.healthiness},
          {"phi", report.phi},
          {"multiplier_base", report.multiplier_base}};
}

json score_breakdown_json(const Graph& g, const AttackSet& a, std::uint64_t multiplier_base) {
  json out = to_json(score(g, a, multiplier_base));
  json comps = json::array();
  for (const auto& c : components(g, a)) {
    const auto vul = component_vulnerable_pairs(c.summary.size, c.summary.attacked_count);
    comps.push_back({{"devices", c.devices},
                     {"size", c.summary.size},
                     {"attacked_count", c.summary.attacked_count},
                     {"vulnerable_pairs", vul},
                     {"healthy_pairs", pairs(c.summary.size) - vul}});
  }
  out["components"] = std::move(comps);
  return out;
}

json to_json(const Solution& solution, const Graph& g) {
  json out = to_json(solution.report);
  out["chosen"] = solution.chosen;
  const bool labelled = std::any_of(g.devices().begin(), g.devices().end(),
                                    [](const Device& d) { return !d.label.empty(); });
  if (labelled) {
    json labels = json::array();
    for (auto id : solution.chosen) {
      auto idx = g.index_of(id);
      labels.push_back(idx ? g.devices()[*idx].label : std::string());
    }
    out["chosen_labels"] = std::move(labels);
  }
  out["status"] = to_string(solution.status);
  out["subsets_evaluated"] = solution.subsets_evaluated;
  out["elapsed_ms"] =
      std::chrono::duration<double, std::milli>(solution.elapsed).count();
  return out;
}

}  // namespace cyberseg
