#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cyberseg/exact_solver.hpp"
#include "cyberseg/greedy_solver.hpp"
#include "cyberseg/ilp.hpp"
#include "cyberseg/instances.hpp"
#include "cyberseg/report_json.hpp"
#include "cyberseg/service.hpp"
#include "json.hpp"

namespace cyberseg::cli {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputOptions {
  std::string instance_path;
  bool from_stdin = false;

  void add_to(CLI::App& cmd) {
    auto* path = cmd.add_option("--instance", instance_path, "Instance JSON or edge-list file");
    auto* stdin_flag = cmd.add_flag("--stdin", from_stdin, "Read the instance from standard input");
    path->excludes(stdin_flag);
  }

  Instance load(std::istream& in) const {
    if (from_stdin) {
      std::stringstream buffer;
      buffer << in.rdbuf();
      return parse_instance_text(buffer.str());
    }
    if (instance_path.empty()) throw UsageError("one of --instance or --stdin is required");
    return load_instance(instance_path);
  }
};

std::uint32_t budget_for(const Instance& inst, const std::optional<std::uint32_t>& flag) {
  if (flag) return *flag;
  if (inst.budget) return *inst.budget;
  throw UsageError("--k is required when the instance has no budget");
}

std::vector<DeviceId> parse_id_list(const std::string& text) {
  std::vector<DeviceId> ids;
  std::stringstream stream(text);
  std::string token;
  while (std::getline(stream, token, ',')) {
    token.erase(std::remove_if(token.begin(), token.end(), ::isspace), token.end());
    if (token.empty()) continue;
    try {
      std::size_t used = 0;
      const auto value = std::stoull(token, &used);
      if (used != token.size() || value > std::numeric_limits<DeviceId>::max()) throw 0;
      ids.push_back(static_cast<DeviceId>(value));
    } catch (...) {
      throw UsageError("'" + token + "' is not a device id");
    }
  }
  return ids;
}

void emit(const json& doc, const std::string& out_path, std::ostream& out) {
  const auto text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot write " + out_path);
  file << text;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot write " + path);
  file << text;
}

std::string read_text(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

const std::map<std::string, ObjectiveMode> kModes{{"snpv", ObjectiveMode::kSnpv},
                                                  {"cnpv", ObjectiveMode::kCnpv}};
const std::map<std::string, Rounding> kRoundings{{"half_even", Rounding::kHalfEven},
                                                 {"floor", Rounding::kFloor},
                                                 {"ceil", Rounding::kCeil}};

ilp::ObjectiveKind ilp_kind(ObjectiveMode mode) {
  return mode == ObjectiveMode::kSnpv ? ilp::ObjectiveKind::kLexicographic
                                      : ilp::ObjectiveKind::kVulnerabilityOnly;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Device isolation planner for attacked networks", "cyberseg"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate an instance with sampled attacked devices");
  std::optional<std::uint32_t> tree_n;
  std::uint32_t branching = 5;
  bool karate = false;
  std::string gen_source;
  double p = 0.0;
  std::uint64_t seed = 0;
  Rounding rounding = Rounding::kHalfEven;
  std::optional<std::uint32_t> gen_k;
  std::string out_path;
  auto* tree_opt = gen->add_option("--tree", tree_n, "Full r-ary tree with N devices");
  gen->add_option("--branching", branching, "Branching factor of the tree")
      ->check(CLI::PositiveNumber);
  auto* karate_flag = gen->add_flag("--karate", karate, "Use the bundled karate club graph");
  auto* source_opt = gen->add_option("--instance", gen_source, "Take the topology from a file");
  tree_opt->excludes(karate_flag)->excludes(source_opt);
  karate_flag->excludes(source_opt);
  gen->add_option("--p", p, "Attacked fraction")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--seed", seed, "Sampling seed");
  gen->add_option("--rounding", rounding, "Attacked count rounding")
      ->transform(CLI::CheckedTransformer(kRoundings, CLI::ignore_case));
  gen->add_option("--k", gen_k, "Budget to store in the instance");
  gen->add_option("--out", out_path, "Write the result here instead of stdout");

  // score
  auto* score_cmd = app.add_subcommand("score", "Score the instance after isolating devices");
  InputOptions score_in;
  score_in.add_to(*score_cmd);
  std::string isolate;
  score_cmd->add_option("--isolate", isolate, "Comma-separated device ids to isolate");
  score_cmd->add_option("--out", out_path, "Write the result here instead of stdout");

  // solve
  auto* solve = app.add_subcommand("solve", "Choose devices to isolate within a budget");
  InputOptions solve_in;
  solve_in.add_to(*solve);
  std::optional<std::uint32_t> k;
  std::string algo = "direct";
  std::uint32_t chunk_x = 3;
  ObjectiveMode mode = ObjectiveMode::kSnpv;
  bool no_filter = false;
  double timeout_s = 600.0;
  unsigned jobs = 1;
  solve->add_option("--k", k, "Isolation budget");
  solve->add_option("--algo", algo, "Solver")->check(CLI::IsMember({"direct", "greedy", "oracle"}));
  solve->add_option("--x", chunk_x, "Greedy chunk budget")->check(CLI::PositiveNumber);
  solve->add_option("--mode", mode, "Objective")
      ->transform(CLI::CheckedTransformer(kModes, CLI::ignore_case));
  solve->add_flag("--no-filter", no_filter, "Keep non-attacked degree-one devices as candidates");
  solve->add_option("--timeout", timeout_s, "Seconds before returning the best cut so far")
      ->check(CLI::PositiveNumber);
  solve->add_option("--jobs", jobs, "Worker threads (0 = all cores)")->envname("CYBERSEG_JOBS");
  solve->add_option("--out", out_path, "Write the result here instead of stdout");

  // export-ilp
  auto* export_cmd = app.add_subcommand("export-ilp", "Write the integer program in LP format");
  InputOptions export_in;
  export_in.add_to(*export_cmd);
  export_cmd->add_option("--k", k, "Isolation budget");
  export_cmd->add_option("--mode", mode, "snpv = lexicographic, cnpv = vulnerability only")
      ->transform(CLI::CheckedTransformer(kModes, CLI::ignore_case));
  export_cmd->add_option("--out", out_path, "LP file to write");

  // validate-ilp
  auto* validate = app.add_subcommand("validate-ilp", "Check a solver assignment against the model");
  InputOptions validate_in;
  validate_in.add_to(*validate);
  std::string assignment_path;
  validate->add_option("--k", k, "Isolation budget");
  validate->add_option("--mode", mode, "snpv = lexicographic, cnpv = vulnerability only")
      ->transform(CLI::CheckedTransformer(kModes, CLI::ignore_case));
  validate->add_option("--assignment", assignment_path, "Lines of 'name value'")->required();
  validate->add_option("--out", out_path, "Write the result here instead of stdout");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP/JSON service");
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string data_dir = "cyberseg-data";
  serve->add_option("--port", port, "Listen port");
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--data-dir", data_dir, "Instance store directory")
      ->envname("CYBERSEG_DATA_DIR");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, err, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) {
      InstanceSpec spec;
      if (tree_n) {
        spec.source = TreeSource{*tree_n, branching};
      } else if (karate) {
        spec.source = KarateSource{};
      } else if (!gen_source.empty()) {
        spec.source = FileSource{gen_source};
      } else {
        throw UsageError("gen needs --tree, --karate or --instance");
      }
      spec.attack_fraction = p;
      spec.seed = seed;
      spec.rounding = rounding;
      Instance inst = make_instance(spec);
      inst.budget = gen_k;
      const auto doc = json::parse(to_json_text(inst));
      emit(doc, out_path, out);
      err << "generated " << inst.graph.device_count() << " devices, "
          << inst.graph.connection_count() << " connections, " << inst.attacked.size()
          << " attacked\n";
      return kOk;
    }

    if (score_cmd->parsed()) {
      const Instance inst = score_in.load(in);
      const auto cut = parse_id_list(isolate);
      const Graph residual = remove_devices(inst.graph, cut);
      json doc = score_breakdown_json(residual, inst.attacked.restricted_to(residual),
                                      inst.graph.device_count());
      std::vector<DeviceId> sorted_cut(cut);
      std::sort(sorted_cut.begin(), sorted_cut.end());
      sorted_cut.erase(std::unique(sorted_cut.begin(), sorted_cut.end()), sorted_cut.end());
      doc["isolate"] = sorted_cut;
      emit(doc, out_path, out);
      err << "vulnerability " << doc["vulnerability"] << ", healthiness " << doc["healthiness"]
          << "\n";
      return kOk;
    }

    if (solve->parsed()) {
      const Instance inst = solve_in.load(in);
      SolveConfig config;
      config.budget_k = budget_for(inst, k);
      config.objective_mode = mode;
      config.use_degree_one_filter = !no_filter;
      config.timeout = std::chrono::milliseconds(
          std::max<std::int64_t>(1, static_cast<std::int64_t>(timeout_s * 1000.0)));
      config.parallelism = jobs;

      Solution solution;
      if (algo == "greedy") {
        solution = solve_greedy(inst.graph, inst.attacked, GreedyConfig{config.budget_k, chunk_x, config});
      } else if (algo == "oracle") {
        solution = solve_oracle(inst.graph, inst.attacked, config.budget_k, mode);
      } else {
        solution = solve_direct(inst.graph, inst.attacked, config);
      }
      json doc = to_json(solution, inst.graph);
      doc["algo"] = algo;
      doc["k"] = config.budget_k;
      doc["mode"] = to_string(mode);
      // Timing is the only nondeterministic field; keep stdout reproducible.
      doc.erase("elapsed_ms");
      emit(doc, out_path, out);
      err << algo << " solve: isolate " << solution.chosen.size() << " device(s), vulnerability "
          << solution.report.vulnerability << ", healthiness " << solution.report.healthiness
          << ", " << to_string(solution.status) << " after "
          << std::chrono::duration<double>(solution.elapsed).count() << " s\n";
      return solution.status == SolveStatus::kOptimal ? kOk : kTimeout;
    }

    if (export_cmd->parsed()) {
      const Instance inst = export_in.load(in);
      const auto model = ilp::build_model(inst.graph, inst.attacked, budget_for(inst, k), ilp_kind(mode));
      const auto text = ilp::emit_lp(model);
      json doc{{"objective", ilp::to_string(model.kind())},
               {"variables", model.variables().size()},
               {"rows", model.rows().size()}};
      if (out_path.empty()) {
        doc["lp"] = text;
      } else {
        write_text(out_path, text);
        doc["lp_path"] = out_path;
      }
      out << doc.dump(2) << "\n";
      err << "model with " << model.variables().size() << " variables and " << model.rows().size()
          << " rows\n";
      return kOk;
    }

    if (validate->parsed()) {
      const Instance inst = validate_in.load(in);
      const auto model = ilp::build_model(inst.graph, inst.attacked, budget_for(inst, k), ilp_kind(mode));
      const auto asg = ilp::parse_assignment(read_text(assignment_path), model);
      const auto report = ilp::validate_assignment(model, asg, inst.graph, inst.attacked);
      json violations = json::array();
      for (const auto& v : report.violated_constraints) {
        violations.push_back({{"row", "c" + std::to_string(v.row)}, {"lhs", v.lhs}, {"bound", v.bound}});
      }
      json doc{{"violated_constraints", violations},
               {"implied_cut", report.implied_cut},
               {"recomputed", to_json(report.recomputed)},
               {"model_objective", report.model_objective},
               {"objective_gap", report.objective_gap},
               {"certified", report.certified()}};
      emit(doc, out_path, out);
      err << report.violated_constraints.size() << " violated row(s), objective gap "
          << report.objective_gap << "\n";
      return kOk;
    }

    if (serve->parsed()) {
      err << "listening on " << host << ":" << port << " (data in " << data_dir << ")\n";
      return service::serve(data_dir, host, port) == 0 ? kOk : kDataError;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace cyberseg::cli
