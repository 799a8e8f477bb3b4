// Command-line front end: audit, simulate, dsep and ethics subcommands.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sufaudit/audit.hpp"
#include "sufaudit/errors.hpp"
#include "sufaudit/ethics.hpp"
#include "sufaudit/graph.hpp"
#include "sufaudit/scm.hpp"

namespace {

using namespace sufaudit;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::pair<std::string, std::string> split_assignment(const std::string& text, const char* flag) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
    throw ConfigError(std::string(flag) + " expects name=value, got '" + text + "'");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) throw ConfigError(what + ": '" + text + "' is not a number");
  return v;
}

NodeSet parse_node_list(const std::string& text) {
  NodeSet out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    out.insert(item.substr(a, item.find_last_not_of(" \t") - a + 1));
  }
  return out;
}

struct AuditArgs {
  std::string config;
  std::string out;
  unsigned threads = 0;
  bool quiet = false;
};

int run_audit_command(const AuditArgs& a) {
  AuditConfig cfg = load_config(a.config);
  if (!a.out.empty()) cfg.output = a.out;
  if (a.threads > 0) cfg.options.bootstrap.threads = a.threads;
  const AuditOutcome out = run_audit(cfg);
  if (!a.quiet) std::cout << out.summary;
  if (!cfg.output) std::cout << out.json.dump(2) << "\n";
  return out.exit_code;
}

struct SimulateArgs {
  std::string model;
  std::string preset;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::vector<std::string> interventions;
  std::vector<std::string> overrides;
  bool drop_latent = false;
  bool list = false;
  bool show_model = false;
};

int run_simulate_command(const SimulateArgs& a) {
  if (a.list) {
    for (const auto& name : scenario_names()) std::cout << name << "  " << scenario_description(name) << "\n";
    return 0;
  }
  if (a.model.empty() == a.preset.empty()) throw ConfigError("give exactly one of --model or --preset");
  std::map<std::string, double> overrides;
  for (const auto& o : a.overrides) {
    const auto [k, v] = split_assignment(o, "--set");
    overrides[k] = parse_double(v, "--set " + k);
  }
  StructuralModel model = a.preset.empty() ? parse_model(read_file(a.model), a.model) : build_scenario(a.preset);
  if (!overrides.empty()) model = model.with_overrides(overrides);
  if (a.show_model) {
    std::cout << model.to_dsl();
    return 0;
  }
  if (a.out.empty()) throw ConfigError("--out is required");
  Intervention doing;
  for (const auto& d : a.interventions) {
    const auto [k, v] = split_assignment(d, "--do");
    if (v != "0" && v != "1") throw ModelError("intervention " + d + " is outside the binary domain");
    doing[k] = v == "1" ? 1 : 0;
  }
  Dataset data = doing.empty() ? simulate(model, a.n, a.seed) : simulate_do(model, doing, a.n, a.seed);
  if (a.drop_latent) data = data.without_latent();
  write_csv(data, a.out);
  std::cerr << "wrote " << data.rows() << " rows to " << a.out << "\n";
  return 0;
}

struct DsepArgs {
  std::string graph;
  std::string x;
  std::string y;
  std::string z;
};

int run_dsep_command(const DsepArgs& a) {
  const CausalGraph g = parse_graph(read_file(a.graph), a.graph);
  const bool sep = d_separated(g, parse_node_list(a.x), parse_node_list(a.y), parse_node_list(a.z));
  std::cout << (sep ? "d-separated" : "d-connected") << "\n";
  return 0;
}

struct EthicsArgs {
  std::vector<std::string> allocs;
  std::string theory;
  std::optional<double> threshold;
  std::string transform = "sqrt";
  std::string index = "gini";
};

int run_ethics_command(const EthicsArgs& a) {
  if (a.allocs.empty() || a.allocs.size() > 2) throw ConfigError("give one or two --alloc values");
  TheoryParams p;
  p.theory = theory_from_string(a.theory);
  p.threshold = a.threshold;
  p.transform = priority_transform_from_string(a.transform);
  p.index = inequality_index_from_string(a.index);
  std::vector<Allocation> allocs;
  for (const auto& s : a.allocs) {
    allocs.push_back(std::filesystem::is_regular_file(s) ? load_allocation_csv(s) : parse_allocation(s));
  }
  const char* names[] = {"A", "B"};
  for (std::size_t i = 0; i < allocs.size(); ++i) {
    std::cout << "score " << names[i] << ": " << Json(score(allocs[i], p)).dump();
    if (p.theory == Theory::Sufficientarian) std::cout << " (shortfall " << Json(shortfall(allocs[i], *p.threshold)).dump() << ")";
    std::cout << "\n";
  }
  if (allocs.size() == 2) std::cout << "preference: " << to_string(compare(allocs[0], allocs[1], p)) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal sufficientarian fairness audits"};
  app.require_subcommand(1);

  AuditArgs audit_args;
  auto* audit = app.add_subcommand("audit", "Run a fairness audit described by a JSON config");
  audit->add_option("--config", audit_args.config, "Audit config file")->required();
  audit->add_option("--out", audit_args.out, "Report path (overrides the config)");
  audit->add_option("--threads", audit_args.threads, "Bootstrap worker threads");
  audit->add_flag("--quiet", audit_args.quiet, "Do not print the summary");

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Sample a structural causal model to CSV");
  sim->add_option("--model", sim_args.model, "Model file");
  sim->add_option("--preset", sim_args.preset, "Preset model name");
  sim->add_option("--n", sim_args.n, "Number of units");
  sim->add_option("--seed", sim_args.seed, "Random seed");
  sim->add_option("--out", sim_args.out, "Output CSV path");
  sim->add_option("--do", sim_args.interventions, "Intervention node=value (repeatable)");
  sim->add_option("--set", sim_args.overrides, "Coefficient override Node.term=value (repeatable)");
  sim->add_flag("--drop-latent", sim_args.drop_latent, "Omit latent columns");
  sim->add_flag("--list-presets", sim_args.list, "List preset models");
  sim->add_flag("--print-model", sim_args.show_model, "Print the model in DSL form instead of sampling");

  DsepArgs dsep_args;
  auto* dsep = app.add_subcommand("dsep", "Test d-separation of X and Y given Z");
  dsep->add_option("--graph", dsep_args.graph, "Graph file")->required();
  dsep->add_option("--x", dsep_args.x, "Comma-separated nodes")->required();
  dsep->add_option("--y", dsep_args.y, "Comma-separated nodes")->required();
  dsep->add_option("--z", dsep_args.z, "Comma-separated conditioning nodes");

  EthicsArgs eth_args;
  auto* ethics = app.add_subcommand("ethics", "Score or compare allocations of goods");
  ethics->add_option("--alloc", eth_args.allocs, "CSV file or inline 'A:30,30,40;B:25,25' (one or two)")->required();
  ethics->add_option("--theory", eth_args.theory, "maximization, egalitarian, prioritarian or sufficientarian")
      ->required();
  ethics->add_option("--threshold", eth_args.threshold, "Sufficiency threshold");
  ethics->add_option("--transform", eth_args.transform, "Prioritarian transform: sqrt or log");
  ethics->add_option("--index", eth_args.index, "Egalitarian index: gini or variance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (audit->parsed()) return run_audit_command(audit_args);
    if (sim->parsed()) return run_simulate_command(sim_args);
    if (dsep->parsed()) return run_dsep_command(dsep_args);
    if (ethics->parsed()) return run_ethics_command(eth_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
