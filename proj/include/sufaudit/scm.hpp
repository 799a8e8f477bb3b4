#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sufaudit/dataset.hpp"
#include "sufaudit/graph.hpp"

namespace sufaudit {

enum class EquationKind { Logistic, Table };

/// Product term `weight * a * b` inside a logistic equation.
struct Interaction {
  std::string a;
  std::string b;
  double weight = 0.0;
};

/// Structural equation of one binary node. The node is 1 when its uniform
/// noise falls below P(node = 1 | parents):
///  - Logistic: logistic(intercept + sum weights[p] * p + sum interaction terms)
///  - Table: table[k], where bit j of k is the value of table_parents[j];
///    entries of 0 and 1 make the node a deterministic function of its parents.
struct NodeEquation {
  EquationKind kind = EquationKind::Logistic;
  double intercept = 0.0;
  std::map<std::string, double> weights;
  std::vector<Interaction> interactions;
  std::vector<std::string> table_parents;
  std::vector<double> table;
};

/// Binary structural causal model over a CausalGraph. Every non-root node's
/// equation references exactly its graph parents; roots default to
/// logistic(0) when no equation is given.
class StructuralModel {
 public:
  StructuralModel(CausalGraph graph, std::map<std::string, NodeEquation> equations);

  const CausalGraph& graph() const { return graph_; }
  const NodeEquation& equation(const std::string& node) const;
  const std::map<std::string, NodeEquation>& equations() const { return equations_; }

  /// P(node = 1) given values of all nodes (indexed like the graph); only
  /// the node's parents are read.
  double probability_one(std::size_t node, const std::vector<int>& values) const;

  /// Replace named coefficients: `Node.intercept`, `Node.Parent` (a weight),
  /// `Node.A*B` (an interaction) or `Node.table[k]`.
  StructuralModel with_overrides(const std::map<std::string, double>& overrides) const;
  std::vector<std::string> coefficient_names() const;

  std::string to_dsl() const;

 private:
  struct Compiled {
    std::vector<std::pair<std::size_t, double>> terms;
    std::vector<std::tuple<std::size_t, std::size_t, double>> products;
    std::vector<std::size_t> table_parents;
  };

  CausalGraph graph_;
  std::map<std::string, NodeEquation> equations_;
  std::vector<NodeEquation> by_index_;
  std::vector<Compiled> compiled_;
};

/// Graph DSL plus `node <name>: logistic(<intercept>; <parent>=<w>, <a>*<b>=<w>, ...)`
/// and `node <name>: table(<parent>, ...; <p0>, <p1>, ...)` lines.
StructuralModel parse_model(std::string_view text, std::string label = {});

/// Preset stylised systems: fig1a, fig1b, fig1b_woi, fig1c, fig1d, fig2a,
/// fig2b, fig2c, hetero. Overrides use the with_overrides naming.
StructuralModel build_scenario(const std::string& name, const std::map<std::string, double>& overrides = {});
std::vector<std::string> scenario_names();
std::string scenario_description(const std::string& name);

using Intervention = std::map<std::string, int>;

/// n units sampled in topological order. Noise for (unit, node) is a pure
/// function of (seed, unit index, node name). Latent nodes appear as columns
/// flagged latent.
Dataset simulate(const StructuralModel& model, std::size_t n, std::uint64_t seed);

/// Samples from the mutilated model in which each intervened node is held at
/// its value. Shares noise with simulate() for the same seed.
Dataset simulate_do(const StructuralModel& model, const Intervention& interventions, std::size_t n,
                    std::uint64_t seed);

inline constexpr std::size_t kEnumerationCap = 20;

/// Exact P(target = 1 | do(interventions)) by summing the mutilated model's
/// factorised joint over all binary configurations.
double exact_interventional(const StructuralModel& model, const Intervention& interventions,
                            const std::string& target);

/// Exact P(target = 1 | do(interventions), evidence).
double exact_conditional(const StructuralModel& model, const Intervention& interventions, const std::string& target,
                         const std::map<std::string, int>& evidence);

/// Per-unit potential outcomes under shared noise.
struct CounterfactualTable {
  /// Factual (observational) draw of every node, latent columns flagged.
  Dataset factual;
  std::vector<int> y1;
  std::vector<int> y0;
  std::vector<int> tau;

  double mean_tau() const;
};

CounterfactualTable counterfactual_effects(const StructuralModel& model, const std::string& treatment,
                                           const std::string& outcome, std::size_t n, std::uint64_t seed);

}  // namespace sufaudit
