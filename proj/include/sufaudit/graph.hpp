#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sufaudit {

using NodeSet = std::set<std::string>;

struct GraphNode {
  std::string name;
  bool observed = true;

  bool operator==(const GraphNode&) const = default;
};

/// Directed edge (parent, child).
using Edge = std::pair<std::string, std::string>;

/// Immutable causal DAG. Node names are unique identifiers; latent nodes stay
/// in the graph with `observed == false` so identification can reason about
/// them. Construction rejects cycles, self-loops, duplicates and edges that
/// name unknown nodes.
class CausalGraph {
 public:
  CausalGraph(std::vector<GraphNode> nodes, std::vector<Edge> edges, std::string label = {});

  const std::string& label() const { return label_; }
  CausalGraph with_label(std::string label) const;

  std::size_t size() const { return nodes_.size(); }
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }

  bool contains(std::string_view name) const;
  /// Throws GraphError for unknown names.
  std::size_t index_of(std::string_view name) const;
  const std::string& name(std::size_t i) const { return nodes_[i].name; }
  bool observed(std::size_t i) const { return nodes_[i].observed; }
  const std::vector<std::size_t>& parents(std::size_t i) const { return parents_[i]; }
  const std::vector<std::size_t>& children(std::size_t i) const { return children_[i]; }

  /// Topological order with ties broken by node name, so the order depends
  /// only on the graph and not on declaration order.
  std::vector<std::size_t> topological_order() const;

  /// Membership mask of `i` and everything reachable from it.
  std::vector<bool> descendants(std::size_t i) const;
  /// Membership mask of the given nodes and all of their ancestors.
  std::vector<bool> ancestors(const std::vector<std::size_t>& nodes) const;

  CausalGraph without_outgoing(std::string_view node) const;

  /// Serialize in the edge-list DSL; parse_graph(to_dsl()) reproduces the graph.
  std::string to_dsl() const;

  bool operator==(const CausalGraph& other) const;

 private:
  std::vector<GraphNode> nodes_;
  std::vector<Edge> edges_;
  std::string label_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
};

/// Outcome of handing a statement the core grammar does not understand to a
/// DSL extension (used by the structural-model file format).
struct DslExtensionResult {
  bool handled = false;
  /// Node introduced by the statement, if any.
  std::optional<std::string> declares;
};

using DslExtension = std::function<DslExtensionResult(std::string_view statement, int line)>;

/// Parse the edge-list DSL:
///   `A -> B` (chains `A -> B -> C` allowed), `latent C[, D]`, a bare `A`
///   declares a node, `#` starts a comment, statements separated by newlines
///   or `;` (semicolons inside parentheses do not split).
CausalGraph parse_graph(std::string_view text, std::string label = {},
                        const DslExtension& extension = {});

bool is_identifier(std::string_view name);

/// Standard d-separation of node sets `x` and `y` given `z`. The three sets
/// must be disjoint.
bool d_separated(const CausalGraph& g, const NodeSet& x, const NodeSet& y, const NodeSet& z);

/// Every set of observed non-descendants of `treatment` with at most
/// `max_size` members that blocks all backdoor paths to `outcome`. Sorted by
/// size, then lexicographically. An empty result means no observed
/// adjustment set exists.
std::vector<NodeSet> backdoor_sets(const CausalGraph& g, std::string_view treatment,
                                   std::string_view outcome, std::size_t max_size = 6);

bool is_backdoor_set(const CausalGraph& g, std::string_view treatment, std::string_view outcome,
                     const NodeSet& adjustment);

/// True when `z` is a structurally valid instrument for the effect of
/// `treatment` on `outcome`: it is an ancestor of the treatment, every directed
/// path from it to the outcome passes through the treatment, and it is
/// d-separated from the outcome once the treatment's outgoing edges are cut.
bool validate_instrument(const CausalGraph& g, std::string_view z, std::string_view treatment,
                         std::string_view outcome);

}  // namespace sufaudit
