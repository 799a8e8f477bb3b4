#pragma once

// Reference implementations used only by tests. They are deliberately naive
// and share no code with the library beyond the graph container.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sufaudit/dataset.hpp"
#include "sufaudit/graph.hpp"

namespace oracle {

using sufaudit::CausalGraph;
using sufaudit::NodeSet;

/// Random DAG on n nodes named N0..N{n-1}: each forward pair (in a random
/// permutation) gets an edge with probability p; each node is latent with
/// probability latent_p.
CausalGraph random_dag(std::mt19937_64& rng, std::size_t n, double p, double latent_p = 0.0);

/// Descendants of `node` (including itself) by plain DFS on the edge list.
NodeSet descendants(const CausalGraph& g, const std::string& node);

/// All simple paths between a and b in the skeleton, as node sequences.
std::vector<std::vector<std::string>> undirected_paths(const CausalGraph& g, const std::string& a,
                                                       const std::string& b);

/// Path blocking by the textbook rule.
bool path_active(const CausalGraph& g, const std::vector<std::string>& path, const NodeSet& z);

/// d-separation by enumerating every path between every pair.
bool dsep(const CausalGraph& g, const NodeSet& x, const NodeSet& y, const NodeSet& z);

/// Backdoor criterion by definition: no descendant of the treatment in z,
/// and every path from t to y that starts with an arrow into t is blocked.
bool backdoor(const CausalGraph& g, const std::string& t, const std::string& y, const NodeSet& z);

/// All backdoor sets of size <= max_size over observed non-descendants of t
/// (excluding y), ordered by size then lexicographically.
std::vector<NodeSet> all_backdoor_sets(const CausalGraph& g, const std::string& t, const std::string& y,
                                       std::size_t max_size);

/// Mean of a binary column among rows where `by` equals `value`.
double conditional_mean(const sufaudit::Dataset& d, const std::string& col, const std::string& by, int value);
double mean(const std::vector<double>& v);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace oracle
