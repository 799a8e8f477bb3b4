#include "sufaudit/scm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <set>
#include <tuple>

#include "sufaudit/bootstrap.hpp"
#include "sufaudit/errors.hpp"
#include "sufaudit/logistic.hpp"

namespace sufaudit {

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_real(std::string_view s, int line) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ModelError("syntax error on line " + std::to_string(line) + ": expected a number, got '" +
                     std::string(s) + "'");
  }
  return v;
}

}  // namespace

StructuralModel::StructuralModel(CausalGraph graph, std::map<std::string, NodeEquation> equations)
    : graph_(std::move(graph)), equations_(std::move(equations)) {
  for (const auto& [name, eq] : equations_) {
    if (!graph_.contains(name)) throw ModelError("equation given for unknown node '" + name + "'");
  }
  by_index_.resize(graph_.size());
  compiled_.resize(graph_.size());
  for (std::size_t i = 0; i < graph_.size(); ++i) {
    const std::string& name = graph_.name(i);
    std::set<std::string> parents;
    for (std::size_t p : graph_.parents(i)) parents.insert(graph_.name(p));
    auto it = equations_.find(name);
    if (it == equations_.end()) {
      if (!parents.empty()) throw ModelError("node '" + name + "' has parents but no structural equation");
      it = equations_.emplace(name, NodeEquation{}).first;
    }
    const NodeEquation& eq = it->second;
    Compiled& c = compiled_[i];
    std::set<std::string> referenced;
    auto parent_index = [&](const std::string& p) {
      if (!parents.count(p)) {
        throw ModelError("equation for '" + name + "' references '" + p + "', which is not a parent in the graph");
      }
      referenced.insert(p);
      return graph_.index_of(p);
    };
    if (eq.kind == EquationKind::Logistic) {
      if (!std::isfinite(eq.intercept)) throw ModelError("non-finite intercept for '" + name + "'");
      for (const auto& [p, w] : eq.weights) {
        if (!std::isfinite(w)) throw ModelError("non-finite weight " + name + "." + p);
        c.terms.emplace_back(parent_index(p), w);
      }
      for (const auto& term : eq.interactions) {
        if (term.a == term.b) throw ModelError("interaction " + term.a + "*" + term.b + " repeats a parent");
        c.products.emplace_back(parent_index(term.a), parent_index(term.b), term.weight);
      }
    } else {
      if (eq.table.size() != (std::size_t{1} << eq.table_parents.size())) {
        throw ModelError("table for '" + name + "' needs " +
                         std::to_string(std::size_t{1} << eq.table_parents.size()) + " entries");
      }
      for (double p : eq.table) {
        if (!(p >= 0.0 && p <= 1.0)) throw ModelError("table entry outside [0, 1] for '" + name + "'");
      }
      for (const auto& p : eq.table_parents) c.table_parents.push_back(parent_index(p));
      if (referenced.size() != eq.table_parents.size()) {
        throw ModelError("table for '" + name + "' lists a parent twice");
      }
    }
    if (referenced != parents) {
      std::string missing;
      for (const auto& p : parents) {
        if (!referenced.count(p)) missing += (missing.empty() ? "" : ", ") + p;
      }
      throw ModelError("equation for '" + name + "' does not reference parent(s) " + missing);
    }
  }
  for (std::size_t i = 0; i < graph_.size(); ++i) by_index_[i] = equations_.at(graph_.name(i));
}

const NodeEquation& StructuralModel::equation(const std::string& node) const {
  auto it = equations_.find(node);
  if (it == equations_.end()) throw ModelError("unknown node '" + node + "'");
  return it->second;
}

double StructuralModel::probability_one(std::size_t node, const std::vector<int>& values) const {
  const NodeEquation& eq = by_index_[node];
  const Compiled& c = compiled_[node];
  if (eq.kind == EquationKind::Table) {
    std::size_t k = 0;
    for (std::size_t j = 0; j < c.table_parents.size(); ++j) {
      if (values[c.table_parents[j]]) k |= std::size_t{1} << j;
    }
    return eq.table[k];
  }
  double eta = eq.intercept;
  for (const auto& [p, w] : c.terms) eta += w * values[p];
  for (const auto& [a, b, w] : c.products) eta += w * values[a] * values[b];
  return logistic(eta).p();
}

StructuralModel StructuralModel::with_overrides(const std::map<std::string, double>& overrides) const {
  auto eqs = equations_;
  for (const auto& [key, value] : overrides) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) throw ModelError("coefficient name '" + key + "' must look like Node.term");
    const std::string node = key.substr(0, dot);
    const std::string term = key.substr(dot + 1);
    auto it = eqs.find(node);
    if (it == eqs.end()) throw ModelError("override '" + key + "': unknown node '" + node + "'");
    NodeEquation& eq = it->second;
    bool applied = false;
    if (eq.kind == EquationKind::Logistic) {
      if (term == "intercept") {
        eq.intercept = value;
        applied = true;
      } else if (const auto star = term.find('*'); star != std::string::npos) {
        const std::string a = term.substr(0, star);
        const std::string b = term.substr(star + 1);
        for (auto& inter : eq.interactions) {
          if ((inter.a == a && inter.b == b) || (inter.a == b && inter.b == a)) {
            inter.weight = value;
            applied = true;
          }
        }
      } else if (auto w = eq.weights.find(term); w != eq.weights.end()) {
        w->second = value;
        applied = true;
      }
    } else if (term.rfind("table[", 0) == 0 && term.back() == ']') {
      std::size_t k = 0;
      const auto [ptr, ec] = std::from_chars(term.data() + 6, term.data() + term.size() - 1, k);
      if (ec == std::errc() && ptr == term.data() + term.size() - 1 && k < eq.table.size()) {
        eq.table[k] = value;
        applied = true;
      }
    }
    if (!applied) throw ModelError("override '" + key + "' names no coefficient of the model");
  }
  return StructuralModel(graph_, std::move(eqs));
}

std::vector<std::string> StructuralModel::coefficient_names() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < graph_.size(); ++i) {
    const std::string& n = graph_.name(i);
    const NodeEquation& eq = by_index_[i];
    if (eq.kind == EquationKind::Logistic) {
      out.push_back(n + ".intercept");
      for (const auto& [p, w] : eq.weights) out.push_back(n + "." + p);
      for (const auto& t : eq.interactions) out.push_back(n + "." + t.a + "*" + t.b);
    } else {
      for (std::size_t k = 0; k < eq.table.size(); ++k) out.push_back(n + ".table[" + std::to_string(k) + "]");
    }
  }
  return out;
}

std::string StructuralModel::to_dsl() const {
  std::string out = graph_.to_dsl();
  for (std::size_t i = 0; i < graph_.size(); ++i) {
    const NodeEquation& eq = by_index_[i];
    out += "node " + graph_.name(i) + ": ";
    if (eq.kind == EquationKind::Logistic) {
      out += "logistic(" + format_double(eq.intercept);
      bool first = true;
      auto sep = [&] {
        out += first ? "; " : ", ";
        first = false;
      };
      for (const auto& [p, w] : eq.weights) {
        sep();
        out += p + "=" + format_double(w);
      }
      for (const auto& t : eq.interactions) {
        sep();
        out += t.a + "*" + t.b + "=" + format_double(t.weight);
      }
      out += ")\n";
    } else {
      out += "table(";
      for (std::size_t j = 0; j < eq.table_parents.size(); ++j) out += (j ? ", " : "") + eq.table_parents[j];
      out += ";";
      for (std::size_t k = 0; k < eq.table.size(); ++k) out += (k ? ", " : " ") + format_double(eq.table[k]);
      out += ")\n";
    }
  }
  return out;
}

StructuralModel parse_model(std::string_view text, std::string label) {
  std::map<std::string, NodeEquation> equations;
  auto extension = [&](std::string_view stmt, int line) -> DslExtensionResult {
    if (stmt.rfind("node ", 0) != 0 && stmt.rfind("node\t", 0) != 0) return {};
    auto fail = [line](const std::string& what) -> ModelError {
      return ModelError("syntax error on line " + std::to_string(line) + ": " + what);
    };
    const auto colon = stmt.find(':');
    if (colon == std::string_view::npos) throw fail("expected 'node <name>: <equation>'");
    const std::string name(trim(stmt.substr(5, colon - 5)));
    if (!is_identifier(name)) throw fail("invalid node name '" + name + "'");
    const std::string_view body = trim(stmt.substr(colon + 1));
    const auto open = body.find('(');
    if (open == std::string_view::npos || body.back() != ')') throw fail("expected logistic(...) or table(...)");
    const std::string_view kind = trim(body.substr(0, open));
    const std::string_view args = body.substr(open + 1, body.size() - open - 2);
    const auto semi = args.find(';');
    const std::string_view head = semi == std::string_view::npos ? args : args.substr(0, semi);
    const std::string_view tail = semi == std::string_view::npos ? std::string_view{} : args.substr(semi + 1);

    NodeEquation eq;
    if (kind == "logistic") {
      eq.kind = EquationKind::Logistic;
      eq.intercept = parse_real(head, line);
      if (!trim(tail).empty()) {
        for (std::string_view term : split(tail, ',')) {
          const auto eqpos = term.find('=');
          if (eqpos == std::string_view::npos) throw fail("expected parent=weight, got '" + std::string(term) + "'");
          const std::string_view lhs = trim(term.substr(0, eqpos));
          const double w = parse_real(term.substr(eqpos + 1), line);
          if (const auto star = lhs.find('*'); star != std::string_view::npos) {
            const std::string a(trim(lhs.substr(0, star)));
            const std::string b(trim(lhs.substr(star + 1)));
            if (!is_identifier(a) || !is_identifier(b)) throw fail("bad interaction '" + std::string(lhs) + "'");
            eq.interactions.push_back({a, b, w});
          } else {
            if (!is_identifier(lhs)) throw fail("bad parent name '" + std::string(lhs) + "'");
            if (!eq.weights.emplace(std::string(lhs), w).second) {
              throw fail("weight for '" + std::string(lhs) + "' given twice");
            }
          }
        }
      }
    } else if (kind == "table") {
      eq.kind = EquationKind::Table;
      if (semi == std::string_view::npos) throw fail("table(...) needs '<parents>; <probabilities>'");
      if (!trim(head).empty()) {
        for (std::string_view p : split(head, ',')) {
          if (!is_identifier(p)) throw fail("bad parent name '" + std::string(p) + "'");
          eq.table_parents.emplace_back(p);
        }
      }
      for (std::string_view p : split(tail, ',')) eq.table.push_back(parse_real(p, line));
    } else {
      throw fail("unknown equation kind '" + std::string(kind) + "'");
    }
    if (!equations.emplace(name, std::move(eq)).second) throw fail("second equation for node '" + name + "'");
    return {true, name};
  };
  CausalGraph graph = parse_graph(text, std::move(label), extension);
  return StructuralModel(std::move(graph), std::move(equations));
}

namespace {

// Sentinel for "not intervened".
constexpr int kFree = -1;

std::vector<int> intervention_vector(const StructuralModel& model, const Intervention& interventions) {
  std::vector<int> fixed(model.graph().size(), kFree);
  for (const auto& [node, value] : interventions) {
    if (value != 0 && value != 1) {
      throw ModelError("intervention " + node + "=" + std::to_string(value) + " is outside the binary domain");
    }
    fixed[model.graph().index_of(node)] = value;
  }
  return fixed;
}

std::vector<std::uint64_t> noise_keys(const StructuralModel& model, std::uint64_t seed) {
  std::vector<std::uint64_t> keys(model.graph().size());
  for (std::size_t i = 0; i < keys.size(); ++i) keys[i] = mix_seed(seed, stable_hash(model.graph().name(i)));
  return keys;
}

void evaluate_unit(const StructuralModel& model, const std::vector<std::size_t>& order,
                   const std::vector<std::uint64_t>& keys, const std::vector<int>& fixed, std::uint64_t unit,
                   std::vector<int>& values) {
  for (std::size_t node : order) {
    if (fixed[node] != kFree) {
      values[node] = fixed[node];
      continue;
    }
    const double u = unit_uniform(mix_seed(keys[node], unit));
    values[node] = u < model.probability_one(node, values) ? 1 : 0;
  }
}

Dataset to_dataset(const StructuralModel& model, const std::vector<std::vector<double>>& cols) {
  std::vector<std::pair<std::string, Column>> named;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    Column c = Column::binary(cols[i]);
    c.latent = !model.graph().observed(i);
    named.emplace_back(model.graph().name(i), std::move(c));
  }
  return Dataset(std::move(named));
}

Dataset sample(const StructuralModel& model, const std::vector<int>& fixed, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ModelError("simulation needs n >= 1");
  const auto order = model.graph().topological_order();
  const auto keys = noise_keys(model, seed);
  std::vector<std::vector<double>> cols(model.graph().size(), std::vector<double>(n));
  std::vector<int> values(model.graph().size(), 0);
  for (std::size_t u = 0; u < n; ++u) {
    evaluate_unit(model, order, keys, fixed, u, values);
    for (std::size_t i = 0; i < values.size(); ++i) cols[i][u] = values[i];
  }
  return to_dataset(model, cols);
}

}  // namespace

Dataset simulate(const StructuralModel& model, std::size_t n, std::uint64_t seed) {
  return sample(model, std::vector<int>(model.graph().size(), kFree), n, seed);
}

Dataset simulate_do(const StructuralModel& model, const Intervention& interventions, std::size_t n,
                    std::uint64_t seed) {
  return sample(model, intervention_vector(model, interventions), n, seed);
}

namespace {

// P(event, evidence | do) and P(evidence | do) by depth-first enumeration
// over the ancestors of the queried nodes in the mutilated graph.
std::pair<double, double> enumerate(const StructuralModel& model, const Intervention& interventions,
                                    const std::string& target, const std::map<std::string, int>& evidence) {
  const CausalGraph& g = model.graph();
  if (g.size() > kEnumerationCap) {
    throw ModelError("exact enumeration is capped at " + std::to_string(kEnumerationCap) + " nodes; model has " +
                     std::to_string(g.size()));
  }
  const std::vector<int> fixed = intervention_vector(model, interventions);
  const std::size_t t = g.index_of(target);
  if (fixed[t] != kFree) throw ModelError("target '" + target + "' is itself intervened on");

  std::vector<int> required(g.size(), kFree);
  std::vector<std::size_t> queried{t};
  for (const auto& [node, value] : evidence) {
    if (value != 0 && value != 1) throw ModelError("evidence " + node + " must be 0 or 1");
    const std::size_t i = g.index_of(node);
    required[i] = value;
    queried.push_back(i);
  }

  // Ancestors in the mutilated graph: stop at intervened nodes.
  std::vector<bool> relevant(g.size(), false);
  std::vector<std::size_t> stack;
  for (std::size_t q : queried) {
    if (!relevant[q]) {
      relevant[q] = true;
      stack.push_back(q);
    }
  }
  while (!stack.empty()) {
    const std::size_t n = stack.back();
    stack.pop_back();
    if (fixed[n] != kFree) continue;
    for (std::size_t p : g.parents(n)) {
      if (!relevant[p]) {
        relevant[p] = true;
        stack.push_back(p);
      }
    }
  }
  std::vector<std::size_t> order;
  for (std::size_t n : g.topological_order()) {
    if (relevant[n]) order.push_back(n);
  }

  std::vector<int> values(g.size(), 0);
  double joint = 0.0;
  double marginal = 0.0;
  std::function<void(std::size_t, double)> walk = [&](std::size_t k, double prob) {
    if (prob == 0.0) return;
    if (k == order.size()) {
      marginal += prob;
      if (values[t] == 1) joint += prob;
      return;
    }
    const std::size_t node = order[k];
    if (fixed[node] != kFree) {
      if (required[node] != kFree && required[node] != fixed[node]) return;
      values[node] = fixed[node];
      walk(k + 1, prob);
      return;
    }
    const double p1 = model.probability_one(node, values);
    for (int v : {1, 0}) {
      if (required[node] != kFree && required[node] != v) continue;
      values[node] = v;
      walk(k + 1, prob * (v ? p1 : 1.0 - p1));
    }
  };
  walk(0, 1.0);
  return {joint, marginal};
}

}  // namespace

double exact_interventional(const StructuralModel& model, const Intervention& interventions,
                            const std::string& target) {
  return enumerate(model, interventions, target, {}).first;
}

double exact_conditional(const StructuralModel& model, const Intervention& interventions, const std::string& target,
                         const std::map<std::string, int>& evidence) {
  const auto [joint, marginal] = enumerate(model, interventions, target, evidence);
  if (marginal <= 0.0) throw ModelError("conditioning event has probability zero");
  return joint / marginal;
}

double CounterfactualTable::mean_tau() const {
  if (tau.empty()) return 0.0;
  long long sum = 0;
  for (int v : tau) sum += v;
  return static_cast<double>(sum) / static_cast<double>(tau.size());
}

CounterfactualTable counterfactual_effects(const StructuralModel& model, const std::string& treatment,
                                           const std::string& outcome, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ModelError("simulation needs n >= 1");
  const CausalGraph& g = model.graph();
  const std::size_t t = g.index_of(treatment);
  const std::size_t y = g.index_of(outcome);
  if (t == y) throw ModelError("treatment and outcome must differ");

  const auto order = g.topological_order();
  const auto keys = noise_keys(model, seed);
  std::vector<int> free(g.size(), kFree);
  std::vector<int> treat1 = free;
  std::vector<int> treat0 = free;
  treat1[t] = 1;
  treat0[t] = 0;

  std::vector<std::vector<double>> cols(g.size(), std::vector<double>(n));
  CounterfactualTable table;
  table.y1.resize(n);
  table.y0.resize(n);
  table.tau.resize(n);
  std::vector<int> values(g.size(), 0);
  for (std::size_t u = 0; u < n; ++u) {
    evaluate_unit(model, order, keys, free, u, values);
    for (std::size_t i = 0; i < values.size(); ++i) cols[i][u] = values[i];
    evaluate_unit(model, order, keys, treat1, u, values);
    table.y1[u] = values[y];
    evaluate_unit(model, order, keys, treat0, u, values);
    table.y0[u] = values[y];
    table.tau[u] = table.y1[u] - table.y0[u];
  }
  table.factual = to_dataset(model, cols);
  return table;
}

}  // namespace sufaudit
