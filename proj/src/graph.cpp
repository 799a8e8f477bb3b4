#include "sufaudit/graph.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <queue>
#include <sstream>

#include "sufaudit/errors.hpp"

namespace sufaudit {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string syntax_error(int line, std::string_view what) {
  std::ostringstream os;
  os << "syntax error on line " << line << ": " << what;
  return os.str();
}

// Splits one line into statements at top-level semicolons.
std::vector<std::string_view> split_statements(std::string_view line) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ';' && depth == 0) {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  out.push_back(line.substr(start));
  return out;
}

}  // namespace

bool is_identifier(std::string_view name) {
  if (name.empty()) return false;
  auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(name.front())) return false;
  return std::all_of(name.begin(), name.end(), [&](char c) { return alpha(c) || digit(c); });
}

CausalGraph::CausalGraph(std::vector<GraphNode> nodes, std::vector<Edge> edges, std::string label)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), label_(std::move(label)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!is_identifier(nodes_[i].name)) {
      throw GraphError("invalid node name '" + nodes_[i].name + "'");
    }
    if (!index_.emplace(nodes_[i].name, i).second) {
      throw GraphError("duplicate node '" + nodes_[i].name + "'");
    }
  }
  parents_.resize(nodes_.size());
  children_.resize(nodes_.size());
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& [from, to] : edges_) {
    auto f = index_.find(from);
    auto t = index_.find(to);
    if (f == index_.end()) throw GraphError("edge " + from + " -> " + to + ": unknown node '" + from + "'");
    if (t == index_.end()) throw GraphError("edge " + from + " -> " + to + ": unknown node '" + to + "'");
    if (f->second == t->second) throw GraphError("cycle detected: " + from + " -> " + to);
    if (!seen.emplace(f->second, t->second).second) {
      throw GraphError("duplicate edge " + from + " -> " + to);
    }
    children_[f->second].push_back(t->second);
    parents_[t->second].push_back(f->second);
  }

  // Iterative DFS with colours; a grey successor closes a cycle.
  enum class Colour { White, Grey, Black };
  std::vector<Colour> colour(nodes_.size(), Colour::White);
  for (std::size_t root = 0; root < nodes_.size(); ++root) {
    if (colour[root] != Colour::White) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    colour[root] = Colour::Grey;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next == children_[node].size()) {
        colour[node] = Colour::Black;
        stack.pop_back();
        continue;
      }
      const std::size_t child = children_[node][next++];
      if (colour[child] == Colour::Grey) {
        std::vector<std::string> cycle;
        for (std::size_t k = stack.size(); k-- > 0;) {
          cycle.push_back(nodes_[stack[k].first].name);
          if (stack[k].first == child) break;
        }
        std::reverse(cycle.begin(), cycle.end());
        std::string msg = "cycle detected: ";
        for (const auto& n : cycle) msg += n + " -> ";
        msg += nodes_[child].name;
        throw GraphError(msg);
      }
      if (colour[child] == Colour::White) {
        colour[child] = Colour::Grey;
        stack.emplace_back(child, 0);
      }
    }
  }
}

CausalGraph CausalGraph::with_label(std::string label) const {
  CausalGraph copy = *this;
  copy.label_ = std::move(label);
  return copy;
}

bool CausalGraph::contains(std::string_view name) const {
  return index_.find(std::string(name)) != index_.end();
}

std::size_t CausalGraph::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw GraphError("unknown node '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::size_t> CausalGraph::topological_order() const {
  std::vector<std::size_t> indegree(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) indegree[i] = parents_[i].size();
  auto later = [this](std::size_t a, std::size_t b) { return nodes_[a].name > nodes_[b].name; };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> ready(later);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  std::vector<std::size_t> order;
  order.reserve(nodes_.size());
  while (!ready.empty()) {
    const std::size_t n = ready.top();
    ready.pop();
    order.push_back(n);
    for (std::size_t c : children_[n]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  return order;
}

std::vector<bool> CausalGraph::descendants(std::size_t i) const {
  std::vector<bool> mark(nodes_.size(), false);
  std::vector<std::size_t> stack{i};
  mark[i] = true;
  while (!stack.empty()) {
    const std::size_t n = stack.back();
    stack.pop_back();
    for (std::size_t c : children_[n]) {
      if (!mark[c]) {
        mark[c] = true;
        stack.push_back(c);
      }
    }
  }
  return mark;
}

std::vector<bool> CausalGraph::ancestors(const std::vector<std::size_t>& start) const {
  std::vector<bool> mark(nodes_.size(), false);
  std::vector<std::size_t> stack;
  for (std::size_t s : start) {
    if (!mark[s]) {
      mark[s] = true;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    const std::size_t n = stack.back();
    stack.pop_back();
    for (std::size_t p : parents_[n]) {
      if (!mark[p]) {
        mark[p] = true;
        stack.push_back(p);
      }
    }
  }
  return mark;
}

CausalGraph CausalGraph::without_outgoing(std::string_view node) const {
  index_of(node);
  std::vector<Edge> kept;
  kept.reserve(edges_.size());
  for (const auto& e : edges_) {
    if (e.first != node) kept.push_back(e);
  }
  return CausalGraph(nodes_, std::move(kept), label_);
}

std::string CausalGraph::to_dsl() const {
  std::string out;
  for (const auto& n : nodes_) {
    out += n.observed ? n.name : "latent " + n.name;
    out += '\n';
  }
  for (const auto& [from, to] : edges_) out += from + " -> " + to + '\n';
  return out;
}

bool CausalGraph::operator==(const CausalGraph& other) const {
  return nodes_ == other.nodes_ && edges_ == other.edges_ && label_ == other.label_;
}

CausalGraph parse_graph(std::string_view text, std::string label, const DslExtension& extension) {
  std::vector<GraphNode> nodes;
  std::vector<Edge> edges;
  std::unordered_map<std::string, std::size_t> index;
  std::set<std::string> explicitly_declared;

  auto ensure = [&](const std::string& name) -> GraphNode& {
    auto [it, inserted] = index.emplace(name, nodes.size());
    if (inserted) nodes.push_back({name, true});
    return nodes[it->second];
  };
  auto declare = [&](const std::string& name, int line) -> GraphNode& {
    if (!explicitly_declared.insert(name).second) {
      throw GraphError(syntax_error(line, "duplicate node declaration '" + name + "'"));
    }
    return ensure(name);
  };

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    for (std::string_view raw : split_statements(line)) {
      const std::string_view stmt = trim(raw);
      if (stmt.empty()) continue;

      if (stmt.find("->") != std::string_view::npos) {
        std::vector<std::string> chain;
        std::size_t start = 0;
        while (true) {
          const std::size_t arrow = stmt.find("->", start);
          const std::string_view part =
              trim(stmt.substr(start, arrow == std::string_view::npos ? std::string_view::npos : arrow - start));
          if (!is_identifier(part)) {
            throw GraphError(syntax_error(line_no, "expected node name, got '" + std::string(part) + "'"));
          }
          chain.emplace_back(part);
          if (arrow == std::string_view::npos) break;
          start = arrow + 2;
        }
        for (const auto& n : chain) ensure(n);
        for (std::size_t k = 0; k + 1 < chain.size(); ++k) edges.emplace_back(chain[k], chain[k + 1]);
        continue;
      }

      if (stmt.substr(0, 7) == "latent " || stmt.substr(0, 7) == "latent\t") {
        std::string_view rest = stmt.substr(7);
        std::size_t start = 0;
        while (start <= rest.size()) {
          const std::size_t comma = std::min(rest.find(',', start), rest.size());
          const std::string_view part = trim(rest.substr(start, comma - start));
          if (!is_identifier(part)) {
            throw GraphError(syntax_error(line_no, "expected node name after 'latent', got '" +
                                                       std::string(part) + "'"));
          }
          declare(std::string(part), line_no).observed = false;
          start = comma + 1;
        }
        continue;
      }

      if (is_identifier(stmt)) {
        declare(std::string(stmt), line_no);
        continue;
      }

      if (extension) {
        DslExtensionResult r = extension(stmt, line_no);
        if (r.handled) {
          if (r.declares) ensure(*r.declares);
          continue;
        }
      }
      throw GraphError(syntax_error(line_no, "unrecognised statement '" + std::string(stmt) + "'"));
    }
    if (eol == text.size()) break;
  }
  return CausalGraph(std::move(nodes), std::move(edges), std::move(label));
}

namespace {

std::vector<std::size_t> resolve(const CausalGraph& g, const NodeSet& names) {
  std::vector<std::size_t> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(g.index_of(n));
  return out;
}

// Reachability ("Bayes ball"): a trail is active iff every collider on it is
// in z or has a descendant in z, and no other node on it is in z.
bool d_separated_idx(const CausalGraph& g, const std::vector<std::size_t>& x,
                     const std::vector<bool>& in_y, const std::vector<bool>& in_z) {
  const std::size_t n = g.size();
  std::vector<std::size_t> zs;
  for (std::size_t i = 0; i < n; ++i) {
    if (in_z[i]) zs.push_back(i);
  }
  const std::vector<bool> z_anc = g.ancestors(zs);

  // Direction: 0 = arrived from a child (moving up), 1 = arrived from a parent.
  std::vector<std::array<bool, 2>> visited(n, {false, false});
  std::deque<std::pair<std::size_t, int>> queue;
  for (std::size_t s : x) queue.emplace_back(s, 0);
  while (!queue.empty()) {
    const auto [node, dir] = queue.front();
    queue.pop_front();
    if (visited[node][dir]) continue;
    visited[node][dir] = true;
    if (!in_z[node] && in_y[node]) return false;
    if (dir == 0) {
      if (in_z[node]) continue;
      for (std::size_t p : g.parents(node)) queue.emplace_back(p, 0);
      for (std::size_t c : g.children(node)) queue.emplace_back(c, 1);
    } else {
      if (!in_z[node]) {
        for (std::size_t c : g.children(node)) queue.emplace_back(c, 1);
      }
      if (z_anc[node]) {
        for (std::size_t p : g.parents(node)) queue.emplace_back(p, 0);
      }
    }
  }
  return true;
}

}  // namespace

bool d_separated(const CausalGraph& g, const NodeSet& x, const NodeSet& y, const NodeSet& z) {
  const auto xi = resolve(g, x);
  const auto yi = resolve(g, y);
  const auto zi = resolve(g, z);
  std::vector<bool> in_y(g.size(), false);
  std::vector<bool> in_z(g.size(), false);
  std::vector<bool> in_x(g.size(), false);
  for (std::size_t i : xi) in_x[i] = true;
  for (std::size_t i : yi) {
    if (in_x[i]) throw GraphError("d_separated: node '" + g.name(i) + "' appears in both x and y");
    in_y[i] = true;
  }
  for (std::size_t i : zi) {
    if (in_x[i] || in_y[i]) {
      throw GraphError("d_separated: conditioning node '" + g.name(i) + "' overlaps x or y");
    }
    in_z[i] = true;
  }
  return d_separated_idx(g, xi, in_y, in_z);
}

bool is_backdoor_set(const CausalGraph& g, std::string_view treatment, std::string_view outcome,
                     const NodeSet& adjustment) {
  const std::size_t t = g.index_of(treatment);
  g.index_of(outcome);
  const auto desc = g.descendants(t);
  for (const auto& a : adjustment) {
    if (desc[g.index_of(a)]) return false;
  }
  return d_separated(g.without_outgoing(treatment), {std::string(treatment)}, {std::string(outcome)},
                     adjustment);
}

std::vector<NodeSet> backdoor_sets(const CausalGraph& g, std::string_view treatment,
                                   std::string_view outcome, std::size_t max_size) {
  const std::size_t t = g.index_of(treatment);
  const std::size_t y = g.index_of(outcome);
  if (t == y) throw GraphError("backdoor_sets: treatment and outcome are the same node");

  const CausalGraph cut = g.without_outgoing(treatment);
  const auto desc = g.descendants(t);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i != y && !desc[i] && g.observed(i)) candidates.push_back(i);
  }
  std::sort(candidates.begin(), candidates.end(),
            [&](std::size_t a, std::size_t b) { return g.name(a) < g.name(b); });

  const std::vector<std::size_t> xs{t};
  std::vector<bool> in_y(g.size(), false);
  in_y[y] = true;
  std::vector<NodeSet> found;
  const std::size_t limit = std::min(max_size, candidates.size());
  // Lexicographic combinations of the name-sorted candidates enumerate sets in
  // the required (size, lexicographic) order.
  for (std::size_t k = 0; k <= limit; ++k) {
    std::vector<std::size_t> pick(k);
    for (std::size_t i = 0; i < k; ++i) pick[i] = i;
    while (true) {
      std::vector<bool> in_z(g.size(), false);
      for (std::size_t p : pick) in_z[candidates[p]] = true;
      if (d_separated_idx(cut, xs, in_y, in_z)) {
        NodeSet s;
        for (std::size_t p : pick) s.insert(g.name(candidates[p]));
        found.push_back(std::move(s));
      }
      std::size_t i = k;
      while (i > 0 && pick[i - 1] == candidates.size() - k + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return found;
}

bool validate_instrument(const CausalGraph& g, std::string_view z, std::string_view treatment,
                         std::string_view outcome) {
  const std::size_t zi = g.index_of(z);
  const std::size_t ti = g.index_of(treatment);
  const std::size_t yi = g.index_of(outcome);
  if (zi == ti || zi == yi || ti == yi) {
    throw GraphError("validate_instrument: instrument, treatment and outcome must be distinct");
  }

  if (!g.ancestors({ti})[zi]) return false;

  // Directed reachability from z to the outcome that never enters the treatment.
  std::vector<bool> seen(g.size(), false);
  std::vector<std::size_t> stack{zi};
  seen[zi] = true;
  while (!stack.empty()) {
    const std::size_t n = stack.back();
    stack.pop_back();
    for (std::size_t c : g.children(n)) {
      if (c == ti || seen[c]) continue;
      if (c == yi) return false;
      seen[c] = true;
      stack.push_back(c);
    }
  }

  return d_separated(g.without_outgoing(treatment), {std::string(z)}, {std::string(outcome)}, {});
}

}  // namespace sufaudit
