#include "sufaudit/ethics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "sufaudit/dataset.hpp"
#include "sufaudit/errors.hpp"

namespace sufaudit {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double sum_sorted(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

std::vector<double> Allocation::pooled() const {
  std::vector<double> out;
  for (const auto& [name, goods] : populations) out.insert(out.end(), goods.begin(), goods.end());
  std::sort(out.begin(), out.end());
  return out;
}

const char* to_string(Theory t) {
  switch (t) {
    case Theory::Maximization: return "maximization";
    case Theory::Egalitarian: return "egalitarian";
    case Theory::Prioritarian: return "prioritarian";
    case Theory::Sufficientarian: return "sufficientarian";
  }
  return "maximization";
}

Theory theory_from_string(const std::string& text) {
  for (Theory t : {Theory::Maximization, Theory::Egalitarian, Theory::Prioritarian, Theory::Sufficientarian}) {
    if (text == to_string(t)) return t;
  }
  throw ConfigError("unknown theory '" + text +
                    "' (expected maximization, egalitarian, prioritarian or sufficientarian)");
}

PriorityTransform priority_transform_from_string(const std::string& text) {
  if (text == "sqrt") return PriorityTransform::Sqrt;
  if (text == "log") return PriorityTransform::Log;
  throw ConfigError("unknown priority transform '" + text + "' (expected sqrt or log)");
}

InequalityIndex inequality_index_from_string(const std::string& text) {
  if (text == "gini") return InequalityIndex::Gini;
  if (text == "variance") return InequalityIndex::Variance;
  throw ConfigError("unknown inequality index '" + text + "' (expected gini or variance)");
}

const char* to_string(Preference p) {
  switch (p) {
    case Preference::A: return "A";
    case Preference::B: return "B";
    case Preference::Indifferent: return "indifferent";
  }
  return "indifferent";
}

void validate(const Allocation& alloc) {
  if (alloc.populations.empty()) throw ConfigError("allocation has no populations");
  for (const auto& [name, goods] : alloc.populations) {
    if (goods.empty()) throw ConfigError("population '" + name + "' is empty");
    for (double g : goods) {
      if (!std::isfinite(g)) throw ConfigError("population '" + name + "' has a non-finite good");
    }
  }
}

double gini(const std::vector<double>& goods) {
  std::vector<double> v = goods;
  std::sort(v.begin(), v.end());
  if (v.empty()) throw ConfigError("gini of an empty set");
  if (v.front() < 0.0) throw ConfigError("gini needs non-negative goods");
  const double total = sum_sorted(v);
  if (total == 0.0) return 0.0;
  const double n = static_cast<double>(v.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) acc += (2.0 * static_cast<double>(i + 1) - n - 1.0) * v[i];
  return acc / (n * total);
}

double variance(const std::vector<double>& goods) {
  if (goods.empty()) throw ConfigError("variance of an empty set");
  std::vector<double> v = goods;
  std::sort(v.begin(), v.end());
  const double mean = sum_sorted(v) / static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(v.size());
}

double score(const Allocation& alloc, const TheoryParams& params) {
  validate(alloc);
  if (params.theory == Theory::Sufficientarian) {
    if (!params.threshold) throw ConfigError("the sufficientarian theory needs a threshold");
    if (!std::isfinite(*params.threshold)) throw ConfigError("threshold must be finite");
  } else if (params.threshold) {
    throw ConfigError(std::string("a threshold applies only to the sufficientarian theory, not ") +
                      to_string(params.theory));
  }
  const std::vector<double> v = alloc.pooled();
  switch (params.theory) {
    case Theory::Maximization:
      return sum_sorted(v);
    case Theory::Egalitarian:
      return -(params.index == InequalityIndex::Gini ? gini(v) : variance(v));
    case Theory::Prioritarian: {
      double acc = 0.0;
      for (double x : v) {
        if (params.transform == PriorityTransform::Sqrt) {
          if (x < 0.0) throw ConfigError("sqrt priority weighting needs non-negative goods");
          acc += std::sqrt(x);
        } else {
          if (x <= 0.0) throw ConfigError("log priority weighting needs positive goods");
          acc += std::log(x);
        }
      }
      return acc;
    }
    case Theory::Sufficientarian:
      return static_cast<double>(std::count_if(v.begin(), v.end(), [&](double x) { return x >= *params.threshold; }));
  }
  return 0.0;
}

double shortfall(const Allocation& alloc, double threshold) {
  validate(alloc);
  double acc = 0.0;
  for (double x : alloc.pooled()) acc += std::max(0.0, threshold - x);
  return acc;
}

Preference compare(const Allocation& a, const Allocation& b, const TheoryParams& params) {
  const double sa = score(a, params);
  const double sb = score(b, params);
  if (sa > sb) return Preference::A;
  if (sb > sa) return Preference::B;
  return Preference::Indifferent;
}

Allocation parse_allocation(std::string_view text) {
  Allocation out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(';', start), text.size());
    const std::string_view part = trim(text.substr(start, end - start));
    start = end + 1;
    if (part.empty()) continue;
    const auto colon = part.find(':');
    if (colon == std::string_view::npos) {
      throw ConfigError("allocation entry '" + std::string(part) + "' must look like name:g1,g2,...");
    }
    const std::string name(trim(part.substr(0, colon)));
    if (name.empty()) throw ConfigError("allocation entry with an empty population name");
    std::vector<double> goods;
    std::string_view rest = part.substr(colon + 1);
    std::size_t s = 0;
    while (s <= rest.size()) {
      const std::size_t e = std::min(rest.find(',', s), rest.size());
      const std::string_view cell = trim(rest.substr(s, e - s));
      s = e + 1;
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ConfigError("population '" + name + "': '" + std::string(cell) + "' is not a number");
      }
      goods.push_back(v);
    }
    auto& dest = out.populations[name];
    dest.insert(dest.end(), goods.begin(), goods.end());
  }
  validate(out);
  return out;
}

Allocation load_allocation_csv(const std::filesystem::path& path) {
  const Dataset d = load_csv(path, {{"population", ColumnKind::Categorical}, {"goods", ColumnKind::Real}});
  const Column& pop = d.column("population");
  const Column& goods = d.column("goods");
  Allocation out;
  for (std::size_t r = 0; r < d.rows(); ++r) {
    if (is_missing(pop.values[r]) || is_missing(goods.values[r])) {
      throw ConfigError(path.string() + ": row " + std::to_string(r + 1) + " lacks a population or a good");
    }
    out.populations[pop.levels[static_cast<std::size_t>(pop.values[r])]].push_back(goods.values[r]);
  }
  validate(out);
  return out;
}

}  // namespace sufaudit
