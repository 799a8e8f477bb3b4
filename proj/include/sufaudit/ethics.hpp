#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sufaudit {

/// Individual holdings of one good, grouped by population.
struct Allocation {
  std::map<std::string, std::vector<double>> populations;

  /// All individuals, sorted ascending.
  std::vector<double> pooled() const;
};

enum class Theory { Maximization, Egalitarian, Prioritarian, Sufficientarian };
enum class PriorityTransform { Sqrt, Log };
enum class InequalityIndex { Gini, Variance };

const char* to_string(Theory t);
Theory theory_from_string(const std::string& text);
PriorityTransform priority_transform_from_string(const std::string& text);
InequalityIndex inequality_index_from_string(const std::string& text);

struct TheoryParams {
  Theory theory = Theory::Maximization;
  /// Required by, and only allowed with, the sufficientarian theory.
  std::optional<double> threshold;
  PriorityTransform transform = PriorityTransform::Sqrt;
  InequalityIndex index = InequalityIndex::Gini;
};

/// Throws on a non-finite good or an empty population.
void validate(const Allocation& alloc);

/// Higher is better under every theory:
///  - maximization: total goods
///  - egalitarian: minus the inequality index
///  - prioritarian: sum of the concave transform of each holding
///  - sufficientarian: number of individuals at or above the threshold
double score(const Allocation& alloc, const TheoryParams& params);

double gini(const std::vector<double>& goods);
double variance(const std::vector<double>& goods);

/// Total gap to the threshold over individuals below it; lower is better.
double shortfall(const Allocation& alloc, double threshold);

enum class Preference { A, B, Indifferent };
const char* to_string(Preference p);

/// Higher score wins; exact ties are indifferent.
Preference compare(const Allocation& a, const Allocation& b, const TheoryParams& params);

/// Inline form `A:30,30,40;B:25,25`.
Allocation parse_allocation(std::string_view text);
/// CSV with header `population,goods`, one row per individual.
Allocation load_allocation_csv(const std::filesystem::path& path);

}  // namespace sufaudit
