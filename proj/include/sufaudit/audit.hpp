#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sufaudit/dataset.hpp"
#include "sufaudit/fairness.hpp"
#include "sufaudit/report.hpp"

namespace sufaudit {

inline constexpr const char* kConfigVersion = "1";

struct GraphSource {
  std::string label;
  std::filesystem::path path;
};

struct IndicatorCombination {
  std::string name;
  std::vector<std::string> columns;
  Combiner combiner = Combiner::AllOf;
};

/// Declarative audit description. Relative paths are resolved against the
/// directory of the config file.
struct AuditConfig {
  std::filesystem::path data;
  Schema schema;
  std::optional<std::string> unit_id;
  std::optional<std::string> period;
  std::vector<SufficiencyThreshold> thresholds;
  std::vector<IndicatorCombination> combine;
  RoleBinding roles;
  std::vector<GraphSource> graphs;
  AuditOptions options;
  std::vector<Criterion> criteria = all_criteria();
  std::optional<std::filesystem::path> output;
};

/// Parse and validate a config document. `base` resolves relative paths.
AuditConfig parse_config(const std::string& text, const std::filesystem::path& base = {});
AuditConfig load_config(const std::filesystem::path& path);

struct AuditOutcome {
  FairnessReport report;
  Json json;
  std::string summary;
  int exit_code = 0;
};

/// Load the data, derive sufficiency indicators, audit every graph and, when
/// the config names an output path, write the report there.
AuditOutcome run_audit(const AuditConfig& config);

/// The data after threshold and combination steps.
Dataset prepare_data(const AuditConfig& config);

}  // namespace sufaudit
