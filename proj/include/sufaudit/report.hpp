#pragma once

#include <string>

#include "json.hpp"

#include "sufaudit/fairness.hpp"

namespace sufaudit {

inline constexpr const char* kReportVersion = "1";

using Json = nlohmann::ordered_json;

Json to_json(const Estimate& e);
Json to_json(const EffectAudit& a);
Json to_json(const IndependenceTest& t);
Json to_json(const StringentRecord& r);
Json to_json(const AuditOptions& o);
/// Full report body: parameters, verdicts, ensemble, per-graph results and
/// warnings, in a fixed key order.
Json to_json(const FairnessReport& report);

/// Human-readable projection of a report JSON document; every number is
/// printed exactly as it appears in the JSON.
std::string summarize(const Json& report);

/// 0 when every verdict is fair, 2 when any is unfair, 3 otherwise.
int exit_code(const FairnessReport& report);

}  // namespace sufaudit
