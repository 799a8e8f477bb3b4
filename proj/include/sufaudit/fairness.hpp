#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sufaudit/bootstrap.hpp"
#include "sufaudit/dataset.hpp"
#include "sufaudit/estimators.hpp"
#include "sufaudit/graph.hpp"

namespace sufaudit {

enum class Verdict { Fair, Unfair, Indeterminate };
enum class Criterion { Selection, Independence, Macro, Lax, Stringent };
enum class HarmMode { Effect, Threshold };

const char* to_string(Verdict v);
const char* to_string(Criterion c);
const char* to_string(HarmMode m);
Criterion criterion_from_string(const std::string& text);
HarmMode harm_mode_from_string(const std::string& text);
const std::vector<Criterion>& all_criteria();

struct AuditOptions {
  AdjustmentMethod method = AdjustmentMethod::Ipw;
  EstimatorOptions estimator;
  /// Unit-level harm tolerance for the stringent rule.
  double epsilon = 0.02;
  /// Population-level tolerance for the selection and lax rules.
  double epsilon_pop = 0.01;
  /// Level of the selection independence test.
  double alpha = 0.05;
  HarmMode harm_mode = HarmMode::Effect;
  std::size_t max_adjustment_size = 6;
  /// reps = 0 skips resampling; intervals then collapse to the point value.
  BootstrapOptions bootstrap;
};

/// How an effect is identified under one graph.
struct Identification {
  bool identified = false;
  NodeSet adjustment;
  /// Set when identification falls back to the instrument.
  std::string instrument;
  std::string reason;
};

/// Smallest (then lexicographically first) backdoor set for treatment ->
/// outcome drawn from `allowed`. Graph nodes that are not columns of `data`
/// count as unobserved. Falls back to `instrument` when no such set exists
/// and the instrument is structurally valid.
Identification identify_effect(const CausalGraph& graph, const Dataset& data, const std::string& treatment,
                               const std::string& outcome, const std::vector<std::string>& allowed,
                               const std::optional<std::string>& instrument, std::size_t max_adjustment_size);

/// One estimated contrast with its decision.
struct EffectAudit {
  Estimate estimate;
  Verdict verdict = Verdict::Indeterminate;
};

struct IndependenceTest {
  bool degenerate = false;
  double lr_statistic = 0.0;
  int df = 1;
  double p_value = 1.0;
  double alpha = 0.05;
  bool independence_holds = true;
  std::size_t n_used = 0;
  std::size_t n_dropped = 0;
  std::vector<std::string> warnings;
  Verdict verdict() const { return independence_holds ? Verdict::Fair : Verdict::Unfair; }
};

struct CovariateProfile {
  std::string covariate;
  double mean_harmed = 0.0;
  double mean_all = 0.0;
};

struct StringentRecord {
  std::size_t n_units = 0;
  double min_tau = 0.0;
  double mean_tau = 0.0;
  double share_harmed = 0.0;
  std::size_t n_harmed = 0;
  std::vector<CovariateProfile> harmed_profile;
  double epsilon = 0.0;
  HarmMode harm_mode = HarmMode::Effect;
  std::vector<std::string> covariates;
  std::string graph_label;
  /// Per-row harm flags over the complete-case rows, in data order.
  std::vector<bool> harmed;
  std::size_t n_dropped = 0;
  Verdict verdict = Verdict::Indeterminate;
};

/// Selection contrast delta: effect of macro_pre on the treatment, adjusted
/// with C1. Fair iff the interval lies at or below +epsilon_pop (worse macro
/// performance makes selection at least as likely); unfair iff it lies above.
EffectAudit selection_contrast(const Dataset& data, const RoleBinding& binding, const CausalGraph& graph,
                               const AuditOptions& options = {});

/// Likelihood-ratio test of treatment independent of wellbeing_pre given
/// macro_pre and C2.
IndependenceTest selection_independence_test(const Dataset& data, const RoleBinding& binding,
                                             const AuditOptions& options = {});

/// Macro effect gamma: effect of the treatment on macro_post, adjusted with C3.
/// Effective (fair) iff the interval lies above 0, ineffective (unfair) iff it
/// lies at or below 0.
EffectAudit macro_effect_audit(const Dataset& data, const RoleBinding& binding, const CausalGraph& graph,
                               const AuditOptions& options = {});

/// Lax rule on tau, the effect of the treatment on wellbeing_post adjusted
/// with C4: fair iff ci_low >= -epsilon_pop, unfair iff ci_high < -epsilon_pop.
EffectAudit lax_audit(const Dataset& data, const RoleBinding& binding, const CausalGraph& graph,
                      const AuditOptions& options = {});

/// Stringent rule: fair iff no unit is harmed. The covariates that are graph
/// nodes must form a backdoor set for treatment -> wellbeing_post.
StringentRecord stringent_audit(const Dataset& data, const RoleBinding& binding, const CausalGraph& graph,
                                const AuditOptions& options = {});

/// Decision rules on an interval, exposed for reuse and testing.
Verdict selection_rule(double ci_low, double ci_high, double epsilon_pop);
Verdict macro_rule(double ci_low, double ci_high);
Verdict lax_rule(double ci_low, double ci_high, double epsilon_pop);

/// Outcome of one criterion under one graph.
template <class T>
struct CriterionResult {
  bool identified = false;
  /// Identified, but estimation raised an error; blocks a fair ensemble verdict.
  bool failed = false;
  /// Why the criterion is not identified, or the error that stopped it.
  std::string reason;
  std::optional<T> result;
};

struct GraphAudit {
  std::string label;
  std::optional<CriterionResult<EffectAudit>> delta;
  std::optional<CriterionResult<EffectAudit>> gamma;
  std::optional<CriterionResult<EffectAudit>> tau;
  std::optional<CriterionResult<StringentRecord>> stringent;
};

struct EnsembleSummary {
  std::optional<double> mean_delta;
  std::optional<double> mean_gamma;
  std::optional<double> mean_tau;
  /// Labels of graphs that did not yield a result, per criterion.
  std::map<Criterion, std::vector<std::string>> not_identified;
};

struct FairnessReport {
  std::vector<Criterion> criteria;
  /// Sorted by graph label.
  std::vector<GraphAudit> per_graph;
  std::optional<IndependenceTest> selection_independence;
  EnsembleSummary ensemble;
  std::map<Criterion, Verdict> verdicts;
  std::vector<std::string> warnings;
  AuditOptions options;
};

/// Runs the requested criteria under every graph and aggregates: ensemble
/// means over graphs with a result; a criterion is fair only if every such
/// graph is fair, unfair if any is unfair, and indeterminate otherwise
/// (including when no graph yields a result).
FairnessReport ensemble_audit(const Dataset& data, const RoleBinding& binding, const std::vector<CausalGraph>& graphs,
                              const AuditOptions& options = {},
                              const std::vector<Criterion>& criteria = all_criteria());

}  // namespace sufaudit
