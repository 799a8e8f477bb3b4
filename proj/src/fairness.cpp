#include "sufaudit/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sufaudit/errors.hpp"
#include "sufaudit/logistic.hpp"

namespace sufaudit {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Fair: return "fair";
    case Verdict::Unfair: return "unfair";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::Selection: return "selection";
    case Criterion::Independence: return "independence";
    case Criterion::Macro: return "macro";
    case Criterion::Lax: return "lax";
    case Criterion::Stringent: return "stringent";
  }
  return "selection";
}

const char* to_string(HarmMode m) { return m == HarmMode::Effect ? "effect" : "threshold"; }

Criterion criterion_from_string(const std::string& text) {
  for (Criterion c : all_criteria()) {
    if (text == to_string(c)) return c;
  }
  throw ConfigError("unknown criterion '" + text + "' (expected selection, independence, macro, lax or stringent)");
}

HarmMode harm_mode_from_string(const std::string& text) {
  if (text == "effect") return HarmMode::Effect;
  if (text == "threshold") return HarmMode::Threshold;
  throw ConfigError("unknown harm_mode '" + text + "' (expected effect or threshold)");
}

const std::vector<Criterion>& all_criteria() {
  static const std::vector<Criterion> all{Criterion::Selection, Criterion::Independence, Criterion::Macro,
                                          Criterion::Lax, Criterion::Stringent};
  return all;
}

Verdict selection_rule(double ci_low, double ci_high, double epsilon_pop) {
  if (ci_high <= epsilon_pop) return Verdict::Fair;
  if (ci_low > epsilon_pop) return Verdict::Unfair;
  return Verdict::Indeterminate;
}

Verdict macro_rule(double ci_low, double ci_high) {
  if (ci_low > 0.0) return Verdict::Fair;
  if (ci_high <= 0.0) return Verdict::Unfair;
  return Verdict::Indeterminate;
}

Verdict lax_rule(double ci_low, double ci_high, double epsilon_pop) {
  if (ci_low >= -epsilon_pop) return Verdict::Fair;
  if (ci_high < -epsilon_pop) return Verdict::Unfair;
  return Verdict::Indeterminate;
}

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

std::string join(const NodeSet& items) { return join(std::vector<std::string>(items.begin(), items.end())); }

bool usable_column(const Dataset& data, const std::string& name) {
  return data.has(name) && !data.column(name).latent;
}

const std::string& require_role(const std::optional<std::string>& role, const char* what) {
  if (!role) throw ConfigError(std::string("role '") + what + "' is not bound");
  return *role;
}

Estimate estimate_identified(const Dataset& data, const std::string& treatment, const std::string& outcome,
                             const Identification& id, const AuditOptions& opt, const std::string& tag,
                             const std::string& label) {
  const std::vector<std::string> adjustment(id.adjustment.begin(), id.adjustment.end());
  const auto point = [&](const Dataset& d) {
    return id.instrument.empty() ? ate_adjusted(d, treatment, outcome, adjustment, opt.method, opt.estimator)
                                 : ate_iv_wald(d, treatment, outcome, id.instrument, opt.estimator);
  };
  Estimate e = point(data);
  e.graph_label = label;
  e.ci_low = e.value;
  e.ci_high = e.value;
  if (opt.bootstrap.reps > 0) {
    BootstrapOptions b = opt.bootstrap;
    b.seed = mix_seed(opt.bootstrap.seed, stable_hash(tag + "|" + label));
    const auto ci = bootstrap_interval([&](const Dataset& d) { return point(d).value; }, data, b);
    attach_interval(e, ci);
  }
  return e;
}

EffectAudit effect_audit(const Dataset& data, const CausalGraph& graph, const std::string& treatment,
                         const std::string& outcome, const std::vector<std::string>& allowed,
                         const std::optional<std::string>& instrument, const AuditOptions& opt, const char* tag) {
  const Identification id =
      identify_effect(graph, data, treatment, outcome, allowed, instrument, opt.max_adjustment_size);
  if (!id.identified) throw IdentificationError(id.reason);
  EffectAudit out;
  out.estimate = estimate_identified(data, treatment, outcome, id, opt, tag, graph.label());
  return out;
}

}  // namespace

Identification identify_effect(const CausalGraph& graph, const Dataset& data, const std::string& treatment,
                               const std::string& outcome, const std::vector<std::string>& allowed,
                               const std::optional<std::string>& instrument, std::size_t max_adjustment_size) {
  Identification out;
  for (const std::string* role : {&treatment, &outcome}) {
    if (!graph.contains(*role)) {
      out.reason = "graph '" + graph.label() + "' has no node '" + *role + "'";
      return out;
    }
    if (!usable_column(data, *role)) {
      out.reason = "no observed column for '" + *role + "'";
      return out;
    }
  }

  // Restrict the candidates to allowed, observed columns by marking every
  // other node unobserved; d-separation itself ignores observability.
  const std::set<std::string> allow(allowed.begin(), allowed.end());
  std::vector<GraphNode> nodes;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const std::string& n = graph.name(i);
    nodes.push_back({n, graph.observed(i) && allow.count(n) && usable_column(data, n)});
  }
  const CausalGraph restricted(nodes, graph.edges(), graph.label());
  const auto sets = backdoor_sets(restricted, treatment, outcome, max_adjustment_size);
  if (!sets.empty()) {
    out.identified = true;
    out.adjustment = sets.front();
    return out;
  }

  out.reason = "no admissible adjustment set for " + treatment + " -> " + outcome + " among {" + join(allowed) +
               "} under graph '" + graph.label() + "'";
  if (instrument) {
    if (graph.contains(*instrument) && graph.observed(graph.index_of(*instrument)) &&
        usable_column(data, *instrument) && validate_instrument(graph, *instrument, treatment, outcome)) {
      out.identified = true;
      out.instrument = *instrument;
      out.reason.clear();
      return out;
    }
    out.reason += "; '" + *instrument + "' is not a valid observed instrument";
  }
  return out;
}

EffectAudit selection_contrast(const Dataset& data, const RoleBinding& binding, const CausalGraph& graph,
                               const AuditOptions& options) {
  const std::string& macro = require_role(binding.macro_pre, "macro_pre");
  EffectAudit out = effect_audit(data, graph, macro, binding.treatment, binding.confounders.selection,
                                 std::nullopt, options, "selection");
  out.verdict = selection_rule(out.estimate.ci_low, out.estimate.ci_high, options.epsilon_pop);
  return out;
}

EffectAudit macro_effect_audit(const Dataset& data, const RoleBinding& binding, const CausalGraph& graph,
                               const AuditOptions& options) {
  const std::string& outcome = require_role(binding.macro_post, "macro_post");
  EffectAudit out = effect_audit(data, graph, binding.treatment, outcome, binding.confounders.macro,
                                 binding.instrument, options, "macro");
  out.verdict = macro_rule(out.estimate.ci_low, out.estimate.ci_high);
  return out;
}

EffectAudit lax_audit(const Dataset& data, const RoleBinding& binding, const CausalGraph& graph,
                      const AuditOptions& options) {
  const std::string& outcome = require_role(binding.wellbeing_post, "wellbeing_post");
  EffectAudit out = effect_audit(data, graph, binding.treatment, outcome, binding.confounders.wellbeing,
                                 binding.instrument, options, "lax");
  out.verdict = lax_rule(out.estimate.ci_low, out.estimate.ci_high, options.epsilon_pop);
  return out;
}

IndependenceTest selection_independence_test(const Dataset& data, const RoleBinding& binding,
                                             const AuditOptions& options) {
  const std::string& wellbeing = require_role(binding.wellbeing_pre, "wellbeing_pre");
  std::vector<std::string> base;
  if (binding.macro_pre) base.push_back(*binding.macro_pre);
  for (const auto& c : binding.confounders.independence) {
    if (std::find(base.begin(), base.end(), c) == base.end()) base.push_back(c);
  }
  std::vector<std::string> used = base;
  used.push_back(binding.treatment);
  used.push_back(wellbeing);
  const auto [d, dropped] = data.complete_cases(used);

  IndependenceTest out;
  out.alpha = options.alpha;
  out.n_used = d.rows();
  out.n_dropped = dropped;
  if (d.rows() == 0) throw EstimationError("independence test: no complete rows");
  const auto& w = d.column(wellbeing).values;
  if (std::all_of(w.begin(), w.end(), [&](double v) { return v == w.front(); })) {
    out.degenerate = true;
    out.warnings.push_back("'" + wellbeing + "' is constant; independence cannot be tested and is taken to hold");
    return out;
  }
  const LogisticModel null_fit = fit_logistic(d, binding.treatment, base, options.estimator.logistic);
  std::vector<std::string> full = base;
  full.push_back(wellbeing);
  const LogisticModel alt_fit = fit_logistic(d, binding.treatment, full, options.estimator.logistic);
  if (null_fit.separation || alt_fit.separation) {
    throw EstimationError("independence test: separation in the selection model");
  }
  out.lr_statistic = std::max(0.0, 2.0 * (alt_fit.log_likelihood - null_fit.log_likelihood));
  // Chi-square(1) upper tail.
  out.p_value = std::erfc(std::sqrt(out.lr_statistic / 2.0));
  out.independence_holds = out.p_value >= options.alpha;
  return out;
}

StringentRecord stringent_audit(const Dataset& data, const RoleBinding& binding, const CausalGraph& graph,
                                const AuditOptions& options) {
  const std::string& outcome = require_role(binding.wellbeing_post, "wellbeing_post");
  const std::string& treatment = binding.treatment;
  for (const std::string* role : {&treatment, &outcome}) {
    if (!graph.contains(*role)) {
      throw IdentificationError("graph '" + graph.label() + "' has no node '" + *role + "'");
    }
  }
  NodeSet in_graph;
  for (const auto& c : binding.covariates) {
    if (graph.contains(c)) in_graph.insert(c);
  }
  if (!is_backdoor_set(graph, treatment, outcome, in_graph)) {
    throw IdentificationError("covariates {" + join(in_graph) + "} do not form a backdoor set for " + treatment +
                              " -> " + outcome + " under graph '" + graph.label() + "'");
  }

  std::vector<std::string> used = binding.covariates;
  used.push_back(treatment);
  used.push_back(outcome);
  const auto [d, dropped] = data.complete_cases(used);
  const CateModel cate = fit_cate(d, treatment, outcome, binding.covariates, options.estimator.logistic);

  StringentRecord rec;
  rec.epsilon = options.epsilon;
  rec.harm_mode = options.harm_mode;
  rec.covariates = binding.covariates;
  rec.graph_label = graph.label();
  rec.n_units = d.rows();
  rec.n_dropped = dropped;
  rec.harmed.assign(d.rows(), false);

  std::vector<const std::vector<double>*> cols;
  for (const auto& c : binding.covariates) cols.push_back(&d.column(c).values);
  std::vector<double> x(cols.size());
  std::vector<double> sum_harmed(cols.size(), 0.0);
  std::vector<double> sum_all(cols.size(), 0.0);
  double tau_sum = 0.0;
  rec.min_tau = 1.0;
  for (std::size_t r = 0; r < d.rows(); ++r) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      x[j] = (*cols[j])[r];
      sum_all[j] += x[j];
    }
    const LogisticPair m1 = cate.treated.predict(x);
    const LogisticPair m0 = cate.control.predict(x);
    const double tau = m1.centered - m0.centered;
    tau_sum += tau;
    rec.min_tau = std::min(rec.min_tau, tau);
    const bool harmed = options.harm_mode == HarmMode::Effect ? tau < -options.epsilon
                                                              : (m1.p() < 0.5 && m0.p() >= 0.5);
    if (harmed) {
      rec.harmed[r] = true;
      ++rec.n_harmed;
      for (std::size_t j = 0; j < cols.size(); ++j) sum_harmed[j] += x[j];
    }
  }
  const double n = static_cast<double>(d.rows());
  rec.mean_tau = tau_sum / n;
  rec.min_tau = std::min(rec.min_tau, rec.mean_tau);
  rec.share_harmed = static_cast<double>(rec.n_harmed) / n;
  if (rec.n_harmed > 0) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      rec.harmed_profile.push_back(
          {binding.covariates[j], sum_harmed[j] / static_cast<double>(rec.n_harmed), sum_all[j] / n});
    }
  }
  rec.verdict = rec.n_harmed == 0 ? Verdict::Fair : Verdict::Unfair;
  return rec;
}

namespace {

template <class T, class F>
CriterionResult<T> attempt(F&& run) {
  CriterionResult<T> out;
  try {
    out.result = run();
    out.identified = true;
  } catch (const IdentificationError& e) {
    out.reason = e.what();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    out.identified = true;
    out.failed = true;
    out.reason = e.what();
  }
  return out;
}

template <class T>
Verdict verdict_of(const CriterionResult<T>& r) {
  if (r.failed || !r.result) return Verdict::Indeterminate;
  return r.result->verdict;
}

}  // namespace

FairnessReport ensemble_audit(const Dataset& data, const RoleBinding& binding, const std::vector<CausalGraph>& graphs,
                              const AuditOptions& options, const std::vector<Criterion>& criteria) {
  if (graphs.empty()) throw ConfigError("the graph ensemble is empty");
  std::set<std::string> labels;
  for (const auto& g : graphs) {
    if (!labels.insert(g.label()).second) throw ConfigError("duplicate graph label '" + g.label() + "'");
  }

  FairnessReport report;
  report.options = options;
  for (Criterion c : all_criteria()) {
    if (std::find(criteria.begin(), criteria.end(), c) != criteria.end()) report.criteria.push_back(c);
  }
  if (report.criteria.empty()) throw ConfigError("no criteria requested");
  const auto wants = [&](Criterion c) {
    return std::find(report.criteria.begin(), report.criteria.end(), c) != report.criteria.end();
  };
  if (wants(Criterion::Selection)) require_role(binding.macro_pre, "macro_pre");
  if (wants(Criterion::Independence)) require_role(binding.wellbeing_pre, "wellbeing_pre");
  if (wants(Criterion::Macro)) require_role(binding.macro_post, "macro_post");
  if (wants(Criterion::Lax) || wants(Criterion::Stringent)) require_role(binding.wellbeing_post, "wellbeing_post");

  const Dataset observed = data.without_latent();
  for (const auto& v : validate_binding(observed, binding)) {
    if (v.kind != ViolationKind::MissingValues) throw DataError(v.message);
    report.warnings.push_back(v.message);
  }

  std::vector<const CausalGraph*> order;
  for (const auto& g : graphs) order.push_back(&g);
  std::sort(order.begin(), order.end(), [](const CausalGraph* a, const CausalGraph* b) { return a->label() < b->label(); });

  for (const CausalGraph* g : order) {
    GraphAudit ga;
    ga.label = g->label();
    if (wants(Criterion::Selection)) {
      ga.delta = attempt<EffectAudit>([&] { return selection_contrast(observed, binding, *g, options); });
    }
    if (wants(Criterion::Macro)) {
      ga.gamma = attempt<EffectAudit>([&] { return macro_effect_audit(observed, binding, *g, options); });
    }
    if (wants(Criterion::Lax)) {
      ga.tau = attempt<EffectAudit>([&] { return lax_audit(observed, binding, *g, options); });
    }
    if (wants(Criterion::Stringent)) {
      ga.stringent = attempt<StringentRecord>([&] { return stringent_audit(observed, binding, *g, options); });
      if (ga.stringent->result) ga.stringent->result->harmed.clear();
    }
    report.per_graph.push_back(std::move(ga));
  }

  if (wants(Criterion::Independence)) {
    try {
      report.selection_independence = selection_independence_test(observed, binding, options);
      for (const auto& w : report.selection_independence->warnings) report.warnings.push_back(w);
      report.verdicts[Criterion::Independence] = report.selection_independence->verdict();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      report.warnings.push_back(std::string("independence test failed: ") + e.what());
      report.verdicts[Criterion::Independence] = Verdict::Indeterminate;
    }
  }

  const auto aggregate = [&](Criterion c, auto member) -> std::optional<double> {
    std::vector<Verdict> verdicts;
    double sum = 0.0;
    std::size_t count = 0;
    bool blocked = false;
    for (const auto& ga : report.per_graph) {
      const auto& r = ga.*member;
      if (!r) continue;
      if (!r->identified) {
        report.ensemble.not_identified[c].push_back(ga.label);
        report.warnings.push_back(std::string(to_string(c)) + " not identified under graph '" + ga.label +
                                  "': " + r->reason);
        continue;
      }
      if (r->failed) {
        blocked = true;
        report.ensemble.not_identified[c].push_back(ga.label);
        report.warnings.push_back(std::string(to_string(c)) + " failed under graph '" + ga.label + "': " + r->reason);
        continue;
      }
      verdicts.push_back(verdict_of(*r));
      if constexpr (requires { r->result->estimate; }) {
        sum += r->result->estimate.value;
        ++count;
      }
    }
    Verdict v = Verdict::Fair;
    if (verdicts.empty()) {
      v = Verdict::Indeterminate;
      report.warnings.push_back(std::string("no graph yields a result for ") + to_string(c));
    } else if (std::find(verdicts.begin(), verdicts.end(), Verdict::Unfair) != verdicts.end()) {
      v = Verdict::Unfair;
    } else if (blocked || std::find(verdicts.begin(), verdicts.end(), Verdict::Indeterminate) != verdicts.end()) {
      v = Verdict::Indeterminate;
    }
    report.verdicts[c] = v;
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
  };

  if (wants(Criterion::Selection)) {
    report.ensemble.mean_delta = aggregate(Criterion::Selection, &GraphAudit::delta);
    report.warnings.push_back(
        "selection rule: fair iff delta <= epsilon_pop, i.e. entry is at least as likely under poor as under good "
        "macro performance; the opposite sign reading (fair iff delta > 0) is not used");
  }
  if (wants(Criterion::Macro)) report.ensemble.mean_gamma = aggregate(Criterion::Macro, &GraphAudit::gamma);
  if (wants(Criterion::Lax)) report.ensemble.mean_tau = aggregate(Criterion::Lax, &GraphAudit::tau);
  if (wants(Criterion::Stringent)) aggregate(Criterion::Stringent, &GraphAudit::stringent);
  return report;
}

}  // namespace sufaudit
