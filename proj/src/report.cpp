#include "sufaudit/report.hpp"

#include <cmath>
#include <sstream>

namespace sufaudit {

namespace {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json optional_number(const std::optional<double>& v) { return v ? number(*v) : Json(nullptr); }

template <class T>
Json criterion_json(const std::optional<CriterionResult<T>>& r) {
  if (!r) return nullptr;
  if (!r->identified) return Json{{"identified", false}, {"reason", r->reason}};
  if (r->failed) return Json{{"identified", true}, {"error", r->reason}, {"verdict", to_string(Verdict::Indeterminate)}};
  return to_json(*r->result);
}

}  // namespace

Json to_json(const EffectAudit& a) {
  Json j = to_json(a.estimate);
  j["verdict"] = to_string(a.verdict);
  return j;
}

Json to_json(const Estimate& e) {
  Json j;
  j["value"] = number(e.value);
  j["ci_low"] = number(e.ci_low);
  j["ci_high"] = number(e.ci_high);
  j["estimator"] = to_string(e.estimator);
  j["adjustment_set"] = std::vector<std::string>(e.adjustment_set.begin(), e.adjustment_set.end());
  j["instrument"] = e.instrument.empty() ? Json(nullptr) : Json(e.instrument);
  j["arm_treated"] = number(e.arm_treated);
  j["arm_control"] = number(e.arm_control);
  j["n_used"] = e.n_used;
  j["n_dropped"] = e.n_dropped;
  j["bootstrap_reps"] = e.bootstrap_reps;
  j["bootstrap_failed"] = e.bootstrap_failed;
  return j;
}

Json to_json(const IndependenceTest& t) {
  Json j;
  j["lr_statistic"] = number(t.lr_statistic);
  j["df"] = t.df;
  j["p_value"] = number(t.p_value);
  j["alpha"] = number(t.alpha);
  j["independence_holds"] = t.independence_holds;
  j["degenerate"] = t.degenerate;
  j["n_used"] = t.n_used;
  j["n_dropped"] = t.n_dropped;
  j["verdict"] = to_string(t.verdict());
  return j;
}

Json to_json(const StringentRecord& r) {
  Json j;
  j["n_units"] = r.n_units;
  j["n_dropped"] = r.n_dropped;
  j["covariates"] = r.covariates;
  j["harm_mode"] = to_string(r.harm_mode);
  j["epsilon"] = number(r.epsilon);
  j["min_tau"] = number(r.min_tau);
  j["mean_tau"] = number(r.mean_tau);
  j["n_harmed"] = r.n_harmed;
  j["share_harmed"] = number(r.share_harmed);
  Json profile = Json::array();
  for (const auto& p : r.harmed_profile) {
    profile.push_back({{"covariate", p.covariate}, {"mean_harmed", number(p.mean_harmed)}, {"mean_all", number(p.mean_all)}});
  }
  j["harmed_profile"] = profile;
  j["verdict"] = to_string(r.verdict);
  return j;
}

Json to_json(const AuditOptions& o) {
  Json j;
  j["method"] = to_string(o.method);
  j["clip"] = number(o.estimator.clip);
  j["weak_instrument"] = number(o.estimator.weak_instrument);
  j["epsilon"] = number(o.epsilon);
  j["epsilon_pop"] = number(o.epsilon_pop);
  j["alpha"] = number(o.alpha);
  j["harm_mode"] = to_string(o.harm_mode);
  j["max_adjustment_size"] = o.max_adjustment_size;
  j["bootstrap"] = {{"reps", o.bootstrap.reps}, {"alpha", number(o.bootstrap.alpha)}, {"seed", o.bootstrap.seed}};
  return j;
}

Json to_json(const FairnessReport& report) {
  Json j;
  j["parameters"] = to_json(report.options);
  Json criteria = Json::array();
  for (Criterion c : report.criteria) criteria.push_back(to_string(c));
  j["criteria"] = criteria;

  Json verdicts = Json::object();
  for (Criterion c : report.criteria) {
    auto it = report.verdicts.find(c);
    verdicts[to_string(c)] = to_string(it == report.verdicts.end() ? Verdict::Indeterminate : it->second);
  }
  j["verdicts"] = verdicts;

  Json ensemble;
  ensemble["mean_delta"] = optional_number(report.ensemble.mean_delta);
  ensemble["mean_gamma"] = optional_number(report.ensemble.mean_gamma);
  ensemble["mean_tau"] = optional_number(report.ensemble.mean_tau);
  ensemble["verdicts"] = verdicts;
  Json missing = Json::object();
  for (Criterion c : report.criteria) {
    auto it = report.ensemble.not_identified.find(c);
    if (it != report.ensemble.not_identified.end()) missing[to_string(c)] = it->second;
  }
  ensemble["not_identified"] = missing;
  j["ensemble"] = ensemble;

  j["selection_independence"] =
      report.selection_independence ? to_json(*report.selection_independence) : Json(nullptr);

  Json graphs = Json::object();
  for (const auto& g : report.per_graph) {
    Json entry;
    entry["delta"] = criterion_json(g.delta);
    entry["gamma"] = criterion_json(g.gamma);
    entry["tau"] = criterion_json(g.tau);
    entry["stringent"] = criterion_json(g.stringent);
    graphs[g.label] = entry;
  }
  j["per_graph"] = graphs;
  j["warnings"] = report.warnings;
  return j;
}

namespace {

std::string show(const Json& v) { return v.is_null() ? "n/a" : v.dump(); }

void effect_line(std::ostringstream& os, const char* name, const Json& e) {
  if (e.is_null()) return;
  os << "  " << name << ": ";
  if (!e.value("identified", true)) {
    os << "not identified (" << e.at("reason").get<std::string>() << ")\n";
    return;
  }
  if (e.contains("error")) {
    os << "error (" << e.at("error").get<std::string>() << ")\n";
    return;
  }
  os << show(e.at("value")) << " [" << show(e.at("ci_low")) << ", " << show(e.at("ci_high")) << "] "
     << e.at("verdict").get<std::string>() << " via " << e.at("estimator").get<std::string>();
  if (!e.at("instrument").is_null()) {
    os << " with instrument " << e.at("instrument").get<std::string>();
  } else {
    os << " adjusting for " << e.at("adjustment_set").dump();
  }
  os << "\n";
}

}  // namespace

std::string summarize(const Json& report) {
  const Json& body = report.contains("report") ? report.at("report") : report;
  std::ostringstream os;
  os << "verdicts:\n";
  for (const auto& [c, v] : body.at("verdicts").items()) os << "  " << c << ": " << v.get<std::string>() << "\n";
  const Json& ens = body.at("ensemble");
  os << "ensemble means: delta " << show(ens.at("mean_delta")) << ", gamma " << show(ens.at("mean_gamma"))
     << ", tau " << show(ens.at("mean_tau")) << "\n";
  if (const Json& t = body.at("selection_independence"); !t.is_null()) {
    os << "selection independence: LR " << show(t.at("lr_statistic")) << ", p " << show(t.at("p_value")) << ", "
       << t.at("verdict").get<std::string>() << "\n";
  }
  for (const auto& [label, g] : body.at("per_graph").items()) {
    os << "graph " << label << ":\n";
    effect_line(os, "delta", g.at("delta"));
    effect_line(os, "gamma", g.at("gamma"));
    effect_line(os, "tau", g.at("tau"));
    if (const Json& s = g.at("stringent"); !s.is_null()) {
      os << "  stringent: ";
      if (!s.value("identified", true)) {
        os << "not identified (" << s.at("reason").get<std::string>() << ")\n";
      } else if (s.contains("error")) {
        os << "error (" << s.at("error").get<std::string>() << ")\n";
      } else {
        os << "share harmed " << show(s.at("share_harmed")) << ", min tau " << show(s.at("min_tau")) << ", "
           << s.at("verdict").get<std::string>() << "\n";
      }
    }
  }
  for (const auto& w : body.at("warnings")) os << "warning: " << w.get<std::string>() << "\n";
  return os.str();
}

int exit_code(const FairnessReport& report) {
  bool indeterminate = false;
  for (Criterion c : report.criteria) {
    auto it = report.verdicts.find(c);
    const Verdict v = it == report.verdicts.end() ? Verdict::Indeterminate : it->second;
    if (v == Verdict::Unfair) return 2;
    if (v == Verdict::Indeterminate) indeterminate = true;
  }
  return indeterminate ? 3 : 0;
}

}  // namespace sufaudit
