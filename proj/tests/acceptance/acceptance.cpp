// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sufaudit/audit.hpp"
#include "sufaudit/bootstrap.hpp"
#include "sufaudit/errors.hpp"
#include "sufaudit/estimators.hpp"
#include "sufaudit/ethics.hpp"
#include "sufaudit/fairness.hpp"
#include "sufaudit/logistic.hpp"
#include "sufaudit/scm.hpp"

using namespace sufaudit;

namespace {

// Tolerances, pinned.
constexpr double kRecoveryTol = 0.02;
constexpr double kRecoverySeconds = 60.0;
constexpr double kConfoundingGap = 0.05;
constexpr double kIvTol = 0.03;
constexpr double kIvNaiveGap = 0.05;
constexpr double kFlaggedShare = 0.90;
constexpr double kSizeLow = 0.02;
constexpr double kSizeHigh = 0.10;
constexpr double kPower = 0.99;
constexpr double kGraphSeconds = 30.0;
constexpr double kScoreTol = 1e-6;
constexpr double kCoverage = 0.90;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double contrast(const StructuralModel& m, const std::string& t, const std::string& y) {
  return exact_interventional(m, {{t, 1}}, y) - exact_interventional(m, {{t, 0}}, y);
}

RoleBinding roles() {
  RoleBinding b;
  b.treatment = "IMF";
  b.macro_pre = "WoM_pre";
  b.macro_post = "WoM_post";
  b.wellbeing_pre = "WoI_pre";
  b.wellbeing_post = "WoI_post";
  return b;
}

std::vector<std::string> as_vector(const NodeSet& s) { return {s.begin(), s.end()}; }

Outcome allocation_goldens() {
  const Allocation one = parse_allocation("A:30,30,40;B:25,25");
  const Allocation two = parse_allocation("A:10,10,55;B:20,50");
  TheoryParams max;
  max.theory = Theory::Maximization;
  TheoryParams suff;
  suff.theory = Theory::Sufficientarian;
  suff.threshold = 30.0;
  const double m1 = score(one, max), m2 = score(two, max);
  const double s1 = score(one, suff), s2 = score(two, suff);
  const bool ok = m1 == 150.0 && m2 == 145.0 && compare(one, two, max) == Preference::A && s1 == 3.0 && s2 == 2.0 &&
                  compare(one, two, suff) == Preference::A;
  return {ok, "maximization " + fmt(m1, 0) + " vs " + fmt(m2, 0) + ", sufficientarian@30 " + fmt(s1, 0) + " vs " +
                  fmt(s2, 0) + ", both prefer outcome 1"};
}

Outcome oracle_recovery() {
  const auto t0 = Clock::now();
  const std::vector<std::pair<std::string, std::string>> pairs{
      {"WoM_pre", "IMF"}, {"IMF", "WoM_post"}, {"IMF", "WoI_post"}};
  const AdjustmentMethod methods[] = {AdjustmentMethod::Ipw, AdjustmentMethod::Regression,
                                      AdjustmentMethod::Stratification};
  double worst_oracle = 0.0, worst_mutual = 0.0;
  int checked = 0;
  std::uint64_t seed = 100;
  for (const auto& name : scenario_names()) {
    if (name.rfind("fig", 0) != 0) continue;
    const auto m = build_scenario(name);
    const auto& g = m.graph();
    const Dataset d = simulate(m, 100000, ++seed).without_latent();
    for (const auto& [t, y] : pairs) {
      if (!g.contains(t) || !g.contains(y)) continue;
      const auto sets = backdoor_sets(g, t, y);
      if (sets.empty()) continue;
      const double truth = contrast(m, t, y);
      std::vector<double> values;
      for (auto method : methods) values.push_back(ate_adjusted(d, t, y, as_vector(sets.front()), method).value);
      for (double v : values) worst_oracle = std::max(worst_oracle, std::abs(v - truth));
      worst_mutual = std::max(worst_mutual, *std::max_element(values.begin(), values.end()) -
                                                *std::min_element(values.begin(), values.end()));
      ++checked;
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = checked >= 15 && worst_oracle <= kRecoveryTol && worst_mutual <= kRecoveryTol && secs < kRecoverySeconds;
  return {ok, std::to_string(checked) + " contrasts, max |est - oracle| " + fmt(worst_oracle) + ", max method spread " +
                  fmt(worst_mutual) + ", " + fmt(secs, 1) + " s"};
}

Outcome confounding_detection() {
  const auto m = build_scenario("fig2a");
  const Dataset d = simulate(m, 100000, 7).without_latent();
  const double truth = contrast(m, "WoM_pre", "IMF");
  const double designed = exact_conditional(m, {}, "IMF", {{"WoM_pre", 1}}) -
                          exact_conditional(m, {}, "IMF", {{"WoM_pre", 0}}) - truth;
  const double naive = naive_difference(d, "WoM_pre", "IMF").value;
  double worst = 0.0;
  for (auto method : {AdjustmentMethod::Ipw, AdjustmentMethod::Regression, AdjustmentMethod::Stratification}) {
    worst = std::max(worst, std::abs(ate_adjusted(d, "WoM_pre", "IMF", {"C1"}, method).value - truth));
  }
  const double gap = naive - truth;
  const bool ok = std::abs(gap) >= kConfoundingGap && std::signbit(gap) == std::signbit(designed) &&
                  worst <= kRecoveryTol;
  return {ok, "oracle " + fmt(truth) + ", naive gap " + fmt(gap) + " (designed " + fmt(designed) +
                  "), adjusted max error " + fmt(worst)};
}

Outcome instrumental_variable() {
  const auto m = build_scenario("fig2c");
  const Dataset d = simulate(m, 200000, 8).without_latent();
  const double truth = contrast(m, "IMF", "WoI_post");
  const double iv = ate_iv_wald(d, "IMF", "WoI_post", "Z").value;
  const double naive = naive_difference(d, "IMF", "WoI_post").value;
  const bool ok = std::abs(iv - truth) <= kIvTol && std::abs(naive - truth) >= kIvNaiveGap;
  return {ok, "oracle " + fmt(truth) + ", wald " + fmt(iv) + ", naive " + fmt(naive)};
}

Outcome heterogeneity_wedge() {
  const auto m = build_scenario("hetero");
  const auto cf = counterfactual_effects(m, "IMF", "WoI_post", 100000, 9);
  const Dataset d = cf.factual.without_latent();
  auto b = roles();
  b.wellbeing_pre.reset();
  b.covariates = {"X"};
  b.confounders.wellbeing = {"X"};
  AuditOptions o;
  o.bootstrap.reps = 200;
  o.bootstrap.seed = 9;
  o.bootstrap.threads = 4;
  const auto lax = lax_audit(d, b, m.graph(), o);
  const auto strict = stringent_audit(d, b, m.graph(), o);
  std::size_t harmed = 0, flagged = 0;
  for (std::size_t i = 0; i < cf.tau.size(); ++i) {
    if (cf.tau[i] >= 0) continue;
    ++harmed;
    if (strict.harmed[i]) ++flagged;
  }
  const double share = harmed ? static_cast<double>(flagged) / static_cast<double>(harmed) : 0.0;
  const bool ok = lax.verdict == Verdict::Fair && strict.verdict == Verdict::Unfair && share >= kFlaggedShare;
  return {ok, std::string("population tau ") + fmt(lax.estimate.value) + " lax " + to_string(lax.verdict) +
                  ", stringent " + to_string(strict.verdict) + ", " + std::to_string(flagged) + "/" +
                  std::to_string(harmed) + " oracle-harmed units flagged (" + fmt(share, 3) + ")"};
}

Outcome selection_suite() {
  const auto null = build_scenario("fig1a");
  const auto direct = build_scenario("fig1b_woi");
  const int seeds = 200;
  int rejected_null = 0, rejected_direct = 0;
  for (int s = 0; s < seeds; ++s) {
    const auto seed = static_cast<std::uint64_t>(1000 + s);
    if (!selection_independence_test(simulate(null, 50000, seed), roles()).independence_holds) ++rejected_null;
    if (!selection_independence_test(simulate(direct, 50000, seed), roles()).independence_holds) ++rejected_direct;
  }
  const double size = rejected_null / static_cast<double>(seeds);
  const double power = rejected_direct / static_cast<double>(seeds);

  AuditOptions o;
  o.bootstrap.reps = 200;
  o.bootstrap.seed = 3;
  o.bootstrap.threads = 4;
  const auto unfair_model = build_scenario("fig1a", {{"IMF.WoM_pre", 1.5}});
  const auto fair = selection_contrast(simulate(null, 50000, 1), roles(), null.graph(), o);
  const auto unfair = selection_contrast(simulate(unfair_model, 50000, 2), roles(), unfair_model.graph(), o);
  const bool signs = std::signbit(fair.estimate.value) == std::signbit(contrast(null, "WoM_pre", "IMF")) &&
                     std::signbit(unfair.estimate.value) == std::signbit(contrast(unfair_model, "WoM_pre", "IMF")) &&
                     fair.verdict == Verdict::Fair && unfair.verdict == Verdict::Unfair;
  const bool ok = size >= kSizeLow && size <= kSizeHigh && power > kPower && signs;
  return {ok, "size " + fmt(size, 3) + ", power " + fmt(power, 3) + ", delta " + fmt(fair.estimate.value) + " (" +
                  to_string(fair.verdict) + ") / " + fmt(unfair.estimate.value) + " (" + to_string(unfair.verdict) +
                  ")"};
}

Outcome graph_algorithms() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> density(0.15, 0.5);
  int dsep_mismatch = 0, backdoor_mismatch = 0, queries = 0, connected = 0, with_sets = 0, total_sets = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 9;
    const auto g = oracle::random_dag(rng, n, density(rng), 0.15);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back(g.name(i));
    std::shuffle(names.begin(), names.end(), rng);
    NodeSet z;
    for (std::size_t i = 2; i < n; ++i) {
      if (rng() % 2) z.insert(names[i]);
    }
    const bool sep = d_separated(g, {names[0]}, {names[1]}, z);
    if (sep != oracle::dsep(g, {names[0]}, {names[1]}, z)) ++dsep_mismatch;
    if (!sep) ++connected;
    const auto sets = backdoor_sets(g, names[0], names[1], n);
    if (sets != oracle::all_backdoor_sets(g, names[0], names[1], n)) ++backdoor_mismatch;
    if (!sets.empty()) ++with_sets;
    total_sets += static_cast<int>(sets.size());
    ++queries;
  }
  const double secs = seconds_since(t0);
  const bool ok = dsep_mismatch == 0 && backdoor_mismatch == 0 && secs < kGraphSeconds;
  return {ok, std::to_string(queries) + " random DAGs (" + std::to_string(connected) + " d-connected, " +
                  std::to_string(with_sets) + " identifiable, " + std::to_string(total_sets) +
                  " backdoor sets), mismatches d-sep " + std::to_string(dsep_mismatch) + " / backdoor " +
                  std::to_string(backdoor_mismatch) + ", " + fmt(secs, 1) + " s"};
}

Outcome numerical_checks() {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> u;
  double worst_score = 0.0;
  bool converged = true;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5000, k = 4;
    Eigen::MatrixXd x(n, k + 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = 1.0;
      double eta = -0.3;
      for (int j = 1; j <= k; ++j) {
        x(i, j) = j == k ? (u(rng) < 0.4 ? 1.0 : 0.0) : normal(rng);
        eta += 0.5 * j * x(i, j) / k;
      }
      y(i) = u(rng) < oracle::sigmoid(eta) ? 1.0 : 0.0;
    }
    const auto fit = fit_logistic(x, y, {"(intercept)", "a", "b", "c", "d"});
    converged = converged && fit.converged && !fit.separation;
    // Score equations X'(y - p), summed in long double.
    for (int j = 0; j <= k; ++j) {
      long double s = 0.0L;
      for (int i = 0; i < n; ++i) {
        double eta = 0.0;
        for (int c = 0; c <= k; ++c) eta += x(i, c) * fit.coefficients[static_cast<std::size_t>(c)];
        s += x(i, j) * (y(i) - oracle::sigmoid(eta));
      }
      worst_score = std::max(worst_score, static_cast<double>(std::abs(s)));
    }
  }

  int covered = 0;
  const int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 g(5000 + static_cast<std::uint64_t>(trial));
    const std::size_t n = 1500;
    std::vector<double> t(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = u(g) < 0.5;
      y[i] = u(g) < 0.4 + 0.2 * t[i];
    }
    const Dataset d({{"t", Column::binary(t)}, {"y", Column::binary(y)}});
    BootstrapOptions o;
    o.reps = 400;
    o.seed = static_cast<std::uint64_t>(trial);
    o.threads = 4;
    const auto ci = bootstrap_interval([](const Dataset& r) { return naive_difference(r, "t", "y").value; }, d, o);
    if (ci.low <= 0.2 && 0.2 <= ci.high) ++covered;
  }
  const double coverage = covered / static_cast<double>(trials);
  const bool ok = converged && worst_score <= kScoreTol && coverage >= kCoverage;
  char score_text[32];
  std::snprintf(score_text, sizeof score_text, "%.2e", worst_score);
  return {ok, std::string("max score residual ") + score_text + ", bootstrap coverage of 0.2 " + fmt(coverage, 2) +
                  " over " + std::to_string(trials) + " trials"};
}

Outcome determinism() {
  const auto dir = fixture::scratch("acceptance_determinism");
  const fixture::Json roles = {{"treatment", "IMF"},
                               {"macro_pre", "WoM_pre"},
                               {"macro_post", "WoM_post"},
                               {"wellbeing_pre", "WoI_pre"},
                               {"wellbeing_post", "WoI_post"},
                               {"covariates", {"WoI_pre", "WoM_pre"}},
                               {"confounders", {{"wellbeing", {"WoI_pre"}}, {"macro", {"WoM_pre"}}}}};
  const auto path = fixture::write_audit(dir, "fig1d", 20000, 10, roles,
                                         {"selection", "independence", "macro", "lax", "stringent"}, 200);
  AuditConfig c = load_config(path);
  std::vector<std::string> dumps;
  for (unsigned threads : {1u, 1u, 2u, 8u}) {
    c.options.bootstrap.threads = threads;
    c.output = dir / ("report_" + std::to_string(dumps.size()) + ".json");
    run_audit(c);
    dumps.push_back(fixture::read(*c.output));
  }
  bool same = !dumps[0].empty();
  for (const auto& d : dumps) same = same && d == dumps[0];
  return {same, std::to_string(dumps.size()) + " runs (threads 1, 1, 2, 8), " + std::to_string(dumps[0].size()) +
                    " bytes, " + (same ? "identical" : "different")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"allocation golden scores", allocation_goldens},
      {"oracle recovery", oracle_recovery},
      {"confounding detection", confounding_detection},
      {"instrumental variable", instrumental_variable},
      {"heterogeneity wedge", heterogeneity_wedge},
      {"selection tests", selection_suite},
      {"graph algorithms", graph_algorithms},
      {"numerical checks", numerical_checks},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    if (!r.pass) ++failed;
    std::printf("%s  %zu %s: %s\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), r.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
