#include "sufaudit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "sufaudit/errors.hpp"

namespace sufaudit {

const char* to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Ipw: return "ipw";
    case EstimatorKind::Regression: return "regression";
    case EstimatorKind::Stratification: return "stratification";
    case EstimatorKind::IvWald: return "iv_wald";
    case EstimatorKind::Naive: return "naive";
  }
  return "?";
}

EstimatorKind estimator_kind_from_string(const std::string& text) {
  for (auto k : {EstimatorKind::Ipw, EstimatorKind::Regression, EstimatorKind::Stratification,
                 EstimatorKind::IvWald, EstimatorKind::Naive}) {
    if (text == to_string(k)) return k;
  }
  throw EstimationError("unknown estimator '" + text + "'");
}

const char* to_string(AdjustmentMethod method) {
  switch (method) {
    case AdjustmentMethod::Ipw: return "ipw";
    case AdjustmentMethod::Regression: return "regression";
    case AdjustmentMethod::Stratification: return "stratification";
  }
  return "?";
}

AdjustmentMethod adjustment_method_from_string(const std::string& text) {
  for (auto m : {AdjustmentMethod::Ipw, AdjustmentMethod::Regression, AdjustmentMethod::Stratification}) {
    if (text == to_string(m)) return m;
  }
  throw EstimationError("unknown adjustment method '" + text + "' (expected ipw, regression or stratification)");
}

namespace {

// Arithmetic in these estimators is kept in centred form (y - 1/2, p - 1/2)
// so that recoding treatment or outcome 1 <-> 0 negates the contrast exactly.

void require_binary(const Dataset& data, const std::string& column, const char* role) {
  if (data.column(column).kind != ColumnKind::Binary) {
    throw EstimationError(std::string(role) + " column '" + column + "' must be binary");
  }
}

struct ArmMeans {
  double treated = 0.0;  // centred
  double control = 0.0;  // centred
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
};

ArmMeans centred_arm_means(const std::vector<double>& arm, const std::vector<double>& y) {
  ArmMeans m;
  double s1 = 0.0;
  double s0 = 0.0;
  for (std::size_t i = 0; i < arm.size(); ++i) {
    if (arm[i] == 1.0) {
      s1 += y[i] - 0.5;
      ++m.n_treated;
    } else {
      s0 += y[i] - 0.5;
      ++m.n_control;
    }
  }
  m.treated = s1 / static_cast<double>(m.n_treated);
  m.control = s0 / static_cast<double>(m.n_control);
  return m;
}

Estimate finish(double treated_c, double control_c, EstimatorKind kind, std::size_t n_used, std::size_t dropped) {
  Estimate e;
  e.value = treated_c - control_c;
  e.ci_low = e.ci_high = e.value;
  e.estimator = kind;
  e.arm_treated = 0.5 + treated_c;
  e.arm_control = 0.5 + control_c;
  e.n_used = n_used;
  e.n_dropped = dropped;
  return e;
}

void require_both_arms(const ArmMeans& m, const std::string& treatment) {
  if (m.n_treated == 0 || m.n_control == 0) {
    throw EstimationError("treatment '" + treatment + "' needs both treated and untreated rows");
  }
}

EstimatorKind kind_of(AdjustmentMethod m) {
  switch (m) {
    case AdjustmentMethod::Ipw: return EstimatorKind::Ipw;
    case AdjustmentMethod::Regression: return EstimatorKind::Regression;
    case AdjustmentMethod::Stratification: return EstimatorKind::Stratification;
  }
  return EstimatorKind::Naive;
}

std::string format_prob(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

Estimate naive_difference(const Dataset& data, const std::string& treatment, const std::string& outcome) {
  require_binary(data, treatment, "treatment");
  require_binary(data, outcome, "outcome");
  const auto [used, dropped] = data.complete_cases({treatment, outcome});
  const auto m = centred_arm_means(used.column(treatment).values, used.column(outcome).values);
  require_both_arms(m, treatment);
  return finish(m.treated, m.control, EstimatorKind::Naive, used.rows(), dropped);
}

Estimate ate_adjusted(const Dataset& data, const std::string& treatment, const std::string& outcome,
                      const std::vector<std::string>& adjustment, AdjustmentMethod method,
                      const EstimatorOptions& options) {
  require_binary(data, treatment, "treatment");
  require_binary(data, outcome, "outcome");
  std::vector<std::string> used_cols{treatment, outcome};
  for (const auto& a : adjustment) {
    if (a == treatment || a == outcome) {
      throw EstimationError("adjustment set must not contain the treatment or outcome ('" + a + "')");
    }
    data.column(a);
    used_cols.push_back(a);
  }
  const auto [d, dropped] = data.complete_cases(used_cols);
  const auto& t = d.column(treatment).values;
  const auto& y = d.column(outcome).values;
  const ArmMeans raw = centred_arm_means(t, y);
  require_both_arms(raw, treatment);

  Estimate est;
  if (adjustment.empty()) {
    est = finish(raw.treated, raw.control, kind_of(method), d.rows(), dropped);
  } else if (method == AdjustmentMethod::Ipw) {
    const LogisticModel ps = fit_logistic(d, treatment, adjustment, options.logistic);
    if (ps.separation) {
      throw EstimationError("propensity overlap violation: the adjustment covariates separate the treatment arms");
    }
    const Eigen::MatrixXd x = design_matrix(d, adjustment);
    const Eigen::Map<const Eigen::VectorXd> beta(ps.coefficients.data(),
                                                 static_cast<Eigen::Index>(ps.coefficients.size()));
    const Eigen::VectorXd eta = x * beta;
    const double lo = options.clip;
    const double hi = 1.0 - options.clip;
    double num1 = 0.0, den1 = 0.0, num0 = 0.0, den0 = 0.0;
    for (std::size_t i = 0; i < d.rows(); ++i) {
      const LogisticPair pr = logistic(eta[static_cast<Eigen::Index>(i)]);
      // Probability of the arm the unit actually received.
      const double own = std::clamp(t[i] == 1.0 ? pr.p() : pr.q(), lo, hi);
      const double w = 1.0 / own;
      if (t[i] == 1.0) {
        num1 += w * (y[i] - 0.5);
        den1 += w;
      } else {
        num0 += w * (y[i] - 0.5);
        den0 += w;
      }
    }
    est = finish(num1 / den1, num0 / den0, EstimatorKind::Ipw, d.rows(), dropped);
  } else if (method == AdjustmentMethod::Regression) {
    std::vector<std::size_t> rows1, rows0;
    for (std::size_t i = 0; i < d.rows(); ++i) (t[i] == 1.0 ? rows1 : rows0).push_back(i);
    const LogisticModel m1 = fit_logistic(d.select_rows(rows1), outcome, adjustment, options.logistic);
    const LogisticModel m0 = fit_logistic(d.select_rows(rows0), outcome, adjustment, options.logistic);
    const Eigen::MatrixXd x = design_matrix(d, adjustment);
    const Eigen::Map<const Eigen::VectorXd> b1(m1.coefficients.data(), static_cast<Eigen::Index>(m1.coefficients.size()));
    const Eigen::Map<const Eigen::VectorXd> b0(m0.coefficients.data(), static_cast<Eigen::Index>(m0.coefficients.size()));
    const Eigen::VectorXd eta1 = x * b1;
    const Eigen::VectorXd eta0 = x * b0;
    double s1 = 0.0, s0 = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      s1 += logistic(eta1[i]).centered;
      s0 += logistic(eta0[i]).centered;
    }
    const double n = static_cast<double>(d.rows());
    est = finish(s1 / n, s0 / n, EstimatorKind::Regression, d.rows(), dropped);
  } else {
    std::vector<const Column*> cols;
    for (const auto& a : adjustment) {
      const Column& c = d.column(a);
      if (c.kind == ColumnKind::Real) {
        throw EstimationError("stratification needs discrete adjustment columns; '" + a + "' is real-valued");
      }
      cols.push_back(&c);
    }
    struct Cell {
      double sum1 = 0.0, sum0 = 0.0;
      std::size_t n1 = 0, n0 = 0;
    };
    std::map<std::vector<double>, Cell> cells;
    std::vector<double> key(cols.size());
    for (std::size_t i = 0; i < d.rows(); ++i) {
      for (std::size_t j = 0; j < cols.size(); ++j) key[j] = cols[j]->values[i];
      Cell& cell = cells[key];
      if (t[i] == 1.0) {
        cell.sum1 += y[i] - 0.5;
        ++cell.n1;
      } else {
        cell.sum0 += y[i] - 0.5;
        ++cell.n0;
      }
    }
    double acc1 = 0.0, acc0 = 0.0;
    for (const auto& [k, cell] : cells) {
      if (cell.n1 == 0 || cell.n0 == 0) {
        std::string where;
        for (std::size_t j = 0; j < k.size(); ++j) {
          where += (j ? ", " : "") + adjustment[j] + "=" + format_prob(k[j]);
        }
        throw EstimationError("empty adjustment cell: no " + std::string(cell.n1 == 0 ? "treated" : "untreated") +
                              " units with " + where);
      }
      const double weight = static_cast<double>(cell.n1 + cell.n0);
      acc1 += weight * (cell.sum1 / static_cast<double>(cell.n1));
      acc0 += weight * (cell.sum0 / static_cast<double>(cell.n0));
    }
    const double n = static_cast<double>(d.rows());
    est = finish(acc1 / n, acc0 / n, EstimatorKind::Stratification, d.rows(), dropped);
  }
  est.adjustment_set = NodeSet(adjustment.begin(), adjustment.end());
  return est;
}

Estimate ate_iv_wald(const Dataset& data, const std::string& treatment, const std::string& outcome,
                     const std::string& instrument, const EstimatorOptions& options) {
  require_binary(data, treatment, "treatment");
  require_binary(data, outcome, "outcome");
  require_binary(data, instrument, "instrument");
  const auto [d, dropped] = data.complete_cases({treatment, outcome, instrument});
  const auto& z = d.column(instrument).values;
  const ArmMeans reduced = centred_arm_means(z, d.column(outcome).values);
  if (reduced.n_treated == 0 || reduced.n_control == 0) {
    throw EstimationError("degenerate instrument '" + instrument + "': it takes a single value");
  }
  const ArmMeans first = centred_arm_means(z, d.column(treatment).values);
  const double first_stage = first.treated - first.control;
  if (!(std::abs(first_stage) >= options.weak_instrument)) {
    throw EstimationError("weak instrument '" + instrument + "': first-stage contrast " + format_prob(first_stage) +
                          " is below " + format_prob(options.weak_instrument) + " in magnitude");
  }
  Estimate e = finish(reduced.treated, reduced.control, EstimatorKind::IvWald, d.rows(), dropped);
  e.value = (reduced.treated - reduced.control) / first_stage;
  e.ci_low = e.ci_high = e.value;
  e.instrument = instrument;
  return e;
}

double CateModel::predict(std::span<const double> x) const {
  return treated.predict(x).centered - control.predict(x).centered;
}

std::vector<double> CateModel::predict_all(const Dataset& data) const {
  const Eigen::MatrixXd x = design_matrix(data, covariates);
  const Eigen::Map<const Eigen::VectorXd> b1(treated.coefficients.data(),
                                             static_cast<Eigen::Index>(treated.coefficients.size()));
  const Eigen::Map<const Eigen::VectorXd> b0(control.coefficients.data(),
                                             static_cast<Eigen::Index>(control.coefficients.size()));
  const Eigen::VectorXd eta1 = x * b1;
  const Eigen::VectorXd eta0 = x * b0;
  std::vector<double> out(data.rows());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out[i] = logistic(eta1[k]).centered - logistic(eta0[k]).centered;
  }
  return out;
}

CateModel fit_cate(const Dataset& data, const std::string& treatment, const std::string& outcome,
                   const std::vector<std::string>& covariates, const LogisticOptions& options) {
  require_binary(data, treatment, "treatment");
  require_binary(data, outcome, "outcome");
  std::vector<std::string> used{treatment, outcome};
  used.insert(used.end(), covariates.begin(), covariates.end());
  const auto [d, dropped] = data.complete_cases(used);
  std::vector<std::size_t> rows1, rows0;
  const auto& t = d.column(treatment).values;
  for (std::size_t i = 0; i < d.rows(); ++i) (t[i] == 1.0 ? rows1 : rows0).push_back(i);
  const std::size_t need = covariates.size() + 1;
  for (const auto* arm : {&rows1, &rows0}) {
    if (arm->size() < need) {
      throw EstimationError(std::string(arm == &rows1 ? "treated" : "control") + " arm has " +
                            std::to_string(arm->size()) + " rows; at least " + std::to_string(need) +
                            " needed for " + std::to_string(covariates.size()) + " covariates");
    }
  }
  CateModel model;
  model.covariates = covariates;
  model.treated = fit_logistic(d.select_rows(rows1), outcome, covariates, options);
  model.control = fit_logistic(d.select_rows(rows0), outcome, covariates, options);
  return model;
}

}  // namespace sufaudit
