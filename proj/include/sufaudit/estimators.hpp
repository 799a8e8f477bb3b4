#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sufaudit/dataset.hpp"
#include "sufaudit/graph.hpp"
#include "sufaudit/logistic.hpp"

namespace sufaudit {

enum class EstimatorKind { Ipw, Regression, Stratification, IvWald, Naive };

const char* to_string(EstimatorKind kind);
EstimatorKind estimator_kind_from_string(const std::string& text);

/// Point estimate of an interventional risk difference
/// P(Y=1 | do(X=1)) - P(Y=1 | do(X=0)) with its interval and provenance.
struct Estimate {
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  EstimatorKind estimator = EstimatorKind::Naive;
  NodeSet adjustment_set;
  std::string instrument;
  std::string graph_label;
  /// Estimated P(Y=1 | do(X=1)) and P(Y=1 | do(X=0)); for IV these are the
  /// reduced-form arm means.
  double arm_treated = 0.0;
  double arm_control = 0.0;
  std::size_t n_used = 0;
  std::size_t n_dropped = 0;
  std::size_t bootstrap_reps = 0;
  std::size_t bootstrap_failed = 0;
};

struct EstimatorOptions {
  /// Propensities are clipped to [clip, 1 - clip] before weighting.
  double clip = 0.01;
  /// Minimum |first-stage contrast| accepted by the Wald estimator.
  double weak_instrument = 0.05;
  LogisticOptions logistic;
};

enum class AdjustmentMethod { Ipw, Regression, Stratification };

const char* to_string(AdjustmentMethod method);
AdjustmentMethod adjustment_method_from_string(const std::string& text);

/// Difference of arm means, no adjustment.
Estimate naive_difference(const Dataset& data, const std::string& treatment, const std::string& outcome);

/// Adjusted risk difference. With an empty adjustment set every method
/// reduces to the naive difference of means.
///  - Ipw: Hajek-normalised inverse propensity weighting, logistic propensity.
///  - Regression: g-computation with a logistic outcome model per arm,
///    averaged over the empirical covariate distribution.
///  - Stratification: within-cell arm differences weighted by cell size;
///    adjustment columns must be discrete.
/// Rows missing any used column are dropped and counted.
Estimate ate_adjusted(const Dataset& data, const std::string& treatment, const std::string& outcome,
                      const std::vector<std::string>& adjustment, AdjustmentMethod method,
                      const EstimatorOptions& options = {});

/// Wald ratio: reduced-form contrast of the outcome over the first-stage
/// contrast of the treatment, both across instrument arms.
Estimate ate_iv_wald(const Dataset& data, const std::string& treatment, const std::string& outcome,
                     const std::string& instrument, const EstimatorOptions& options = {});

/// T-learner: one logistic outcome model per treatment arm.
struct CateModel {
  std::vector<std::string> covariates;
  LogisticModel treated;
  LogisticModel control;

  /// tau(x) = mu1(x) - mu0(x), in [-1, 1].
  double predict(std::span<const double> x) const;
  double predict_treated(std::span<const double> x) const { return treated.predict(x).p(); }
  double predict_control(std::span<const double> x) const { return control.predict(x).p(); }
  /// tau(x_i) for every row of `data`.
  std::vector<double> predict_all(const Dataset& data) const;
};

CateModel fit_cate(const Dataset& data, const std::string& treatment, const std::string& outcome,
                   const std::vector<std::string>& covariates, const LogisticOptions& options = {});

}  // namespace sufaudit
