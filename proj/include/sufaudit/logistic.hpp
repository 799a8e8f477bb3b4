#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "sufaudit/dataset.hpp"

namespace sufaudit {

/// Probabilities from a linear predictor, carried in centred form
/// (`p - 1/2`). Computing p and 1 - p as `0.5 + s` and `0.5 - s` from an odd
/// function `s` makes the pair exactly mirror-symmetric under eta -> -eta,
/// which keeps every contrast built from it exactly antisymmetric under 0/1
/// relabelling.
struct LogisticPair {
  double centered;  // p - 1/2, in (-1/2, 1/2)
  double p() const { return 0.5 + centered; }
  double q() const { return 0.5 - centered; }
};

/// Linear predictors are clamped to +-30 so probabilities stay strictly
/// inside (0, 1).
LogisticPair logistic(double eta);

struct LogisticOptions {
  int max_iterations = 100;
  /// Convergence: largest absolute score component.
  double tolerance = 1e-8;
  /// Ridge strength applied to slopes when separation forces a penalised refit.
  double separation_ridge = 1e-2;
  /// Coefficient magnitude above which the unpenalised fit is treated as separated.
  double separation_bound = 25.0;
};

/// Logistic-link linear model. `names[0]` is the intercept.
struct LogisticModel {
  std::vector<std::string> names;
  std::vector<double> coefficients;
  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0;
  /// Largest absolute (penalised) score component at the returned coefficients.
  double max_score = 0.0;
  /// Perfect or quasi-complete separation was detected; coefficients come
  /// from the ridge-penalised refit.
  bool separation = false;
  double ridge = 0.0;

  /// `x` excludes the intercept and follows `names[1..]`.
  double linear_predictor(std::span<const double> x) const;
  LogisticPair predict(std::span<const double> x) const { return logistic(linear_predictor(x)); }
};

inline constexpr const char* kInterceptName = "(intercept)";

/// Maximum-likelihood fit by iteratively reweighted least squares (Newton with
/// step halving). `design` carries the intercept column first. Throws
/// EstimationError for a singular design or an outcome with a single class.
LogisticModel fit_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& outcome,
                           std::vector<std::string> names, const LogisticOptions& options = {});

/// Dataset front end; the used columns must be numeric and complete.
LogisticModel fit_logistic(const Dataset& data, const std::string& outcome,
                           const std::vector<std::string>& covariates, const LogisticOptions& options = {});

/// Intercept column followed by the given columns.
Eigen::MatrixXd design_matrix(const Dataset& data, const std::vector<std::string>& covariates);
Eigen::VectorXd column_vector(const Dataset& data, const std::string& column);

/// Bernoulli log-likelihood of `coefficients` for the given design.
double logistic_log_likelihood(const Eigen::MatrixXd& design, const Eigen::VectorXd& outcome,
                               const Eigen::VectorXd& coefficients);

}  // namespace sufaudit
