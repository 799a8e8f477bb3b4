#include "sufaudit/logistic.hpp"

#include <algorithm>
#include <cmath>

#include "sufaudit/errors.hpp"

namespace sufaudit {

namespace {

constexpr double kEtaClamp = 30.0;

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

struct Pass {
  Eigen::VectorXd score;
  Eigen::MatrixXd information;
  double log_likelihood = 0.0;
};

// Score, Fisher information and log-likelihood at beta. Residuals are formed
// as (y - 1/2) - s so that relabelling y -> 1 - y with beta -> -beta negates
// them exactly.
Pass evaluate(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta, double ridge) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = x.cols();
  const Eigen::VectorXd eta = x * beta;
  Eigen::VectorXd resid(n);
  Eigen::VectorXd weight(n);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = logistic(eta[i]).centered;
    resid[i] = (y[i] - 0.5) - s;
    weight[i] = (0.5 + s) * (0.5 - s);
    const double e = std::clamp(eta[i], -kEtaClamp, kEtaClamp);
    ll -= y[i] == 1.0 ? softplus(-e) : softplus(e);
  }
  Pass p;
  p.score = x.transpose() * resid;
  p.information = x.transpose() * weight.asDiagonal() * x;
  if (ridge > 0) {
    for (Eigen::Index j = 1; j < k; ++j) {
      p.score[j] -= ridge * beta[j];
      p.information(j, j) += ridge;
      ll -= 0.5 * ridge * beta[j] * beta[j];
    }
  }
  p.log_likelihood = ll;
  return p;
}

struct NewtonResult {
  Eigen::VectorXd beta;
  bool converged = false;
  int iterations = 0;
  double max_score = 0.0;
  double log_likelihood = 0.0;
};

NewtonResult newton(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double ridge, const LogisticOptions& opt) {
  NewtonResult r;
  r.beta = Eigen::VectorXd::Zero(x.cols());
  Pass pass = evaluate(x, y, r.beta, ridge);
  for (r.iterations = 0; r.iterations < opt.max_iterations; ++r.iterations) {
    r.max_score = pass.score.cwiseAbs().maxCoeff();
    if (r.max_score <= opt.tolerance) {
      r.converged = true;
      break;
    }
    const Eigen::LDLT<Eigen::MatrixXd> solver(pass.information);
    if (solver.info() != Eigen::Success) break;
    const Eigen::VectorXd step = solver.solve(pass.score);
    if (!step.allFinite()) break;

    double scale = 1.0;
    Eigen::VectorXd candidate = r.beta + step;
    Pass next = evaluate(x, y, candidate, ridge);
    // Halve only on a real decrease; near the optimum the change is rounding noise.
    const double slack = 1e-12 * (1.0 + std::abs(pass.log_likelihood));
    for (int halving = 0; halving < 30 && next.log_likelihood < pass.log_likelihood - slack; ++halving) {
      scale *= 0.5;
      candidate = r.beta + scale * step;
      next = evaluate(x, y, candidate, ridge);
    }
    r.beta = candidate;
    pass = std::move(next);
    if (r.beta.cwiseAbs().maxCoeff() > 1e3) break;
  }
  r.max_score = pass.score.cwiseAbs().maxCoeff();
  if (!r.converged && r.max_score <= opt.tolerance) r.converged = true;
  r.log_likelihood = pass.log_likelihood;
  return r;
}

}  // namespace

LogisticPair logistic(double eta) {
  const double e = std::clamp(eta, -kEtaClamp, kEtaClamp);
  return {std::copysign(0.5 * std::tanh(0.5 * std::abs(e)), e)};
}

double LogisticModel::linear_predictor(std::span<const double> x) const {
  if (x.size() + 1 != coefficients.size()) {
    throw EstimationError("logistic model expects " + std::to_string(coefficients.size() - 1) + " covariates, got " +
                          std::to_string(x.size()));
  }
  double eta = coefficients[0];
  for (std::size_t j = 0; j < x.size(); ++j) eta += coefficients[j + 1] * x[j];
  return eta;
}

double logistic_log_likelihood(const Eigen::MatrixXd& design, const Eigen::VectorXd& outcome,
                               const Eigen::VectorXd& coefficients) {
  return evaluate(design, outcome, coefficients, 0.0).log_likelihood;
}

LogisticModel fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::string> names,
                           const LogisticOptions& opt) {
  if (x.rows() != y.size()) throw EstimationError("design and outcome lengths differ");
  if (static_cast<std::size_t>(x.cols()) != names.size()) throw EstimationError("design width and names differ");
  if (x.rows() == 0) throw EstimationError("logistic fit on zero rows");
  double positives = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) throw EstimationError("logistic outcome must be 0/1");
    positives += y[i];
  }
  if (positives == 0 || positives == static_cast<double>(y.size())) {
    throw EstimationError("logistic outcome has a single class");
  }
  if (x.rows() < x.cols()) {
    throw EstimationError("design has fewer rows (" + std::to_string(x.rows()) + ") than parameters (" +
                          std::to_string(x.cols()) + ")");
  }

  // Rank check on the scaled cross-product.
  Eigen::MatrixXd gram = x.transpose() * x;
  const Eigen::VectorXd d = gram.diagonal().cwiseSqrt();
  for (Eigen::Index j = 0; j < d.size(); ++j) {
    if (d[j] == 0.0) throw EstimationError("singular design: column '" + names[j] + "' is identically zero");
  }
  gram = d.cwiseInverse().asDiagonal() * gram * d.cwiseInverse().asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < 1e-10 * eig.eigenvalues().maxCoeff()) {
    throw EstimationError("singular design matrix (collinear or constant covariates)");
  }

  NewtonResult fit = newton(x, y, 0.0, opt);
  LogisticModel model;
  const bool separated = !fit.converged || fit.beta.cwiseAbs().maxCoeff() > opt.separation_bound;
  if (separated) {
    fit = newton(x, y, opt.separation_ridge, opt);
    model.separation = true;
    model.ridge = opt.separation_ridge;
  }
  model.names = std::move(names);
  model.coefficients.assign(fit.beta.data(), fit.beta.data() + fit.beta.size());
  model.converged = fit.converged;
  model.iterations = fit.iterations;
  model.max_score = fit.max_score;
  model.log_likelihood = separated ? logistic_log_likelihood(x, y, fit.beta) : fit.log_likelihood;
  return model;
}

Eigen::MatrixXd design_matrix(const Dataset& data, const std::vector<std::string>& covariates) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(data.rows()), static_cast<Eigen::Index>(covariates.size() + 1));
  x.col(0).setOnes();
  for (std::size_t j = 0; j < covariates.size(); ++j) {
    const Column& c = data.column(covariates[j]);
    if (!c.numeric()) throw EstimationError("covariate '" + covariates[j] + "' is not numeric");
    for (std::size_t r = 0; r < data.rows(); ++r) {
      if (is_missing(c.values[r])) {
        throw EstimationError("covariate '" + covariates[j] + "' has a missing value at row " + std::to_string(r + 1));
      }
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j + 1)) = c.values[r];
    }
  }
  return x;
}

Eigen::VectorXd column_vector(const Dataset& data, const std::string& column) {
  const Column& c = data.column(column);
  Eigen::VectorXd v(static_cast<Eigen::Index>(data.rows()));
  for (std::size_t r = 0; r < data.rows(); ++r) {
    if (is_missing(c.values[r])) {
      throw EstimationError("column '" + column + "' has a missing value at row " + std::to_string(r + 1));
    }
    v[static_cast<Eigen::Index>(r)] = c.values[r];
  }
  return v;
}

LogisticModel fit_logistic(const Dataset& data, const std::string& outcome, const std::vector<std::string>& covariates,
                           const LogisticOptions& options) {
  if (data.column(outcome).kind != ColumnKind::Binary) {
    throw EstimationError("logistic outcome '" + outcome + "' is not a binary column");
  }
  std::vector<std::string> names{kInterceptName};
  names.insert(names.end(), covariates.begin(), covariates.end());
  return fit_logistic(design_matrix(data, covariates), column_vector(data, outcome), std::move(names), options);
}

}  // namespace sufaudit
