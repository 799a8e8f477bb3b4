#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sufaudit/errors.hpp"
#include "sufaudit/logistic.hpp"

using namespace sufaudit;

namespace {

// Score X'(y - p) computed directly from the coefficients.
double max_score(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<double>& beta) {
  Eigen::VectorXd score = Eigen::VectorXd::Zero(x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double eta = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) eta += x(i, j) * beta[static_cast<std::size_t>(j)];
    const double r = y(i) - oracle::sigmoid(eta);
    for (Eigen::Index j = 0; j < x.cols(); ++j) score(j) += x(i, j) * r;
  }
  return score.cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Logistic, SaturatedBinaryCovariateMatchesClosedForm) {
  // Group 0: 3 of 10 positive; group 1: 8 of 10 positive.
  std::vector<double> x;
  std::vector<double> y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(0);
    y.push_back(i < 3);
    x.push_back(1);
    y.push_back(i < 8);
  }
  const Dataset d({{"x", Column::binary(x)}, {"y", Column::binary(y)}});
  const LogisticModel m = fit_logistic(d, "y", {"x"});
  ASSERT_TRUE(m.converged);
  EXPECT_FALSE(m.separation);
  EXPECT_EQ(m.names.front(), kInterceptName);
  EXPECT_NEAR(m.coefficients[0], oracle::logit(0.3), 1e-9);
  EXPECT_NEAR(m.coefficients[1], oracle::logit(0.8) - oracle::logit(0.3), 1e-9);
}

TEST(Logistic, ScoreEquationsVanishAtConvergence) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u;
  const int n = 2000;
  Eigen::MatrixXd x(n, 4);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = z(rng);
    x(i, 2) = u(rng) < 0.4 ? 1.0 : 0.0;
    x(i, 3) = z(rng) * 0.5 + x(i, 1);
    const double eta = -0.3 + 0.8 * x(i, 1) - 1.1 * x(i, 2) + 0.4 * x(i, 3);
    y(i) = u(rng) < oracle::sigmoid(eta) ? 1.0 : 0.0;
  }
  const LogisticModel m = fit_logistic(x, y, {kInterceptName, "a", "b", "c"});
  ASSERT_TRUE(m.converged);
  EXPECT_LE(max_score(x, y, m.coefficients), 1e-6);
  EXPECT_NEAR(m.log_likelihood,
              logistic_log_likelihood(x, y, Eigen::Map<const Eigen::VectorXd>(m.coefficients.data(), 4)), 1e-9);
}

TEST(Logistic, RelabellingOutcomeNegatesCoefficients) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u;
  const int n = 500;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = u(rng) * 4 - 2;
    y(i) = u(rng) < oracle::sigmoid(0.7 * x(i, 1)) ? 1.0 : 0.0;
  }
  const Eigen::VectorXd flipped = Eigen::VectorXd::Ones(n) - y;
  const auto a = fit_logistic(x, y, {kInterceptName, "x"});
  const auto b = fit_logistic(x, flipped, {kInterceptName, "x"});
  EXPECT_NEAR(a.coefficients[0], -b.coefficients[0], 1e-12);
  EXPECT_NEAR(a.coefficients[1], -b.coefficients[1], 1e-12);
}

TEST(Logistic, SeparationIsFlaggedAndPenalised) {
  const Dataset d({{"x", Column::real({0, 1, 2, 3, 4, 5})}, {"y", Column::binary({0, 0, 0, 1, 1, 1})}});
  const LogisticModel m = fit_logistic(d, "y", {"x"});
  EXPECT_TRUE(m.separation);
  EXPECT_GT(m.ridge, 0.0);
  for (double c : m.coefficients) EXPECT_TRUE(std::isfinite(c));
}

TEST(Logistic, Errors) {
  const Dataset one_class({{"x", Column::real({0, 1, 2})}, {"y", Column::binary({1, 1, 1})}});
  EXPECT_THROW(fit_logistic(one_class, "y", {"x"}), EstimationError);
  const Dataset collinear(
      {{"a", Column::real({0, 1, 2, 3})}, {"b", Column::real({0, 2, 4, 6})}, {"y", Column::binary({0, 1, 0, 1})}});
  EXPECT_THROW(fit_logistic(collinear, "y", {"a", "b"}), EstimationError);
  const Dataset tiny({{"a", Column::real({0, 1})}, {"b", Column::real({1, 0})}, {"y", Column::binary({0, 1})}});
  EXPECT_THROW(fit_logistic(tiny, "y", {"a", "b"}), EstimationError);
  const Dataset missing({{"x", Column::real({0, kMissing, 2, 3})}, {"y", Column::binary({0, 1, 0, 1})}});
  EXPECT_THROW(fit_logistic(missing, "y", {"x"}), Error);
}

TEST(Logistic, CenteredPairIsMirrorSymmetric) {
  for (double eta : {-40.0, -3.0, -1e-9, 0.0, 0.5, 12.0}) {
    const auto a = logistic(eta);
    const auto b = logistic(-eta);
    EXPECT_EQ(a.centered, -b.centered);
    EXPECT_EQ(a.p(), b.q());
    EXPECT_GT(a.p(), 0.0);
    EXPECT_LT(a.p(), 1.0);
  }
}
