#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sufaudit/errors.hpp"
#include "sufaudit/estimators.hpp"

using namespace sufaudit;

namespace {

// Binary confounder c, treatment t, outcome y; optional instrument z.
Dataset confounded(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u;
  std::vector<double> c(n), t(n), y(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = u(rng) < 0.4;
    z[i] = u(rng) < 0.5;
    t[i] = u(rng) < 0.2 + 0.4 * c[i] + 0.3 * z[i];
    y[i] = u(rng) < 0.3 + 0.2 * t[i] + 0.3 * c[i];
  }
  return Dataset({{"c", Column::binary(c)}, {"t", Column::binary(t)}, {"y", Column::binary(y)}, {"z", Column::binary(z)}});
}

Dataset flip(const Dataset& d, const std::string& col) {
  std::vector<double> v = d.column(col).values;
  for (double& x : v) x = is_missing(x) ? x : 1.0 - x;
  return d.with_column(col, Column::binary(v));
}

// Cell-size weighted within-stratum differences, computed directly.
double stratified_oracle(const Dataset& d) {
  const auto& c = d.column("c").values;
  const auto& t = d.column("t").values;
  const auto& y = d.column("y").values;
  double total = 0.0;
  for (int cell = 0; cell < 2; ++cell) {
    double s1 = 0, n1 = 0, s0 = 0, n0 = 0;
    for (std::size_t i = 0; i < d.rows(); ++i) {
      if (c[i] != cell) continue;
      if (t[i] == 1) {
        s1 += y[i];
        n1 += 1;
      } else {
        s0 += y[i];
        n0 += 1;
      }
    }
    total += (n1 + n0) / static_cast<double>(d.rows()) * (s1 / n1 - s0 / n0);
  }
  return total;
}

}  // namespace

TEST(Naive, DifferenceOfArmMeans) {
  const Dataset d = confounded(5000, 1);
  const Estimate e = naive_difference(d, "t", "y");
  EXPECT_NEAR(e.value, oracle::conditional_mean(d, "y", "t", 1) - oracle::conditional_mean(d, "y", "t", 0), 1e-12);
  EXPECT_EQ(e.estimator, EstimatorKind::Naive);
  EXPECT_EQ(e.n_used, 5000u);
}

TEST(Adjusted, EmptySetReducesToNaive) {
  const Dataset d = confounded(3000, 2);
  const double naive = naive_difference(d, "t", "y").value;
  for (auto m : {AdjustmentMethod::Ipw, AdjustmentMethod::Regression, AdjustmentMethod::Stratification}) {
    EXPECT_NEAR(ate_adjusted(d, "t", "y", {}, m).value, naive, 1e-12) << to_string(m);
  }
}

TEST(Adjusted, SaturatedModelsAgreeWithStratification) {
  const Dataset d = confounded(20000, 3);
  const double oracle_value = stratified_oracle(d);
  for (auto m : {AdjustmentMethod::Ipw, AdjustmentMethod::Regression, AdjustmentMethod::Stratification}) {
    const Estimate e = ate_adjusted(d, "t", "y", {"c"}, m);
    EXPECT_NEAR(e.value, oracle_value, 1e-8) << to_string(m);
    EXPECT_EQ(e.adjustment_set, NodeSet{"c"});
  }
  // True effect is 0.2; the naive contrast is biased by the confounder.
  EXPECT_NEAR(oracle_value, 0.2, 0.03);
  EXPECT_GT(naive_difference(d, "t", "y").value - 0.2, 0.05);
}

TEST(Adjusted, RelabellingNegatesExactly) {
  const Dataset d = confounded(4000, 4);
  for (auto m : {AdjustmentMethod::Ipw, AdjustmentMethod::Regression, AdjustmentMethod::Stratification}) {
    const double base = ate_adjusted(d, "t", "y", {"c"}, m).value;
    EXPECT_EQ(ate_adjusted(flip(d, "t"), "t", "y", {"c"}, m).value, -base) << to_string(m);
    EXPECT_EQ(ate_adjusted(flip(d, "y"), "t", "y", {"c"}, m).value, -base) << to_string(m);
  }
  const double iv = ate_iv_wald(d, "t", "y", "z").value;
  EXPECT_EQ(ate_iv_wald(flip(d, "t"), "t", "y", "z").value, -iv);
}

TEST(Adjusted, DropsMissingRowsAndCountsThem) {
  Dataset d = confounded(1000, 5);
  std::vector<double> c = d.column("c").values;
  c[0] = kMissing;
  c[10] = kMissing;
  d = d.with_column("c", Column::binary(c));
  const Estimate e = ate_adjusted(d, "t", "y", {"c"}, AdjustmentMethod::Regression);
  EXPECT_EQ(e.n_dropped, 2u);
  EXPECT_EQ(e.n_used, 998u);
}

TEST(Adjusted, Errors) {
  const Dataset d = confounded(500, 6);
  EXPECT_THROW(ate_adjusted(d, "t", "y", {"t"}, AdjustmentMethod::Ipw), EstimationError);
  // A covariate identical to the treatment separates the arms.
  const Dataset sep = d.with_column("copy", Column::binary(d.column("t").values));
  try {
    ate_adjusted(sep, "t", "y", {"copy"}, AdjustmentMethod::Ipw);
    FAIL();
  } catch (const EstimationError& e) {
    EXPECT_NE(std::string(e.what()).find("overlap"), std::string::npos);
  }
  try {
    ate_adjusted(sep, "t", "y", {"copy"}, AdjustmentMethod::Stratification);
    FAIL();
  } catch (const EstimationError& e) {
    EXPECT_NE(std::string(e.what()).find("empty adjustment cell"), std::string::npos);
  }
  std::vector<double> r(d.rows());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = 0.5 * static_cast<double>(i % 7);
  const Dataset real = d.with_column("r", Column::real(r));
  EXPECT_THROW(ate_adjusted(real, "t", "y", {"r"}, AdjustmentMethod::Stratification), EstimationError);
}

TEST(IvWald, RatioOfContrasts) {
  const Dataset d = confounded(20000, 7);
  const double rf = oracle::conditional_mean(d, "y", "z", 1) - oracle::conditional_mean(d, "y", "z", 0);
  const double fs = oracle::conditional_mean(d, "t", "z", 1) - oracle::conditional_mean(d, "t", "z", 0);
  const Estimate e = ate_iv_wald(d, "t", "y", "z");
  EXPECT_NEAR(e.value, rf / fs, 1e-12);
  EXPECT_EQ(e.instrument, "z");
  EXPECT_EQ(e.estimator, EstimatorKind::IvWald);
}

TEST(IvWald, WeakAndDegenerateInstruments) {
  const Dataset d = confounded(2000, 8);
  const Dataset constant = d.with_column("k", Column::binary(std::vector<double>(d.rows(), 1.0)));
  EXPECT_THROW(ate_iv_wald(constant, "t", "y", "k"), EstimationError);
  // c drives t by 0.4: rejected once the threshold exceeds it.
  EstimatorOptions strict;
  strict.weak_instrument = 0.9;
  try {
    ate_iv_wald(d, "t", "y", "c", strict);
    FAIL();
  } catch (const EstimationError& e) {
    EXPECT_NE(std::string(e.what()).find("weak instrument"), std::string::npos);
  }
}

TEST(Cate, SaturatedArmsGiveCellDifferences) {
  const Dataset d = confounded(20000, 9);
  const CateModel m = fit_cate(d, "t", "y", {"c"});
  for (int cell = 0; cell < 2; ++cell) {
    double s1 = 0, n1 = 0, s0 = 0, n0 = 0;
    for (std::size_t i = 0; i < d.rows(); ++i) {
      if (d.column("c").values[i] != cell) continue;
      (d.column("t").values[i] == 1 ? s1 : s0) += d.column("y").values[i];
      (d.column("t").values[i] == 1 ? n1 : n0) += 1;
    }
    const double x = cell;
    EXPECT_NEAR(m.predict(std::span<const double>(&x, 1)), s1 / n1 - s0 / n0, 1e-8);
  }
  const auto all = m.predict_all(d);
  EXPECT_EQ(all.size(), d.rows());
}

TEST(Cate, ArmTooSmall) {
  const Dataset d({{"t", Column::binary({1, 0, 0, 0})}, {"y", Column::binary({1, 0, 1, 0})},
                   {"x", Column::real({1, 2, 3, 4})}});
  EXPECT_THROW(fit_cate(d, "t", "y", {"x"}), EstimationError);
}

TEST(Parsing, MethodNames) {
  EXPECT_EQ(adjustment_method_from_string("ipw"), AdjustmentMethod::Ipw);
  EXPECT_EQ(adjustment_method_from_string("regression"), AdjustmentMethod::Regression);
  EXPECT_EQ(adjustment_method_from_string("stratification"), AdjustmentMethod::Stratification);
  EXPECT_THROW(adjustment_method_from_string("magic"), EstimationError);
}
