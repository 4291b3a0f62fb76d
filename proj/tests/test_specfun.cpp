#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "fracpm/specfun.hpp"
#include "support.hpp"

using namespace fracpm;
using fracpm::testing::rel_err;

TEST(Gamma, KnownValues) {
  EXPECT_LE(rel_err(fracpm::gamma(0.5), std::sqrt(std::numbers::pi)), 1e-13);
  EXPECT_LE(rel_err(fracpm::gamma(1.0), 1.0), 1e-13);
  EXPECT_LE(rel_err(fracpm::gamma(5.0), 24.0), 1e-13);
  EXPECT_LE(rel_err(fracpm::gamma(0.3), 2.991568987687590962), 1e-13);
}

TEST(Gamma, PolesThrow) {
  EXPECT_THROW(fracpm::gamma(0.0), DomainError);
  EXPECT_THROW(fracpm::gamma(-2.0), DomainError);
}

TEST(MittagLeffler, ParameterValidation) {
  EXPECT_THROW(MittagLeffler(0.0, 1.0), DomainError);
  EXPECT_THROW(MittagLeffler(0.5, 0.0), DomainError);
  EXPECT_THROW(ml_eval({0.5, 1.0}, 0.1), DomainError);
}

TEST(MittagLeffler, TrivialValues) {
  EXPECT_LE(rel_err(ml_eval({1.0, 1.0}, -1.0), std::exp(-1.0)), 1e-15);
  EXPECT_EQ(ml_eval({0.5, 1.0}, 0.0), 1.0);
  // E_{1/2}(-x) = e^{x²} erfc(x).
  EXPECT_LE(rel_err(ml_eval({0.5, 1.0}, -1.0), std::exp(1.0) * std::erfc(1.0)), 1e-12);
  EXPECT_LE(rel_err(ml_eval({0.5, 1.0}, -3.0), std::exp(9.0) * std::erfc(3.0)), 1e-12);
}

TEST(MittagLeffler, FrozenOracleValues) {
  EXPECT_LE(rel_err(ml_eval({0.8, 1.0}, -1.0), 0.38694857861897685146), 1e-12);
  EXPECT_LE(rel_err(ml_eval({0.3, 1.0}, -1.0), 0.45659440832969066901), 1e-12);
  EXPECT_LE(rel_err(ml_eval({0.5, 0.5}, -1.0), 0.13660600739194928254), 1e-12);
}

TEST(MittagLeffler, MatchesExtendedPrecisionLattice) {
  const auto rows = fracpm::testing::load_ml_reference();
  ASSERT_GE(rows.size(), 200u);
  for (const auto& r : rows) {
    const double v = ml_eval({r.alpha, r.beta}, r.z);
    EXPECT_LE(rel_err(v, r.value), 1e-10) << "alpha=" << r.alpha << " beta=" << r.beta << " z=" << r.z;
  }
}

TEST(MittagLeffler, ExpConsistency) {
  const MittagLeffler e(1.0, 1.0);
  for (int i = 0; i <= 500; ++i) {
    const double z = -50.0 * i / 500.0;
    EXPECT_LE(std::fabs(e(z) - std::exp(z)), 1e-12);
  }
}

TEST(MittagLeffler, PositiveAndDecreasing) {
  for (double a : {0.3, 0.5, 0.8, 1.0}) {
    const MittagLeffler e(a, 1.0);
    EXPECT_EQ(e(0.0), 1.0);
    double prev = 1.0;
    for (int i = 1; i <= 1000; ++i) {
      const double v = e(-0.1 * i);
      EXPECT_GT(v, 0.0) << "a=" << a << " t=" << 0.1 * i;
      EXPECT_LT(v, prev) << "a=" << a << " t=" << 0.1 * i;
      prev = v;
    }
  }
}

TEST(MittagLeffler, BranchesAgreeAtCrossover) {
  for (double a : {0.3, 0.5, 0.8})
    for (double b : {1.0, a}) {
      const MittagLeffler e(a, b);
      const double x = e.series_limit();
      const double s = e.series(x), q = e.integral(x);
      EXPECT_LE(rel_err(s, q), 1e-9) << "a=" << a << " b=" << b;
      // Far out the asymptotic expansion is accurate and must agree with the integral.
      double err = 0.0;
      const double far = 60.0;
      const double asy = e.asymptotic(far, &err);
      EXPECT_LE(rel_err(asy, e.integral(far)), 1e-9) << "a=" << a << " b=" << b;
    }
}

TEST(MLDerivativeKernel, Values) {
  EXPECT_LE(rel_err(ml_derivative_kernel(1.0, 2.0, 1.0), std::exp(-2.0)), 1e-14);
  EXPECT_LE(rel_err(ml_derivative_kernel(0.5, 0.0, 4.0), 0.5 / std::sqrt(std::numbers::pi)), 1e-14);
  EXPECT_LE(rel_err(ml_derivative_kernel(0.5, 1.0, 1.0), 0.13660600739194928254), 1e-12);
  EXPECT_THROW(ml_derivative_kernel(0.5, 1.0, 0.0), DomainError);
}
