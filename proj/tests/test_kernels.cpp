#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "fracpm/kernels.hpp"
#include "support.hpp"

using namespace fracpm;
using fracpm::testing::rel_err;

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace

TEST(GKernel, Values) {
  EXPECT_LE(rel_err(g_kernel(0.5, 1.0), 1.0 / std::sqrt(std::numbers::pi)), 1e-14);
  EXPECT_EQ(g_kernel(1.0, 7.3), 1.0);
  EXPECT_LE(rel_err(g_kernel(0.3, 2.0), 0.20576901592641537644), 1e-13);
  EXPECT_THROW(g_kernel(0.5, 0.0), DomainError);
  EXPECT_THROW(g_kernel(0.5, -1.0), DomainError);
}

TEST(UniformGridTest, RejectsDegenerateGrids) {
  EXPECT_THROW(UniformGrid::over(0.0, 10), UsageError);
  EXPECT_THROW(UniformGrid::over(1.0, 0), UsageError);
}

TEST(PCPair, UntemperedIdentity) {
  const auto grid = UniformGrid::over(1.0, 512);
  for (double a : {0.3, 0.5, 0.8}) {
    const auto pc = pc_pair_tempered(a, 0.0, grid);
    EXPECT_LE(max_abs(pc.identity_defect()), default_tol_conv(1.0)) << "a=" << a;
    EXPECT_LE(rel_err(pc.k.value(512), g_kernel(1.0 - a, 1.0)), 1e-14);
    EXPECT_LE(rel_err(pc.l.value(256), g_kernel(a, 0.5)), 1e-14);
  }
}

TEST(PCPair, TemperedIdentity) {
  const auto grid = UniformGrid::over(1.0, 512);
  const auto pc = pc_pair_tempered(0.5, 1.0, grid);
  EXPECT_LE(rel_err(pc.k.value(512), 0.20755374871029735167), 1e-13);
  EXPECT_LE(max_abs(pc.identity_defect()), default_tol_conv(1.0));
  EXPECT_EQ(pc.k.first_increase(), 0u);
}

TEST(PCPair, Validation) {
  const auto grid = UniformGrid::over(1.0, 16);
  EXPECT_THROW(pc_pair_tempered(1.0, 0.0, grid), DomainError);
  EXPECT_THROW(pc_pair_tempered(0.5, -1.0, grid), DomainError);
}

TEST(VolterraResolvent, StartsAtOne) {
  double prev = 0.0;
  for (std::size_t M : {64, 256, 1024, 4096}) {
    const double s1 = volterra_resolvent(0.5, 1, UniformGrid::over(1.0, M)).s.value(1);
    EXPECT_LT(s1, 1.0);
    EXPECT_GT(s1, prev);
    prev = s1;
  }
  EXPECT_GT(prev, 0.98);
}

TEST(VolterraResolvent, ClosedForms) {
  const auto grid = UniformGrid::over(1.0, 2048);
  for (double a : {0.3, 0.5, 0.8}) {
    const auto r = volterra_resolvent(a, 1, grid);
    const MittagLeffler e(a, 1.0);
    double es = 0.0, eh = 0.0;
    for (std::size_t j = 1; j <= grid.steps; j += 7) {
      const double t = grid.t(j);
      es = std::max(es, rel_err(r.s.value(j), e(-std::pow(t, a))));
      eh = std::max(eh, rel_err(r.h.value(j), ml_derivative_kernel(a, 1.0, t)));
    }
    EXPECT_LE(es, 1e-6) << "a=" << a;
    EXPECT_LE(eh, 1e-6) << "a=" << a;
  }
}

// Halving Δt at least halves the maximum error against the closed form.
// Each case keeps n^{1/a} Δt small; for a = 0.3 the rate is pre-asymptotic
// below M = 256.
TEST(VolterraResolvent, FirstOrderOrBetter) {
  struct Case {
    double a;
    int n;
  };
  for (auto [a, n] : {Case{0.3, 1}, Case{0.5, 1}, Case{0.5, 10}, Case{0.8, 1}, Case{0.8, 10}}) {
    const MittagLeffler e(a, 1.0);
    double prev = 0.0;
    for (std::size_t M : {256, 512, 1024}) {
      const auto grid = UniformGrid::over(1.0, M);
      const auto r = volterra_resolvent(a, n, grid);
      double err = 0.0;
      for (std::size_t j = 1; j <= M; ++j) err = std::max(err, std::fabs(r.s.value(j) - e(-n * std::pow(grid.t(j), a))));
      if (prev > 0.0) EXPECT_LE(err, 0.5 * prev) << "a=" << a << " n=" << n << " M=" << M;
      prev = err;
    }
  }
}

TEST(VolterraResolvent, YosidaKernelIdentity) {
  const auto grid = UniformGrid::over(1.0, 1024);
  for (double a : {0.3, 0.5, 0.8}) {
    const auto r = volterra_resolvent(a, 1, grid);
    const auto conv = convolve(r.h, sample_g_kernel(1.0 - a, grid));
    double d = 0.0;
    for (std::size_t j = 1; j <= grid.steps; ++j) d = std::max(d, std::fabs(conv[j - 1] - r.g_n.value(j)));
    EXPECT_LE(d, default_tol_conv(1.0)) << "a=" << a;
  }
}

TEST(VolterraResolvent, YosidaKernelNonnegativeNonincreasing) {
  const auto grid = UniformGrid::over(1.0, 512);
  for (double a : {0.3, 0.5, 0.8})
    for (int n : {1, 10, 100}) {
      const auto r = volterra_resolvent(a, n, grid);
      EXPECT_EQ(r.g_n.first_increase(), 0u) << "a=" << a << " n=" << n;
      for (std::size_t j = 1; j <= grid.steps; ++j) ASSERT_GE(r.g_n.value(j), 0.0) << "a=" << a << " n=" << n;
      EXPECT_LE(rel_err(r.g_n.value(7), n * r.s.value(7)), 1e-15);
    }
}

TEST(VolterraResolvent, Validation) {
  const auto grid = UniformGrid::over(1.0, 16);
  EXPECT_THROW(volterra_resolvent(0.5, 0, grid), DomainError);
  EXPECT_THROW(volterra_resolvent(1.2, 1, grid), DomainError);
}

TEST(YosidaMollify, ZeroMapsToZero) {
  const auto grid = UniformGrid::over(1.0, 128);
  const auto r = volterra_resolvent(0.5, 10, grid);
  const auto y = yosida_mollify(r.h, TimeSeries::sample(grid, [](double) { return 0.0; }));
  EXPECT_EQ(max_abs(y.values), 0.0);
}

// h * 1 = 1 - E_a(-n t^a). On [0, 0.01] with M = 2048, n^{1/a} Δt = 0.05.
TEST(YosidaMollify, ConstantMatchesClosedForm) {
  const MittagLeffler e(0.5, 1.0);
  const auto max_err = [&](std::size_t M) {
    const auto grid = UniformGrid::over(0.01, M);
    const auto r = volterra_resolvent(0.5, 100, grid);
    const auto y = yosida_mollify(r.h, TimeSeries::sample(grid, [](double) { return 1.0; }));
    EXPECT_EQ(y.values[0], 0.0);
    double err = 0.0;
    for (std::size_t j = 1; j <= M; ++j) err = std::max(err, std::fabs(y.values[j] - (1.0 - e(-100.0 * std::sqrt(grid.t(j))))));
    return err;
  };
  const double coarse = max_err(512), fine = max_err(2048);
  EXPECT_LE(fine, 1e-4);
  EXPECT_LE(fine, 0.25 * coarse);
}

TEST(YosidaMollify, ErrorDecreasesAlongLadder) {
  const auto grid = UniformGrid::over(0.1, 2048);
  const auto f = TimeSeries::sample(grid, [](double t) { return std::sin(t); });
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {10, 100, 1000}) {
    const auto y = yosida_mollify(volterra_resolvent(0.8, n, grid).h, f);
    double acc = 0.0;
    for (std::size_t j = 0; j <= grid.steps; ++j) {
      const double d = y.values[j] - f.values[j];
      acc += (j == 0 || j == grid.steps ? 0.5 : 1.0) * d * d;
    }
    const double err = std::sqrt(acc * grid.dt);
    EXPECT_LT(err, prev) << "n=" << n;
    prev = err;
  }
}

TEST(YosidaMollify, GridMismatch) {
  const auto r = volterra_resolvent(0.5, 10, UniformGrid::over(1.0, 64));
  const auto f = TimeSeries::sample(UniformGrid::over(1.0, 32), [](double t) { return t; });
  EXPECT_THROW(yosida_mollify(r.h, f), UsageError);
}

TEST(ConvexityIdentity, AffineAndConstantCasesVanish) {
  const auto grid = UniformGrid::over(1.0, 256);
  const auto k = volterra_resolvent(0.5, 10, grid).g_n;
  const auto u = TimeSeries::sample(grid, [](double t) { return std::sin(3.0 * t); });
  const auto c = TimeSeries::sample(grid, [](double) { return 0.7; });
  const auto id = [](double x) { return x; };
  const auto one = [](double) { return 1.0; };
  const auto sq = [](double x) { return x * x; };
  const auto dsq = [](double x) { return 2.0 * x; };
  EXPECT_NEAR(convexity_identity_residual(id, one, k, u, 200), 0.0, 1e-15);
  EXPECT_NEAR(convexity_identity_residual(sq, dsq, k, c, 200), 0.0, 1e-15);
}

TEST(ConvexityIdentity, ConvexRemainderNonnegative) {
  const auto grid = UniformGrid::over(1.0, 256);
  const auto sq = [](double x) { return x * x; };
  const auto dsq = [](double x) { return 2.0 * x; };
  for (double a : {0.3, 0.5, 0.8}) {
    const auto k = volterra_resolvent(a, 10, grid).g_n;
    const auto u = TimeSeries::sample(grid, [](double t) { return t; });
    for (std::size_t j : {1u, 17u, 128u, 256u}) EXPECT_GE(convexity_identity_residual(sq, dsq, k, u, j), 0.0);
  }
}

TEST(ConvexityIdentity, RejectsSingularKernel) {
  const auto grid = UniformGrid::over(1.0, 16);
  const auto g = sample_g_kernel(0.5, grid);
  const auto u = TimeSeries::sample(grid, [](double t) { return t; });
  const auto sq = [](double x) { return x * x; };
  const auto dsq = [](double x) { return 2.0 * x; };
  EXPECT_THROW(convexity_identity_residual(sq, dsq, g, u, 4), UsageError);
}

TEST(KernelTableTest, CsvExport) {
  const auto g = sample_g_kernel(0.5, UniformGrid::over(1.0, 4));
  std::ostringstream os;
  g.write_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,value");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 4);
  EXPECT_EQ(g.singular_exponent(), 0.5);
}
