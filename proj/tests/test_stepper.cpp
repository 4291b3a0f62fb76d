#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "fracpm/stepper.hpp"
#include "support.hpp"

using namespace fracpm;
using fracpm::testing::rel_err;

namespace {

constexpr double kPi = std::numbers::pi;
const double kInf = std::numeric_limits<double>::infinity();

GridField gaussian(const Domain& d, double w, double amp = 1.0) {
  const double c = 0.5 * d.length;
  return GridField::sample(d, [&](const auto& x) {
    const double r2 = (x[0] - c) * (x[0] - c) + (x[1] - c) * (x[1] - c);
    return amp * std::exp(-r2 / (2 * w * w));
  });
}

StepperOptions linear_options(double dt, double t_end) {
  StepperOptions o;
  o.dt = dt;
  o.t_end = t_end;
  o.flux = false;
  o.enforce_monotone = false;
  o.record_energy = false;
  return o;
}

bool nonincreasing(const std::vector<double>& v, double tol) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] + tol * v[0]) return false;
  return true;
}

}  // namespace

TEST(L1Weights, Values) {
  const auto b = l1_weights(0.5, 4);
  ASSERT_EQ(b.size(), 4u);
  EXPECT_DOUBLE_EQ(b[0], 1.0);
  EXPECT_LE(rel_err(b[1], std::sqrt(2.0) - 1.0), 1e-14);
  EXPECT_LE(rel_err(b[3], 2.0 - std::sqrt(3.0)), 1e-14);
  const auto one = l1_weights(1.0, 3);
  EXPECT_EQ(one, (std::vector<double>{1.0, 0.0, 0.0}));
  EXPECT_THROW(l1_weights(0.0, 3), DomainError);
  EXPECT_THROW(l1_weights(0.5, 0), DomainError);
}

TEST(L1Weights, PositiveDecreasingTelescoping) {
  for (double a : {0.3, 0.5, 0.8}) {
    const auto b = l1_weights(a, 1000);
    double sum = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      ASSERT_GT(b[j], 0.0);
      if (j > 0) ASSERT_LT(b[j], b[j - 1]);
      sum += b[j];
    }
    EXPECT_LE(rel_err(sum, std::pow(1000.0, 1.0 - a)), 1e-12);
  }
}

TEST(Stepper, LinearModeFollowsMittagLeffler) {
  const Domain d{2, 16, 2 * kPi};
  const auto u0 = GridField::sample(d, [](const auto& x) { return std::cos(x[0]); });
  for (double a : {0.5, 0.8}) {
    const FracParams p{a, 0.5, 1.0, 1.0, 0.0};
    const auto r = run(u0, p, linear_options(1e-3, 1.0));
    const double exact = MittagLeffler(a, 1.0)(-1.0);
    EXPECT_LE(std::fabs(r.series.linf.back() - exact), 2e-3) << "a=" << a;
    EXPECT_EQ(r.series.size(), 1001u);
  }
}

TEST(Stepper, ClassicalLimitIsBackwardEuler) {
  const Domain d{2, 16, 2 * kPi};
  const auto u0 = GridField::sample(d, [](const auto& x) { return std::cos(x[0]) * std::cos(2 * x[1]); });
  const FracParams p{1.0, 0.5, 1.0, 0.7, 0.0};
  const double dt = 0.05;
  const auto r = run(u0, p, linear_options(dt, 1.0));
  const double expected = std::pow(1.0 / (1.0 + 0.7 * 5.0 * dt), 20);
  EXPECT_LE(rel_err(r.series.linf.back(), expected), 1e-12);
}

TEST(Stepper, ZeroStaysZero) {
  const Domain d{2, 16, 4.0};
  StepperOptions o;
  o.dt = 0.01;
  o.t_end = 0.1;
  const auto r = run(GridField(d), FracParams{0.5, 0.5, 2.0, 0.0, 0.0}, o);
  EXPECT_EQ(r.series.linf.back(), 0.0);
  EXPECT_EQ(r.rejections, 0u);
}

TEST(Stepper, HistoryReconstructsInitialDatum) {
  const Domain d{2, 16, 8.0};
  const auto u0 = gaussian(d, 1.0);
  StepperState st(u0, FracParams{0.5, 0.5, 1.0, 0.0, 0.0});
  for (int i = 0; i < 5; ++i) st.step(1e-3);
  EXPECT_EQ(st.steps(), 5u);
  const auto back = st.history(0);
  for (std::size_t i = 0; i < u0.size(); ++i) ASSERT_NEAR(back[i], u0[i], 1e-13);
  EXPECT_THROW(st.history(6), UsageError);
  EXPECT_THROW(st.propose(0.0), DomainError);
}

TEST(Stepper, NonlinearRunConservesMassAndIsMonotone) {
  const Domain d{2, 128, 16.0};
  StepperOptions o;
  o.dt = 1e-3;
  o.t_end = 0.2;
  o.norm_q = 4.0;
  // m = 2 steepens the profile; the run ends once the spectrum is no longer resolved.
  o.stop_when_unresolved = true;
  for (double m : {1.0, 2.0}) {
    const auto r = run(gaussian(d, 1.0), FracParams{0.5, 0.75, m, 0.0, 0.0}, o);
    EXPECT_GT(r.series.t.back(), 0.05) << "m=" << m;
    EXPECT_LE(r.mass_drift, 1e-10) << "m=" << m;
    for (auto c : {NormSeries::Column::L1, NormSeries::Column::L2, NormSeries::Column::Lq, NormSeries::Column::Linf})
      EXPECT_TRUE(nonincreasing(r.series.column(c), o.tol_mono)) << "m=" << m;
  }
}

TEST(Stepper, MixedSignL1Nonincreasing) {
  const Domain d{2, 32, 2 * kPi};
  const auto u0 = GridField::sample(d, [](const auto& x) { return std::sin(x[0]) * std::sin(x[1]); });
  StepperOptions o;
  o.dt = 1e-3;
  o.t_end = 0.1;
  const auto r = run(u0, FracParams{0.5, 0.5, 1.0, 1e-2, 0.0}, o);
  EXPECT_TRUE(nonincreasing(r.series.l1, 1e-6));
  EXPECT_LE(std::fabs(r.final_field.sum()), 1e-10);
}

TEST(Stepper, GradedMeshHitsNodes) {
  const Domain d{2, 16, 2 * kPi};
  auto o = linear_options(0.0, 0.5);
  o.graded_steps = 20;
  o.grading = 2.0;
  const auto r = run(GridField::sample(d, [](const auto& x) { return std::cos(x[0]); }), FracParams{0.5, 0.5, 1.0, 1.0, 0.0}, o);
  ASSERT_EQ(r.series.size(), 21u);
  for (std::size_t j = 0; j <= 20; ++j) EXPECT_NEAR(r.series.t[j], 0.5 * std::pow(j / 20.0, 2.0), 1e-15);
}

TEST(Stepper, BlowupOnNonFiniteField) {
  const Domain d{2, 16, 4.0};
  StepperState st(gaussian(d, 0.5, 1e200), FracParams{0.5, 0.5, 2.0, 0.0, 0.0});
  EXPECT_THROW(st.propose(1e-3), BlowupError);
}

TEST(Stepper, StepUnderflowIsReported) {
  const Domain d{2, 32, 8.0};
  StepperOptions o;
  o.dt = 1.0;
  o.dt_min = 0.4;
  o.t_end = 1.0;
  try {
    run(gaussian(d, 0.5, 10.0), FracParams{0.5, 0.5, 2.0, 0.0, 0.0}, o);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("step size underflow"), std::string::npos);
  }
}

TEST(Stepper, RejectsBadInputs) {
  const Domain d{2, 16, 4.0};
  StepperOptions o;
  o.t_end = 0.0;
  EXPECT_THROW(run(GridField(d), FracParams{}, o), DomainError);
  o.t_end = 1.0;
  EXPECT_THROW(run(GridField(d), FracParams{0.5, 0.3, 1.0, 0.0, 0.0}, o), DomainError);
}

TEST(ViscosityLadder, DifferencesShrink) {
  const Domain d{2, 32, 8.0};
  StepperOptions o;
  o.dt = 1e-3;
  o.t_end = 0.05;
  const auto lad = run_viscosity_ladder(gaussian(d, 1.0), FracParams{0.5, 0.5, 1.0, 0.0, 0.0}, o, {1e-2, 1e-3, 1e-4});
  ASSERT_EQ(lad.successive_differences.size(), 2u);
  EXPECT_LT(lad.successive_differences[1], lad.successive_differences[0]);
  EXPECT_TRUE(lad.converged);
}

TEST(NormSeriesTest, CsvRoundTrip) {
  NormSeries s;
  s.push(0.0, 1.0, 0.5, 0.25, 2.0, 0.1, 0.0);
  s.push(0.1, 0.9, 0.45, 0.2, 1.5, 0.09, 0.1);
  std::stringstream io;
  s.write_csv(io);
  const auto back = NormSeries::read_csv(io);
  EXPECT_EQ(back.t, s.t);
  EXPECT_EQ(back.linf, s.linf);
  EXPECT_EQ(back.dt, s.dt);
}

TEST(NormSeriesTest, RejectsMalformedInput) {
  std::istringstream bad_header("t,L1\n0,1\n");
  EXPECT_THROW(NormSeries::read_csv(bad_header), UsageError);
  std::istringstream bad_row("t,L1,L2,Lq,Linf,energy_integrand,dt\n0,1,2\n");
  EXPECT_THROW(NormSeries::read_csv(bad_row), UsageError);
  std::istringstream decreasing("t,L1,L2,Lq,Linf,energy_integrand,dt\n1,1,1,1,1,1,0\n0.5,1,1,1,1,1,0\n");
  EXPECT_THROW(NormSeries::read_csv(decreasing), UsageError);
  EXPECT_THROW(NormSeries::parse_column("L7"), UsageError);
  EXPECT_EQ(NormSeries::parse_column("energy_integrand"), NormSeries::Column::Energy);
}
