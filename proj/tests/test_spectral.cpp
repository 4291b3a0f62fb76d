#include <cmath>
#include <numbers>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "fracpm/spectral.hpp"
#include "support.hpp"

using namespace fracpm;
using fracpm::testing::rel_err;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs_diff(const GridField& a, const GridField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

double max_abs(const GridField& a) { return lq_norm(a, std::numeric_limits<double>::infinity()); }

GridField mean_free(GridField f) {
  const double mean = f.sum() / static_cast<double>(f.size());
  for (auto& v : f.values()) v -= mean;
  return f;
}

}  // namespace

TEST(DomainTest, Validation) {
  EXPECT_THROW((Domain{1, 16, 1.0}.validate()), DomainError);
  EXPECT_THROW((Domain{2, 6, 1.0}.validate()), DomainError);
  EXPECT_THROW((Domain{2, 15, 1.0}.validate()), DomainError);
  EXPECT_THROW((Domain{2, 16, 0.0}.validate()), DomainError);
  EXPECT_NO_THROW((Domain{3, 8, 1.0}.validate()));
}

TEST(GridFieldTest, RejectsMismatch) {
  const Domain d{2, 8, 1.0};
  EXPECT_THROW(GridField(d, std::vector<double>(10, 0.0)), UsageError);
  GridField a(d), b(Domain{2, 16, 1.0});
  EXPECT_THROW(a += b, UsageError);
}

TEST(Transform, RoundTrip) {
  for (int dim : {2, 3}) {
    const Domain d{dim, 16, 3.0};
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    GridField f(d);
    for (auto& v : f.values()) v = nd(rng);
    EXPECT_LE(max_abs_diff(to_grid(to_spectral(f)), f), 1e-12 * max_abs(f)) << "dim=" << dim;
  }
}

TEST(FracLaplacian, Eigenfunction) {
  const double L = 5.0, s = 0.75;
  const Domain d{2, 32, L};
  const auto f = GridField::sample(d, [&](const auto& x) { return std::sin(2 * kPi * x[0] / L); });
  const auto g = frac_laplacian(f, s);
  EXPECT_LE(max_abs_diff(g, std::pow(2 * kPi / L, 2 * s) * f), 1e-12);
}

TEST(FracLaplacian, ConstantsAndRange) {
  const Domain d{2, 16, 1.0};
  const GridField c(d, 3.0);
  EXPECT_LE(max_abs(frac_laplacian(c, 0.5)), 1e-14);
  EXPECT_LE(max_abs(frac_laplacian(c, -0.5)), 1e-14);
  EXPECT_LE(max_abs_diff(frac_laplacian(c, 0.0), c), 1e-14);
  EXPECT_THROW(frac_laplacian(c, -1.0), DomainError);
  EXPECT_THROW(frac_laplacian(c, 1.5), DomainError);
}

TEST(FracLaplacian, InverseRoundTripAndComposition) {
  const Domain d{2, 32, 2 * kPi};
  std::mt19937_64 rng(7);
  const auto f = mean_free(random_bandlimited_field(d, 10, rng));
  for (double s : {0.5, 0.75, 0.9}) {
    const auto r = frac_laplacian(frac_laplacian(f, s), -s);
    EXPECT_LE(max_abs_diff(r, f), 1e-10 * max_abs(f)) << "s=" << s;
  }
  for (auto [a, b] : {std::pair{0.3, 0.4}, std::pair{-0.6, 0.9}, std::pair{0.7, 0.3}}) {
    const auto ab = frac_laplacian(frac_laplacian(f, a), b);
    const auto direct = frac_laplacian(f, a + b);
    EXPECT_LE(max_abs_diff(ab, direct), 1e-10 * max_abs(direct)) << a << "+" << b;
  }
}

TEST(GradInvLaplacian, SingleMode) {
  const double L = 4.0, s = 0.6;
  const Domain d{2, 32, L};
  const double k = 2 * kPi / L;
  const auto f = GridField::sample(d, [&](const auto& x) { return std::sin(k * x[0]); });
  const auto g = grad_inv_laplacian(f, s);
  ASSERT_EQ(g.size(), 2u);
  const auto ex = GridField::sample(d, [&](const auto& x) { return std::pow(k, 1 - 2 * s) * std::cos(k * x[0]); });
  EXPECT_LE(max_abs_diff(g[0], ex), 1e-12);
  EXPECT_LE(max_abs(g[1]), 1e-14);
  for (const auto& c : grad_inv_laplacian(GridField(d, 2.0), s)) EXPECT_LE(max_abs(c), 1e-14);
}

TEST(GradInvLaplacian, DivergenceIdentity) {
  const Domain d{2, 32, 2 * kPi};
  std::mt19937_64 rng(3);
  const auto f = random_bandlimited_field(d, 10, rng);
  for (double s : {0.5, 0.8}) {
    const auto lhs = divergence(grad_inv_laplacian(f, s));
    const auto rhs = -1.0 * frac_laplacian(f, 1 - s);
    EXPECT_LE(max_abs_diff(lhs, rhs), 1e-10 * max_abs(rhs)) << "s=" << s;
  }
}

TEST(NonlinearFlux, TrivialInputs) {
  const Domain d{2, 16, 4.0};
  const FracParams p{0.5, 0.5, 1.5, 0.0, 0.0};
  for (double c : {0.0, 2.5})
    for (const auto& g : nonlinear_flux(GridField(d, c), p)) EXPECT_LE(max_abs(g), 1e-13) << "c=" << c;
}

// A positive single mode keeps |u|^m = u^m a trigonometric polynomial for
// integer m, so the dealiased product equals the pointwise product formed on
// a 4× refined grid.
TEST(NonlinearFlux, MatchesRefinedGridProduct) {
  const double L = 2 * kPi;
  const Domain d{2, 32, L}, fine{2, 128, L};
  const auto shape = [](const std::array<double, 3>& x) { return 2.0 + std::cos(x[0]) + 0.5 * std::sin(2 * x[1]); };
  for (double m : {1.0, 2.0}) {
    const FracParams p{0.5, 0.5, m, 0.0, 0.0};
    const auto coarse = nonlinear_flux(GridField::sample(d, shape), p);
    const auto uf = GridField::sample(fine, shape);
    const auto gf = grad_inv_laplacian(uf, p.s);
    for (int a = 0; a < 2; ++a) {
      double err = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < d.n; ++i)
        for (std::size_t j = 0; j < d.n; ++j) {
          const std::size_t fi = (4 * i) * fine.n + 4 * j;
          const double exact = std::pow(std::fabs(uf[fi]), m) * gf[a][fi];
          err = std::max(err, std::fabs(coarse[a][i * d.n + j] - exact));
          scale = std::max(scale, std::fabs(exact));
        }
      EXPECT_LE(err, 1e-8 * scale) << "m=" << m << " component " << a;
    }
  }
}

TEST(NonlinearFlux, ConservesMass) {
  const Domain d{2, 32, 8.0};
  std::mt19937_64 rng(5);
  const auto u = random_bandlimited_field(d, 6, rng);
  const auto div = divergence(nonlinear_flux(u, FracParams{0.5, 0.5, 1.3, 0.0, 0.0}));
  EXPECT_LE(std::fabs(div.sum()), 1e-12 * static_cast<double>(div.size()));
}

TEST(LqNorm, Values) {
  const Domain d{2, 16, 1.0};
  const auto half = GridField::sample(d, [](const auto& x) { return x[0] < 0.5 ? 1.0 : 0.0; });
  EXPECT_LE(rel_err(lq_norm(half, 1.0), 0.5), 1e-14);
  std::mt19937_64 rng(2);
  const auto f = random_bandlimited_field(d, 4, rng, 3.0);
  EXPECT_NEAR(lq_norm(f, std::numeric_limits<double>::infinity()), 3.0, 1e-14);
  EXPECT_THROW(lq_norm(f, 0.5), DomainError);
}

TEST(LqNorm, GaussianClosedForm) {
  const double L = 16.0, w = 1.0;
  const Domain d{2, 64, L};
  const auto g = GridField::sample(d, [&](const auto& x) {
    const double r2 = (x[0] - L / 2) * (x[0] - L / 2) + (x[1] - L / 2) * (x[1] - L / 2);
    return std::exp(-r2 / (2 * w * w));
  });
  // ∫ e^{-q r²/2w²} = 2π w²/q in 2D.
  for (double q : {1.0, 2.0, 4.0})
    EXPECT_LE(rel_err(lq_norm(g, q), std::pow(2 * kPi * w * w / q, 1.0 / q)), 1e-3) << "q=" << q;
}

TEST(LqNorm, Interpolation) {
  const Domain d{2, 32, 3.0};
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_bandlimited_field(d, 8, rng);
    for (auto [p, q] : {std::pair{1.0, 4.0}, std::pair{2.0, 8.0}, std::pair{1.5, 3.0}}) {
      const double theta = 0.4, r = 1.0 / (theta / p + (1 - theta) / q);
      const double lhs = lq_norm(f, r), rhs = std::pow(lq_norm(f, p), theta) * std::pow(lq_norm(f, q), 1 - theta);
      EXPECT_LE(lhs, rhs * (1 + 1e-12));
    }
  }
}

TEST(HsSeminorm, Values) {
  const double L = 3.0;
  const Domain d{2, 32, L};
  EXPECT_LE(hs_seminorm(GridField(d, 4.0), 0.5), 1e-12);
  const auto f = GridField::sample(d, [&](const auto& x) { return std::sin(2 * kPi * x[1] / L); });
  EXPECT_LE(rel_err(hs_seminorm(f, 0.4), std::pow(2 * kPi / L, 0.4) * lq_norm(f, 2.0)), 1e-12);
  std::mt19937_64 rng(4);
  const auto g = random_bandlimited_field(d, 6, rng);
  EXPECT_LE(rel_err(hs_seminorm(g, 1e-6), lq_norm(mean_free(g), 2.0)), 1e-5);
  EXPECT_THROW(hs_seminorm(g, 1.0), DomainError);
}

TEST(StroockVaropoulos, TrivialFields) {
  const Domain d{2, 16, 2 * kPi};
  EXPECT_EQ(stroock_varopoulos_residual(GridField(d, 0.0), 1.0, 2.0, 0.5), 0.0);
  EXPECT_NEAR(stroock_varopoulos_residual(GridField(d, 1.7), 2.0, 1.5, 0.75), 0.0, 1e-12);
  EXPECT_THROW(stroock_varopoulos_residual(GridField(d, 1.0), 1.0, 1.0, 0.5), DomainError);
}

TEST(StroockVaropoulos, RandomFieldsRespectInequality) {
  const Domain d{2, 64, 2 * kPi};
  std::mt19937_64 rng(0);
  std::vector<GridField> fields;
  for (int i = 0; i < 25; ++i) fields.push_back(random_bandlimited_field(d, 6, rng));
  for (double m : {1.0, 2.0})
    for (double q : {1.5, 2.0, 4.0})
      for (double s : {0.5, 0.75})
        for (const auto& u : fields) {
          const auto t = stroock_varopoulos_terms(u, m, q, s);
          ASSERT_GE(t.residual(), -1e-8 * t.scale()) << "m=" << m << " q=" << q << " s=" << s;
        }
}

TEST(SpectralTail, SmoothVersusRough) {
  const Domain d{2, 64, 2 * kPi};
  const auto smooth = GridField::sample(d, [](const auto& x) { return std::cos(x[0]) + std::sin(2 * x[1]); });
  EXPECT_LE(spectral_tail_ratio(to_spectral(smooth)), 1e-12);
  std::mt19937_64 rng(9);
  const auto rough = random_bandlimited_field(d, 21, rng);
  EXPECT_GT(spectral_tail_ratio(to_spectral(rough)), 1e-2);
}

TEST(RandomField, DeterministicForSeed) {
  const Domain d{2, 16, 1.0};
  std::mt19937_64 a(42), b(42);
  EXPECT_EQ(random_bandlimited_field(d, 3, a).values(), random_bandlimited_field(d, 3, b).values());
  EXPECT_THROW(random_bandlimited_field(d, 8, a), DomainError);
}
