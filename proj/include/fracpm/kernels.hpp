#pragma once

// Time kernels on uniform grids: Riemann-Liouville kernels, tempered PC
// pairs, the Yosida resolvent family (s, h, g_{1-a,n}) and discrete
// convolution.
//
// Every kernel is stored as value(t) = t^{-sigma} * phi(t) with phi regular
// at 0, so t = 0 is never sampled. Convolutions and Volterra equations use
// product integration: phi is interpolated linearly, the power weights
// tau^{-sigma_l} (t - tau)^{-sigma_r} are integrated exactly per cell, and
// starting weights on the first few nodes restore exactness for the
// non-smooth powers tau^{k a} that the resolvent kernels carry at 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "fracpm/errors.hpp"
#include "fracpm/specfun.hpp"

namespace fracpm {

struct UniformGrid {
  double dt = 0.0;
  std::size_t steps = 0;  // nodes t_0 = 0, ..., t_M = M dt

  static UniformGrid over(double horizon, std::size_t steps) {
    if (!(horizon > 0.0) || steps == 0) throw UsageError("UniformGrid: need horizon > 0 and at least one step");
    return {horizon / static_cast<double>(steps), steps};
  }
  double t(std::size_t j) const { return static_cast<double>(j) * dt; }
  double horizon() const { return t(steps); }
  bool same_as(const UniformGrid& o) const {
    return steps == o.steps && std::fabs(dt - o.dt) <= 1e-14 * std::max(dt, o.dt);
  }
  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt) || steps == 0) throw UsageError("UniformGrid: need dt > 0 and steps >= 1");
  }
};

// Samples f(t_j), j = 0..M.
struct TimeSeries {
  UniformGrid grid;
  std::vector<double> values;

  static TimeSeries sample(const UniformGrid& g, const std::function<double(double)>& f) {
    TimeSeries ts{g, std::vector<double>(g.steps + 1)};
    for (std::size_t j = 0; j <= g.steps; ++j) ts.values[j] = f(g.t(j));
    return ts;
  }
  void validate() const {
    grid.validate();
    if (values.size() != grid.steps + 1) throw UsageError("TimeSeries: expected one value per grid node");
  }
};

class KernelTable {
 public:
  KernelTable() = default;

  // regular[j] = t_j^sigma * k(t_j) for j >= 1; regular[0] is its limit at 0.
  KernelTable(std::string name, UniformGrid grid, double singular_exponent, std::vector<double> regular,
              std::vector<double> expansion_exponents = {}, bool nonincreasing = false)
      : name_(std::move(name)),
        grid_(grid),
        sigma_(singular_exponent),
        regular_(std::move(regular)),
        expansion_(std::move(expansion_exponents)),
        nonincreasing_(nonincreasing) {
    grid_.validate();
    if (!(sigma_ >= 0.0 && sigma_ < 1.0)) throw DomainError("KernelTable: singular exponent must lie in [0, 1)");
    if (regular_.size() != grid_.steps + 1) throw UsageError("KernelTable: expected M+1 regular samples");
    for (double v : regular_)
      if (!std::isfinite(v)) throw NumericError("KernelTable '" + name_ + "': non-finite sample");
  }

  const std::string& name() const { return name_; }
  const UniformGrid& grid() const { return grid_; }
  std::size_t size() const { return grid_.steps; }
  double singular_exponent() const { return sigma_; }
  const std::vector<double>& expansion_exponents() const { return expansion_; }
  bool declared_nonincreasing() const { return nonincreasing_; }

  double regular(std::size_t j) const { return regular_[j]; }
  const std::vector<double>& regular_samples() const { return regular_; }

  // Sampled node times t_1..t_M and values.
  double time(std::size_t i) const { return grid_.t(i); }
  double value(std::size_t i) const {
    if (i == 0) throw DomainError("KernelTable: t = 0 is not sampled");
    return sigma_ == 0.0 ? regular_[i] : std::pow(grid_.t(i), -sigma_) * regular_[i];
  }
  std::vector<double> times() const {
    std::vector<double> t(size());
    for (std::size_t i = 1; i <= size(); ++i) t[i - 1] = time(i);
    return t;
  }
  std::vector<double> values() const {
    std::vector<double> v(size());
    for (std::size_t i = 1; i <= size(); ++i) v[i - 1] = value(i);
    return v;
  }

  // First index i at which the nonincreasing invariant fails, or 0.
  std::size_t first_increase(double rel_tol = 1e-12) const {
    double prev = value(1);
    for (std::size_t i = 2; i <= size(); ++i) {
      const double v = value(i);
      if (v > prev + rel_tol * std::fabs(prev)) return i;
      prev = v;
    }
    return 0;
  }

  void write_csv(std::ostream& os) const {
    os << "t,value\n" << std::setprecision(17);
    for (std::size_t i = 1; i <= size(); ++i) os << time(i) << ',' << value(i) << '\n';
  }

 private:
  std::string name_;
  UniformGrid grid_;
  double sigma_ = 0.0;
  std::vector<double> regular_;
  std::vector<double> expansion_;
  bool nonincreasing_ = false;
};

inline double default_tol_conv(double horizon) { return 1e-6 * horizon; }

inline double g_kernel(double alpha, double t) {
  if (!(t > 0.0)) throw DomainError("g_kernel: t must be positive");
  if (!(alpha > 0.0)) throw DomainError("g_kernel: alpha must be positive");
  return std::pow(t, alpha - 1.0) / gamma(alpha);
}

// Non-integer powers k*alpha below 2: the non-smooth part of the resolvent
// kernels near t = 0.
inline std::vector<double> fractional_powers(double alpha, std::size_t max_count = 6) {
  std::vector<double> out;
  for (int k = 1; k * alpha < 2.0 && out.size() < max_count; ++k) {
    const double g = k * alpha;
    if (std::fabs(g - std::round(g)) > 1e-9) out.push_back(g);
  }
  return out;
}

inline KernelTable sample_g_kernel(double alpha, const UniformGrid& grid) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("sample_g_kernel: alpha must lie in (0, 1]");
  std::vector<double> phi(grid.steps + 1, 1.0 / gamma(alpha));
  std::ostringstream name;
  name << "g_" << alpha;
  return KernelTable(name.str(), grid, 1.0 - alpha, std::move(phi), {}, true);
}

// Weights for I_j[P] = ∫_0^j τ^{-σl} (j-τ)^{-σr} P(τ) dτ in unit steps.
class ProductRule {
 public:
  using Real = long double;

  ProductRule(double sigma_left, double sigma_right, std::vector<double> start_exponents, std::size_t max_row)
      : sl_(sigma_left), sr_(sigma_right), a_(1.0L - sigma_left), b_(1.0L - sigma_right), max_row_(max_row) {
    if (!(sl_ >= 0.0 && sl_ < 1.0 && sr_ >= 0.0 && sr_ < 1.0))
      throw DomainError("ProductRule: exponents must lie in [0, 1)");
    if (!start_exponents.empty()) {
      exps_ = {0.0, 1.0};
      exps_.insert(exps_.end(), start_exponents.begin(), start_exponents.end());
      const std::size_t s = exps_.size();
      Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> v(s, s);
      for (std::size_t r = 0; r < s; ++r)
        for (std::size_t l = 0; l < s; ++l) v(r, l) = power(static_cast<Real>(l), exps_[r]);
      lu_ = v.partialPivLu();
      pow_table_.assign(s, std::vector<Real>(max_row_ + s + 1));
      for (std::size_t r = 0; r < s; ++r)
        for (std::size_t k = 0; k < pow_table_[r].size(); ++k) pow_table_[r][k] = power(static_cast<Real>(k), exps_[r]);
    }
    if (sl_ != 0.0 || sr_ != 0.0) {
      // Gauss-Legendre rule mapped to [0, 1], ascending (symmetric about 1/2).
      const auto& x = boost::math::quadrature::gauss<double, kGauss>::abscissa();
      const auto& w = boost::math::quadrature::gauss<double, kGauss>::weights();
      std::vector<std::pair<double, double>> nw;
      for (std::size_t i = 0; i < x.size(); ++i) {
        nw.emplace_back(0.5 + 0.5 * x[i], 0.5 * w[i]);
        if (x[i] != 0.0) nw.emplace_back(0.5 - 0.5 * x[i], 0.5 * w[i]);
      }
      std::sort(nw.begin(), nw.end());
      for (const auto& [u, wt] : nw) {
        nodes_.push_back(u);
        weights_.push_back(wt);
      }
      log_table_.resize((max_row_ + 1) * nodes_.size());
      for (std::size_t k = 0; k <= max_row_; ++k)
        for (std::size_t i = 0; i < nodes_.size(); ++i)
          log_table_[k * nodes_.size() + i] = std::log(static_cast<double>(k) + nodes_[i]);
    }
  }

  std::size_t start_size() const { return exps_.size(); }
  double scale(double dt) const { return std::pow(dt, 1.0 - sl_ - sr_); }

  struct Row {
    std::vector<Real> base;   // nodes 0..j
    std::vector<Real> start;  // nodes 0..start_size()-1
  };

  Row row(std::size_t j) const {
    if (j == 0 || j > max_row_) throw UsageError("ProductRule: row index out of range");
    Row r;
    r.base.assign(j + 1, 0.0L);
    for (std::size_t k = 1; k <= j; ++k) {
      Real m0, m1;
      cell_moments(j, k, m0, m1);
      r.base[k - 1] += m0 - m1;
      r.base[k] += m1;
    }
    const std::size_t s = exps_.size();
    if (s == 0) return r;
    Eigen::Matrix<Real, Eigen::Dynamic, 1> rhs(s);
    const Real jj = static_cast<Real>(j);
    for (std::size_t q = 0; q < s; ++q) {
      const Real g = exps_[q];
      Real approx = 0.0L;
      for (std::size_t k = 0; k <= j; ++k) approx += r.base[k] * pow_table_[q][k];
      const Real exact = std::pow(jj, g + a_ + b_ - 1.0L) * boost::math::beta(g + a_, b_);
      rhs(q) = exact - approx;
    }
    const Eigen::Matrix<Real, Eigen::Dynamic, 1> c = lu_.solve(rhs);
    r.start.assign(c.data(), c.data() + s);
    return r;
  }

 private:
  static constexpr unsigned kGauss = 8;
  static constexpr std::size_t kNear = 6;

  static Real power(Real x, Real g) {
    if (x == 0.0L) return g == 0.0L ? 1.0L : 0.0L;
    return std::pow(x, g);
  }

  // m0 = ∫_{k-1}^{k} w, m1 = ∫_{k-1}^{k} w (τ-(k-1)) for the row-j weight w.
  void cell_moments(std::size_t j, std::size_t k, Real& m0, Real& m1) const {
    if (sl_ == 0.0 && sr_ == 0.0) {
      m0 = 1.0L;
      m1 = 0.5L;
      return;
    }
    const Real jj = static_cast<Real>(j);
    const std::size_t from_right = j - k;  // cells between this one and τ = j
    if (k <= kNear && k <= from_right + 1) {
      const Real c0 = std::pow(jj, a_ + b_ - 1.0L), c1 = c0 * jj;
      const Real x0 = static_cast<Real>(k - 1) / jj, x1 = static_cast<Real>(k) / jj;
      m0 = c0 * (ibeta(a_, b_, x1) - ibeta(a_, b_, x0));
      m1 = c1 * (ibeta(a_ + 1.0L, b_, x1) - ibeta(a_ + 1.0L, b_, x0)) - static_cast<Real>(k - 1) * m0;
      return;
    }
    if (from_right < kNear) {
      const Real c0 = std::pow(jj, a_ + b_ - 1.0L), c1 = c0 * jj;
      const Real y0 = static_cast<Real>(from_right) / jj, y1 = static_cast<Real>(from_right + 1) / jj;
      m0 = c0 * (ibeta(b_, a_, y1) - ibeta(b_, a_, y0));
      m1 = static_cast<Real>(from_right + 1) * m0 - c1 * (ibeta(b_ + 1.0L, a_, y1) - ibeta(b_ + 1.0L, a_, y0));
      return;
    }
    const std::size_t nq = nodes_.size();
    const double* lk = &log_table_[(k - 1) * nq];
    const double* lr = &log_table_[from_right * nq];
    Real s0 = 0.0L, s1 = 0.0L;
    for (std::size_t i = 0; i < nq; ++i) {
      const double w = std::exp(-sl_ * lk[i] - sr_ * lr[nq - 1 - i]) * weights_[i];
      s0 += w;
      s1 += w * nodes_[i];
    }
    m0 = s0;
    m1 = s1;
  }

  // Non-normalised lower incomplete beta ∫_0^x t^{a-1}(1-t)^{b-1} dt.
  static Real ibeta(Real a, Real b, Real x) {
    if (x <= 0.0L) return 0.0L;
    if (x >= 1.0L) return boost::math::beta(a, b);
    return boost::math::beta(a, b, x);
  }

  double sl_, sr_;
  Real a_, b_;
  std::size_t max_row_;
  std::vector<double> exps_;
  Eigen::PartialPivLU<Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>> lu_;
  std::vector<std::vector<Real>> pow_table_;
  std::vector<double> nodes_, weights_, log_table_;
};

// Solves diag(j) P_j + kappa I_j[P] = rhs(j) for j = 1..M with P_0 given.
// The first start_size()-1 unknowns are coupled through the starting
// weights and solved together; the remainder is a forward march.
inline std::vector<double> solve_product_volterra(const ProductRule& rule, std::size_t steps, double p0,
                                                  const std::function<double(std::size_t)>& diag, double kappa,
                                                  const std::function<double(std::size_t)>& rhs) {
  using Real = ProductRule::Real;
  const std::size_t s = rule.start_size();
  const std::size_t lb = s == 0 ? 0 : s - 1;
  if (steps <= lb) throw UsageError("Volterra solve: grid too coarse for the starting weights");
  std::vector<Real> p(steps + 1, 0.0L);
  p[0] = p0;
  std::vector<ProductRule::Row> rows(steps + 1);
  for (std::size_t j = 1; j <= steps; ++j) rows[j] = rule.row(j);

  if (lb > 0) {
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> a = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>::Zero(lb, lb);
    Eigen::Matrix<Real, Eigen::Dynamic, 1> r(lb);
    for (std::size_t j = 1; j <= lb; ++j) {
      const auto& w = rows[j];
      a(j - 1, j - 1) += diag(j);
      r(j - 1) = rhs(j) - kappa * (w.base[0] + w.start[0]) * p[0];
      for (std::size_t k = 1; k <= j; ++k) a(j - 1, k - 1) += kappa * w.base[k];
      for (std::size_t l = 1; l < s; ++l) a(j - 1, l - 1) += kappa * w.start[l];
    }
    Eigen::PartialPivLU<decltype(a)> lu(a);
    const auto cond_probe = lu.rcond();
    if (!(cond_probe > 1e-30L)) throw NumericError("Volterra solve: starting block is singular");
    const Eigen::Matrix<Real, Eigen::Dynamic, 1> x = lu.solve(r);
    for (std::size_t j = 1; j <= lb; ++j) p[j] = x(j - 1);
  }
  for (std::size_t j = lb + 1; j <= steps; ++j) {
    const auto& w = rows[j];
    Real acc = 0.0L;
    for (std::size_t k = 0; k < j; ++k) acc += w.base[k] * p[k];
    for (std::size_t l = 0; l < s; ++l) acc += w.start[l] * p[l];
    const Real d = diag(j) + kappa * w.base[j];
    if (d == 0.0L) throw NumericError("Volterra solve: vanishing diagonal");
    p[j] = (rhs(j) - kappa * acc) / d;
    if (!std::isfinite(static_cast<double>(p[j]))) throw NumericError("Volterra solve: non-finite value");
  }
  return {p.begin(), p.end()};
}

namespace detail {

// (left * right)(t_j) for j = 1..M where right's regular part is evaluated
// at t_j - τ; indices below zero (needed only by starting weights on the
// first rows) are extrapolated linearly.
inline std::vector<double> convolve_regular(const UniformGrid& grid, double sigma_left, const std::vector<double>& left,
                                            const std::vector<double>& left_exponents, double sigma_right,
                                            const std::vector<double>& right) {
  const std::size_t m = grid.steps;
  ProductRule rule(sigma_left, sigma_right, left_exponents, m);
  auto right_at = [&](long long idx) -> long double {
    if (idx >= 0) return right[static_cast<std::size_t>(idx)];
    const long double slope = right.size() > 1 ? right[1] - right[0] : 0.0;
    return right[0] + static_cast<long double>(idx) * slope;
  };
  auto left_at = [&](std::size_t idx) -> long double {
    if (idx < left.size()) return left[idx];
    throw UsageError("convolve: grid too coarse for the starting weights");
  };
  const double sc = rule.scale(grid.dt);
  std::vector<double> out(m);
  for (std::size_t j = 1; j <= m; ++j) {
    const auto w = rule.row(j);
    long double acc = 0.0L;
    for (std::size_t k = 0; k <= j; ++k) acc += w.base[k] * left[k] * right[j - k];
    for (std::size_t l = 0; l < w.start.size(); ++l)
      acc += w.start[l] * left_at(l) * right_at(static_cast<long long>(j) - static_cast<long long>(l));
    out[j - 1] = static_cast<double>(acc * sc);
  }
  return out;
}

}  // namespace detail

// (left * right)(t_j), j = 1..M. The right factor's regular part must be
// smooth; non-smooth behaviour at 0 belongs in the left factor.
inline std::vector<double> convolve(const KernelTable& left, const KernelTable& right) {
  if (!left.grid().same_as(right.grid())) throw UsageError("convolve: kernels live on different grids");
  return detail::convolve_regular(left.grid(), left.singular_exponent(), left.regular_samples(),
                                  left.expansion_exponents(), right.singular_exponent(), right.regular_samples());
}

inline std::vector<double> convolve(const KernelTable& left, const TimeSeries& f) {
  f.validate();
  if (!left.grid().same_as(f.grid)) throw UsageError("convolve: series sampled on a different grid");
  return detail::convolve_regular(left.grid(), left.singular_exponent(), left.regular_samples(),
                                  left.expansion_exponents(), 0.0, f.values);
}

struct PCPair {
  KernelTable k;
  KernelTable l;
  double alpha = 0.0;
  double nu = 0.0;

  // (k*l)(t_j) - 1 at every node.
  std::vector<double> identity_defect() const {
    auto v = convolve(k, l);
    for (double& x : v) x -= 1.0;
    return v;
  }
};

// k = g_{1-a} e^{-nu t}, l = g_a e^{-nu t} + nu (1 * [g_a e^{-nu .}]).
inline PCPair pc_pair_tempered(double alpha, double nu, const UniformGrid& grid) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("pc_pair_tempered: alpha must lie in (0, 1)");
  if (!(nu >= 0.0)) throw DomainError("pc_pair_tempered: nu must be non-negative");
  grid.validate();
  const std::size_t m = grid.steps;
  std::vector<double> pk(m + 1), pl(m + 1);
  const double gk = gamma(1.0 - alpha), gl = gamma(alpha);
  for (std::size_t j = 0; j <= m; ++j) {
    const double t = grid.t(j);
    const double e = std::exp(-nu * t);
    pk[j] = e / gk;
    pl[j] = e / gl;
    // ν(1*g_a e^{-ν·})(t) = ν^{1-a} P(a, νt), times t^{1-a} to strip the l-singularity.
    if (nu > 0.0 && j > 0) pl[j] += std::pow(t, 1.0 - alpha) * std::pow(nu, 1.0 - alpha) * boost::math::gamma_p(alpha, nu * t);
  }
  std::ostringstream kn, ln;
  kn << "k_tempered(a=" << alpha << ",nu=" << nu << ")";
  ln << "l_tempered(a=" << alpha << ",nu=" << nu << ")";
  return {KernelTable(kn.str(), grid, alpha, std::move(pk), {}, true),
          KernelTable(ln.str(), grid, 1.0 - alpha, std::move(pl)), alpha, nu};
}

struct Resolvent {
  KernelTable s;    // s + n (g_a * s) = 1
  KernelTable h;    // h + n (h * g_a) = n g_a
  KernelTable g_n;  // g_{1-a,n} = n s
};

inline Resolvent volterra_resolvent(double alpha, int n, const UniformGrid& grid) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("volterra_resolvent: alpha must lie in (0, 1)");
  if (n < 1) throw DomainError("volterra_resolvent: n must be >= 1");
  grid.validate();
  const std::size_t m = grid.steps;
  const double dt = grid.dt, ga = gamma(alpha), nn = n;
  const auto exps = fractional_powers(alpha);

  ProductRule rs(0.0, 1.0 - alpha, exps, m);
  const double ks = nn / ga * rs.scale(dt);
  auto s = solve_product_volterra(
      rs, m, 1.0, [](std::size_t) { return 1.0; }, ks, [](std::size_t) { return 1.0; });

  // h = t^{a-1} psi:  t^{a-1} psi + (n/Γ(a)) ∫ τ^{a-1} psi(τ) (t-τ)^{a-1} dτ = n t^{a-1}/Γ(a).
  ProductRule rh(1.0 - alpha, 1.0 - alpha, exps, m);
  const double kh = nn / ga * rh.scale(dt);
  auto psi = solve_product_volterra(
      rh, m, nn / ga, [&](std::size_t j) { return std::pow(grid.t(j), alpha - 1.0); }, kh,
      [&](std::size_t j) { return nn * std::pow(grid.t(j), alpha - 1.0) / ga; });

  std::vector<double> gn(s);
  for (double& v : gn) v *= nn;
  std::ostringstream sn, hn, gname;
  sn << "s(a=" << alpha << ",n=" << n << ")";
  hn << "h(a=" << alpha << ",n=" << n << ")";
  gname << "g_{1-a,n}(a=" << alpha << ",n=" << n << ")";
  return {KernelTable(sn.str(), grid, 0.0, std::move(s), exps, true),
          KernelTable(hn.str(), grid, 1.0 - alpha, std::move(psi), exps),
          KernelTable(gname.str(), grid, 0.0, std::move(gn), exps, true)};
}

// h_{a,n} * f sampled at t_0..t_M ((h*f)(0) = 0).
inline TimeSeries yosida_mollify(const KernelTable& h, const TimeSeries& f) {
  const auto v = convolve(h, f);
  TimeSeries out{f.grid, std::vector<double>(f.values.size(), 0.0)};
  for (std::size_t j = 1; j < out.values.size(); ++j) out.values[j] = v[j - 1];
  return out;
}

// Remainder term ∫_0^t {G(u(t-s)) - G(u(t)) - G'(u(t))[u(t-s)-u(t)]}(-k'(s)) ds
// as a Stieltjes sum against the increments of k; k must be bounded at 0.
template <class G, class DG>
double convexity_identity_residual(G&& g, DG&& dg, const KernelTable& k, const TimeSeries& u, std::size_t t_index) {
  u.validate();
  if (!k.grid().same_as(u.grid)) throw UsageError("convexity_identity_residual: u and k must share one uniform grid");
  if (k.singular_exponent() != 0.0) throw UsageError("convexity_identity_residual: k must be bounded at 0");
  if (t_index > k.size()) throw UsageError("convexity_identity_residual: time index out of range");
  const double ut = u.values[t_index];
  const double gt = g(ut), dgt = dg(ut);
  auto bracket = [&](std::size_t i) {
    const double v = u.values[t_index - i];
    return g(v) - gt - dgt * (v - ut);
  };
  long double acc = 0.0L;
  double b_prev = bracket(0);
  for (std::size_t i = 1; i <= t_index; ++i) {
    const double b = bracket(i);
    acc += 0.5L * (b_prev + b) * (k.regular(i - 1) - k.regular(i));
    b_prev = b;
  }
  return static_cast<double>(acc);
}

}  // namespace fracpm
