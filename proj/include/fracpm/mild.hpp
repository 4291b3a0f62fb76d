#pragma once

// Mild solutions of  ∂_t^a u - eps Δu = div Θ(u):
//   u(t) = Z(t) * u0 + ∫_0^t ∇Y(t - τ) * Θ(u(τ)) dτ,
//   Ẑ(ξ, t) = E_{a,1}(-eps|ξ|² t^a),  Ŷ(ξ, t) = t^{a-1} E_{a,a}(-eps|ξ|² t^a),
// and the decay of the fundamental solutions on the periodic box.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fracpm/errors.hpp"
#include "fracpm/params.hpp"
#include "fracpm/specfun.hpp"
#include "fracpm/spectral.hpp"

namespace fracpm {

inline SpectralField apply_Z(const SpectralField& u0_hat, double t, const FracParams& p) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("apply_Z: t must be >= 0");
  p.validate(true);
  if (t == 0.0 || p.epsilon == 0.0) return u0_hat;
  const auto& k2 = SpectralContext::get(u0_hat.domain())->modes().k2;
  const MittagLeffler e(p.alpha, 1.0);
  const double ta = std::pow(t, p.alpha);
  std::map<double, double> cache;
  return apply_multiplier(u0_hat, [&](std::size_t i) {
    auto [it, fresh] = cache.try_emplace(k2[i], 0.0);
    if (fresh) it->second = e(-p.epsilon * k2[i] * ta);
    return it->second;
  });
}

inline GridField apply_Z(const GridField& u0, double t, const FracParams& p) {
  return to_grid(apply_Z(to_spectral(u0), t, p));
}

// Σ_d iξ_d Ŷ(ξ, τ) f̂_d.
inline SpectralField apply_gradY(const std::vector<SpectralField>& f, double tau, const FracParams& p) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("apply_gradY: t - tau must be > 0");
  p.validate(true);
  const SpectralField div = divergence(f);
  const auto& k2 = SpectralContext::get(div.domain())->modes().k2;
  const MittagLeffler e(p.alpha, p.alpha);
  const double ta = std::pow(tau, p.alpha), pre = std::pow(tau, p.alpha - 1.0);
  std::map<double, double> cache;
  return apply_multiplier(div, [&](std::size_t i) {
    auto [it, fresh] = cache.try_emplace(k2[i], 0.0);
    if (fresh) it->second = pre * e(-p.epsilon * k2[i] * ta);
    return it->second;
  });
}

inline GridField apply_gradY(const std::vector<GridField>& f, double tau, const FracParams& p) {
  std::vector<SpectralField> hat;
  for (const auto& c : f) hat.push_back(to_spectral(c));
  return to_grid(apply_gradY(hat, tau, p));
}

// ‖f‖_X = ‖f‖_{L^1} + ‖f‖_{L^∞}.
inline double x_norm(const GridField& f) {
  return lq_norm(f, 1.0) + lq_norm(f, std::numeric_limits<double>::infinity());
}

// Duhamel quadrature on the uniform nodes t_j = j·dt. With a forcing that is
// constant on each (t_l, t_{l+1}) the time integral is exact per mode:
//   ∫_{t_l}^{t_{l+1}} (t_j-τ)^{a-1} E_{a,a}(-λ(t_j-τ)^a) dτ = F((j-l)dt) - F((j-l-1)dt),
//   F(x) = x^a E_{a,a+1}(-λ x^a),
// which has no 1/λ cancellation for small λ.
class DuhamelOperator {
 public:
  DuhamelOperator(const Domain& d, const FracParams& p, double dt, std::size_t steps)
      : domain_(d), params_(p), dt_(dt), steps_(steps) {
    p.validate(true);
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("DuhamelOperator: dt must be positive");
    if (steps < 1) throw DomainError("DuhamelOperator: at least one step is required");
    const auto& k2 = SpectralContext::get(d)->modes().k2;
    std::map<double, std::size_t> index;
    mode_class_.resize(k2.size());
    for (std::size_t i = 0; i < k2.size(); ++i) {
      auto [it, fresh] = index.try_emplace(k2[i], lambda_.size());
      if (fresh) lambda_.push_back(p.epsilon * k2[i]);
      mode_class_[i] = it->second;
    }
    const double a = p.alpha;
    // relax_[c][k] = E_a(-λ_c (k dt)^a); weight_[c][lag] = F(lag dt) - F((lag-1) dt).
    const MittagLeffler e(a, 1.0), f(a, a + 1.0);
    relax_.assign(lambda_.size(), std::vector<double>(steps + 1));
    weight_.assign(lambda_.size(), std::vector<double>(steps + 1, 0.0));
    for (std::size_t c = 0; c < lambda_.size(); ++c) {
      double f_prev = 0.0;
      for (std::size_t k = 0; k <= steps; ++k) {
        const double xa = std::pow(static_cast<double>(k) * dt, a);
        relax_[c][k] = e(-lambda_[c] * xa);
        const double fk = xa * f(-lambda_[c] * xa);
        if (k > 0) weight_[c][k] = fk - f_prev;
        f_prev = fk;
      }
    }
  }

  const Domain& domain() const { return domain_; }
  const FracParams& params() const { return params_; }
  double dt() const { return dt_; }
  std::size_t steps() const { return steps_; }
  std::size_t distinct_modes() const { return lambda_.size(); }

  // Ẑ(t_j) û0.
  SpectralField free_part(const SpectralField& u0_hat, std::size_t j) const {
    SpectralField out(domain_);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = relax_[mode_class_[i]][j] * u0_hat[i];
    return out;
  }

  // Σ_{l<j} w_{j-l} (div F)^_l, where div_forcing[l] is the spectral
  // divergence of the forcing on (t_l, t_{l+1}).
  SpectralField memory_part(const std::vector<SpectralField>& div_forcing, std::size_t j) const {
    if (j > steps_ || div_forcing.size() < j) throw UsageError("DuhamelOperator: node index out of range");
    SpectralField out(domain_);
    for (std::size_t l = 0; l < j; ++l) {
      const std::size_t lag = j - l;
      const Complex* f = div_forcing[l].coeffs().data();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += weight_[mode_class_[i]][lag] * f[i];
    }
    return out;
  }

  // Same quadrature for a scalar forcing: Σ_{l<j} ∫ Ŷ(t_j-τ) dτ · f̂_l.
  SpectralField forced_part(const std::vector<SpectralField>& forcing, std::size_t j) const {
    return memory_part(forcing, j);
  }

 private:
  Domain domain_;
  FracParams params_;
  double dt_;
  std::size_t steps_;
  std::vector<double> lambda_;
  std::vector<std::size_t> mode_class_;
  std::vector<std::vector<double>> relax_, weight_;
};

struct TrajectoryGrid {
  FracParams params;
  Domain domain;
  std::vector<double> t;
  std::vector<GridField> u;

  void validate() const {
    if (!(params.epsilon > 0.0)) throw DomainError("TrajectoryGrid: mild solutions require epsilon > 0");
    if (t.empty() || t.size() != u.size()) throw UsageError("TrajectoryGrid: nodes and fields must match");
    for (std::size_t j = 1; j < t.size(); ++j)
      if (!(t[j] > t[j - 1])) throw UsageError("TrajectoryGrid: nodes must increase");
  }
};

struct PicardOptions {
  std::size_t steps = 32;  // uniform intervals on [0, T]
  std::size_t max_iter = 60;
  double tol_fix = 1e-12;  // on sup_j ‖δ_j‖_X / sup_j ‖u_j‖_X
  bool flux = true;        // false replaces Θ by 0
};

struct PicardResult {
  TrajectoryGrid trajectory;
  std::size_t iterations = 0;
  double contraction_ratio = 0.0;  // largest successive-difference ratio above round-off
  std::vector<double> differences; // sup_j ‖u^{(i+1)}_j - u^{(i)}_j‖_X per iteration
  double horizon = 0.0;
  std::size_t halvings = 0;
};

namespace detail {

inline std::vector<SpectralField> interval_forcing(const std::vector<SpectralField>& nodes_hat, const FracParams& p) {
  std::vector<SpectralField> div_nodes;
  div_nodes.reserve(nodes_hat.size());
  for (const auto& uh : nodes_hat) div_nodes.push_back(divergence(nonlinear_flux_hat(uh, p)));
  std::vector<SpectralField> out;
  out.reserve(nodes_hat.size() - 1);
  for (std::size_t l = 0; l + 1 < div_nodes.size(); ++l) {
    SpectralField avg(div_nodes[l].domain());
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] = 0.5 * (div_nodes[l][i] + div_nodes[l + 1][i]);
    out.push_back(std::move(avg));
  }
  return out;
}

}  // namespace detail

// Fixed-point iteration of the Duhamel map on [0, T], started from Z(t)*u0.
// Θ on each interval is the mean of its endpoint values.
inline PicardResult picard_solve(const GridField& u0, const FracParams& p, double T, const PicardOptions& o = {}) {
  p.validate(true);
  if (!(p.epsilon > 0.0)) throw DomainError("picard_solve: mild solutions require epsilon > 0");
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("picard_solve: horizon must be positive");
  if (!u0.all_finite()) throw DomainError("picard_solve: initial datum has non-finite values");
  const Domain& d = u0.domain();
  const std::size_t J = o.steps;
  const DuhamelOperator op(d, p, T / static_cast<double>(J), J);
  const SpectralField u0_hat = to_spectral(u0);

  std::vector<SpectralField> free(J + 1), cur(J + 1);
  for (std::size_t j = 0; j <= J; ++j) cur[j] = free[j] = op.free_part(u0_hat, j);

  PicardResult res;
  res.horizon = T;
  std::vector<GridField> grid(J + 1);
  for (std::size_t j = 0; j <= J; ++j) grid[j] = to_grid(cur[j]);
  double scale = 0.0;
  for (const auto& g : grid) scale = std::max(scale, x_norm(g));
  const double floor = 1e3 * std::numeric_limits<double>::epsilon() * std::max(scale, 1e-300);

  bool converged = false;
  for (std::size_t it = 1; it <= o.max_iter; ++it) {
    std::vector<SpectralField> next(J + 1);
    next[0] = free[0];
    if (o.flux) {
      const auto forcing = detail::interval_forcing(cur, p);
      for (std::size_t j = 1; j <= J; ++j) {
        next[j] = free[j];
        const SpectralField m = op.memory_part(forcing, j);
        for (std::size_t i = 0; i < m.size(); ++i) next[j][i] += m[i];
      }
    } else {
      for (std::size_t j = 1; j <= J; ++j) next[j] = free[j];
    }
    double diff = 0.0;
    scale = 0.0;
    for (std::size_t j = 0; j <= J; ++j) {
      GridField g = to_grid(next[j]);
      if (!g.all_finite()) throw BlowupError(it, "picard_solve: non-finite iterate");
      GridField delta = g;
      delta -= grid[j];
      diff = std::max(diff, x_norm(delta));
      scale = std::max(scale, x_norm(g));
      grid[j] = std::move(g);
    }
    cur = std::move(next);
    res.iterations = it;
    if (!res.differences.empty() && res.differences.back() > floor)
      res.contraction_ratio = std::max(res.contraction_ratio, diff / res.differences.back());
    res.differences.push_back(diff);
    if (diff <= o.tol_fix * std::max(scale, 1e-300)) {
      converged = true;
      break;
    }
    if (res.differences.size() >= 3 && diff > res.differences[res.differences.size() - 2] &&
        res.differences[res.differences.size() - 2] > res.differences[res.differences.size() - 3])
      break;  // diverging
  }
  if (!converged) {
    std::ostringstream os;
    if (res.contraction_ratio >= 1.0) {
      os << "picard_solve: no contraction on [0, " << T << "] (observed ratio " << res.contraction_ratio
         << "); halve the horizon";
      throw HorizonError(T, res.contraction_ratio, os.str());
    }
    os << "picard_solve: " << o.max_iter << " iterations did not reach tol_fix (ratio " << res.contraction_ratio << ")";
    throw NumericError(os.str());
  }
  res.trajectory.params = p;
  res.trajectory.domain = d;
  for (std::size_t j = 0; j <= J; ++j) res.trajectory.t.push_back(op.dt() * static_cast<double>(j));
  res.trajectory.u = std::move(grid);
  return res;
}

// Halves T until the iteration converges with contraction ratio below
// `target` (the small-horizon condition of the existence proof).
inline PicardResult picard_certified(const GridField& u0, const FracParams& p, double T, const PicardOptions& o = {},
                                     double target = 0.5, std::size_t max_halvings = 30) {
  double horizon = T;
  for (std::size_t h = 0; h <= max_halvings; ++h, horizon *= 0.5) {
    try {
      PicardResult r = picard_solve(u0, p, horizon, o);
      if (r.contraction_ratio < target) {
        r.halvings = h;
        return r;
      }
    } catch (const HorizonError&) {
    }
  }
  std::ostringstream os;
  os << "picard_certified: no horizon down to " << horizon << " gives contraction ratio < " << target;
  throw HorizonError(horizon, 1.0, os.str());
}

// ---------------------------------------------------------------------------
// Fundamental solutions on the periodic grid.

struct CriticalExponents {
  double kappa1, kappa3;  // Z and ∇Y
};

inline CriticalExponents critical_exponents(int dim) {
  const double inf = std::numeric_limits<double>::infinity();
  const double N = dim;
  return {dim >= 3 ? N / (N - 2.0) : inf, dim > 3 ? N / (N - 3.0) : inf};
}

struct DecayRow {
  double t, z_norm, grad_y_norm;
};

struct DecayTable {
  double alpha = 0.5, r = 2.0;
  int dim = 2;
  std::vector<DecayRow> rows;
  double z_slope = 0.0, grad_y_slope = 0.0;           // least-squares log-log fits
  double z_exponent = 0.0, grad_y_exponent = 0.0;     // predicted slopes
  double z_l1_defect = 0.0;                           // max_t |‖Z(t)‖_{L^1} - 1|
  bool z_warning = false, grad_y_warning = false;     // r at or above the critical exponent
  std::vector<std::string> notes;
};

namespace detail {

inline double loglog_slope(const std::vector<double>& t, const std::vector<double>& v) {
  const std::size_t n = t.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(t[i]), y = std::log(v[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

inline double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

inline double field_lr(const std::vector<double>& mag, double cell, double r) {
  if (std::isinf(r)) return *std::max_element(mag.begin(), mag.end());
  long double s = 0.0L;
  for (double v : mag) s += std::pow(v, r);
  return std::pow(static_cast<double>(s) * cell, 1.0 / r);
}

}  // namespace detail

// Cell averages of Z(t) and ∇Y(t) (unit diffusivity) on the periodic grid:
// the symbols are folded over the aliases k + mK, |m_d| <= fold, and weighted
// by the cell-average factor Π sinc(k_d Δx/2). The zero mode of Z is exactly 1,
// so nonnegative averages give ‖Z‖_{L^1} = 1 without truncation error.
inline DecayTable fundamental_decay_table(const FracParams& p, double r, const std::vector<double>& times,
                                          const Domain& d, int fold = 24) {
  p.validate(true);
  d.validate();
  if (!(r >= 1.0)) throw DomainError("fundamental_decay_table: r must be >= 1");
  if (times.size() < 2) throw DomainError("fundamental_decay_table: at least two times are required");
  for (double t : times)
    if (!(t > 0.0)) throw DomainError("fundamental_decay_table: times must be positive");
  if (d.dim != 2 && d.dim != 3) throw DomainError("fundamental_decay_table: dimension must be 2 or 3");

  DecayTable out;
  out.alpha = p.alpha;
  out.r = r;
  out.dim = d.dim;
  const double N = d.dim, a = p.alpha;
  out.z_exponent = -a * N / 2.0 * (1.0 - 1.0 / r);
  out.grad_y_exponent = a / 2.0 - 1.0 - a * N / 2.0 * (1.0 - 1.0 / r);
  const auto crit = critical_exponents(d.dim);
  out.z_warning = r >= crit.kappa1 || (std::isinf(r) && d.dim >= 2);
  out.grad_y_warning = r >= crit.kappa3;
  if (std::isinf(r) && d.dim >= 2)
    out.notes.push_back("Z(t) is unbounded near the origin for N >= 2 (symbol ~ |xi|^-2); L^inf values are grid-dependent");
  if (out.z_warning) out.notes.push_back("Z: r at or above kappa_1(N); only a weak-L^r bound applies");
  if (out.grad_y_warning) out.notes.push_back("grad Y: r at or above kappa_3(N); only a weak-L^r bound applies");

  const auto ctx = SpectralContext::get(d);
  const auto& md = ctx->modes();
  const double K = static_cast<double>(d.n) * d.wavenumber_unit(), h = d.dx();
  const MittagLeffler ez(a, 1.0), ey(a, a);
  const std::size_t ns = d.spectral_size();

  for (double t : times) {
    const double ta = std::pow(t, a), pre = std::pow(t, a - 1.0);
    SpectralField zh(d);
    std::vector<SpectralField> yh(d.dim, SpectralField(d));
    for (std::size_t i = 0; i < ns; ++i) {
      double zsum = 0.0;
      std::array<double, 3> ysum{0.0, 0.0, 0.0};
      const auto add = [&](const std::array<double, 3>& xi) {
        double k2 = 0.0, w = 1.0;
        for (int c = 0; c < d.dim; ++c) {
          k2 += xi[c] * xi[c];
          w *= detail::sinc(0.5 * xi[c] * h);
        }
        if (w == 0.0) return;
        zsum += w * ez(-ta * k2);
        const double y = w * pre * ey(-ta * k2);
        for (int c = 0; c < d.dim; ++c) ysum[c] += xi[c] * y;
      };
      const std::array<double, 3> base{md.xi[0][i], md.xi[1][i], d.dim == 3 ? md.xi[2][i] : 0.0};
      const int f2 = d.dim == 3 ? fold : 0;
      for (int m0 = -fold; m0 <= fold; ++m0)
        for (int m1 = -fold; m1 <= fold; ++m1)
          for (int m2 = -f2; m2 <= f2; ++m2)
            add({base[0] + m0 * K, base[1] + m1 * K, base[2] + m2 * K});
      // Coefficients of the unnormalised transform: cell average × n^N / |box|.
      const double scale = static_cast<double>(d.size()) / d.volume();
      zh[i] = zsum * scale;
      for (int c = 0; c < d.dim; ++c) yh[c][i] = Complex(0.0, ysum[c] * scale);
    }
    const GridField z = to_grid(zh);
    std::vector<double> zmag(z.size()), ymag(z.size(), 0.0);
    double l1 = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      zmag[j] = std::fabs(z[j]);
      l1 += zmag[j];
    }
    out.z_l1_defect = std::max(out.z_l1_defect, std::fabs(l1 * d.cell_volume() - 1.0));
    for (int c = 0; c < d.dim; ++c) {
      const GridField g = to_grid(yh[c]);
      for (std::size_t j = 0; j < g.size(); ++j) ymag[j] += g[j] * g[j];
    }
    for (double& v : ymag) v = std::sqrt(v);
    out.rows.push_back({t, detail::field_lr(zmag, d.cell_volume(), r), detail::field_lr(ymag, d.cell_volume(), r)});
  }
  std::vector<double> ts, zs, ys;
  for (const auto& row : out.rows) {
    ts.push_back(row.t);
    zs.push_back(row.z_norm);
    ys.push_back(row.grad_y_norm);
  }
  out.z_slope = detail::loglog_slope(ts, zs);
  out.grad_y_slope = detail::loglog_slope(ts, ys);
  return out;
}

}  // namespace fracpm
