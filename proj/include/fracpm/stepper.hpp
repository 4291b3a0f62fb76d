#pragma once

// L1 time stepping for  ∂_t^a u - eps Δu = div Θ(u)  on the periodic box.
//
// On nodes t_0 < t_1 < ... the Caputo derivative at t_{k+1} is
//   Σ_j a_{k+1,j} (u^{j+1} - u^j),
//   a_{k+1,j} = [(t_{k+1}-t_j)^{1-a} - (t_{k+1}-t_{j+1})^{1-a}] / (Γ(2-a) Δt_j),
// which reduces to the classical weights b_j Δt^{-a}/Γ(2-a) on uniform steps.
// Diffusion is implicit (diagonal in Fourier space), the flux explicit.
// The full history is kept as spectral increments.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "fracpm/errors.hpp"
#include "fracpm/norms.hpp"
#include "fracpm/params.hpp"
#include "fracpm/specfun.hpp"
#include "fracpm/spectral.hpp"

namespace fracpm {

// b_j = (j+1)^{1-a} - j^{1-a}, j = 0..k-1.
inline std::vector<double> l1_weights(double alpha, std::size_t k) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("l1_weights: alpha must lie in (0, 1]");
  if (k < 1) throw DomainError("l1_weights: k must be >= 1");
  std::vector<double> b(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double jj = static_cast<double>(j);
    b[j] = std::pow(jj + 1.0, 1.0 - alpha) - (j == 0 ? 0.0 : std::pow(jj, 1.0 - alpha));
  }
  return b;
}

// Fast L^q norm for the exponents tracked at every step.
inline double tracked_norm(const GridField& f, double q) {
  if (std::isinf(q)) return lq_norm(f, q);
  if (q == 1.0 || q == 2.0 || q == 4.0) {
    long double s = 0.0L;
    for (double v : f.values()) {
      const double a = std::fabs(v);
      s += q == 1.0 ? a : (q == 2.0 ? a * a : (a * a) * (a * a));
    }
    return std::pow(static_cast<double>(s) * f.domain().cell_volume(), 1.0 / q);
  }
  return lq_norm(f, q);
}

// Fraction of Σ|u| carried by cells within `width` of the box faces.
inline double boundary_mass_fraction(const GridField& u, double width) {
  const Domain& d = u.domain();
  const double h = d.dx(), L = d.length;
  const auto near = [&](std::size_t i) {
    const double x = static_cast<double>(i) * h;
    return x < width || x > L - width;
  };
  long double edge = 0.0L, total = 0.0L;
  std::size_t idx = 0;
  const std::size_t nz = d.dim == 3 ? d.n : 1;
  for (std::size_t i = 0; i < d.n; ++i)
    for (std::size_t j = 0; j < d.n; ++j)
      for (std::size_t k = 0; k < nz; ++k, ++idx) {
        const double a = std::fabs(u[idx]);
        total += a;
        if (near(i) || near(j) || (d.dim == 3 && near(k))) edge += a;
      }
  return total > 0.0L ? static_cast<double>(edge / total) : 0.0;
}

struct StepperOptions {
  double dt = 0.0;  // initial step; 0 selects the heuristic default
  double t_end = 1.0;
  double dt_min = 1e-10;
  double dt_max = std::numeric_limits<double>::infinity();
  double growth = 1.0;           // step multiplier after each accepted step
  double stability = 0.5;        // cap on dt^a Γ(2-a) ‖u‖∞^m kmax^{2-2s} when growing
  std::size_t graded_steps = 0;  // >0: nodes t_j = t_end (j/M)^grading
  double grading = 1.0;
  bool flux = true;              // false drops div Θ (linear problem)
  bool enforce_monotone = true;
  double tol_mono = 1e-6;
  std::vector<double> monotone_q{1.0, 2.0, 4.0, std::numeric_limits<double>::infinity()};
  double norm_q = 4.0;            // exponent of the Lq column and energy integrand
  bool record_energy = true;
  double boundary_layer = 0.1;    // as a fraction of L
  double boundary_threshold = 1e-6;
  double resolution_threshold = 1e-5;  // on spectral_tail_ratio
  bool stop_when_unresolved = false;   // end the run at the first unresolved step
  std::size_t max_steps = 200000;
};

inline double default_initial_dt(const GridField& u0, const FracParams& p) {
  const double h = u0.domain().dx();
  const double umax = lq_norm(u0, std::numeric_limits<double>::infinity());
  const double denom = p.epsilon + std::pow(umax, p.m) * std::pow(h, 2.0 * p.s - 1.0);
  return denom > 0.0 ? 0.25 * h * h / denom : 0.25 * h * h;
}

class StepperState {
 public:
  StepperState(const GridField& u0, const FracParams& p, bool flux = true)
      : params_(p), domain_(u0.domain()), ctx_(SpectralContext::get(u0.domain())), flux_(flux) {
    p.validate(true);
    if (!u0.all_finite()) throw DomainError("stepper: initial datum has non-finite values");
    times_.push_back(0.0);
    u_ = u0;
    u_hat_ = to_spectral(u0);
  }

  const FracParams& params() const { return params_; }
  const Domain& domain() const { return domain_; }
  std::size_t steps() const { return times_.size() - 1; }
  double t_now() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }
  const GridField& current() const { return u_; }
  const SpectralField& current_hat() const { return u_hat_; }

  // Field at node k rebuilt from the stored increments.
  GridField history(std::size_t k) const {
    if (k > steps()) throw UsageError("stepper: history index out of range");
    SpectralField acc = u_hat_;
    for (std::size_t j = steps(); j-- > k;)
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] -= increments_[j][i];
    return to_grid(acc);
  }

  // Proposed next state; the state itself is untouched.
  struct Proposal {
    double dt = 0.0;
    SpectralField u_hat;
    GridField u;
  };

  Proposal propose(double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("stepper: dt must be positive");
    const double a = params_.alpha;
    const std::size_t k = steps();
    const double t_new = times_.back() + dt;
    const double g2 = gamma(2.0 - a);
    const auto& md = ctx_->modes();

    // a_{k+1,j}; the j = k entry is dt^{-a}/Γ(2-a).
    coef_.resize(k + 1);
    for (std::size_t j = 0; j < k; ++j) {
      const double h = times_[j + 1] - times_[j];
      coef_[j] = (std::pow(t_new - times_[j], 1.0 - a) - std::pow(t_new - times_[j + 1], 1.0 - a)) / (g2 * h);
    }
    coef_[k] = std::pow(dt, -a) / g2;

    if (flux_ && !flux_cached_) {
      flux_hat_ = divergence(nonlinear_flux_hat(u_hat_, params_));
      flux_cached_ = true;
    }

    const std::size_t ns = u_hat_.size();
    std::vector<Complex> rhs(ns);
    for (std::size_t i = 0; i < ns; ++i) rhs[i] = coef_[k] * u_hat_[i];
    for (std::size_t j = 0; j < k; ++j) {
      const double c = coef_[j];
      const Complex* d = increments_[j].coeffs().data();
      for (std::size_t i = 0; i < ns; ++i) rhs[i] -= c * d[i];
    }
    Proposal prop{dt, SpectralField(domain_), GridField()};
    for (std::size_t i = 0; i < ns; ++i) {
      Complex r = rhs[i];
      if (flux_) r += flux_hat_[i];
      prop.u_hat[i] = r / (coef_[k] + params_.epsilon * md.k2[i]);
    }
    prop.u = to_grid(prop.u_hat);
    if (!prop.u.all_finite()) {
      std::ostringstream os;
      os << "non-finite field at t = " << t_new;
      throw BlowupError(k + 1, os.str());
    }
    return prop;
  }

  void commit(Proposal&& p) {
    SpectralField inc(domain_);
    for (std::size_t i = 0; i < inc.size(); ++i) inc[i] = p.u_hat[i] - u_hat_[i];
    increments_.push_back(std::move(inc));
    times_.push_back(times_.back() + p.dt);
    u_hat_ = std::move(p.u_hat);
    u_ = std::move(p.u);
    flux_cached_ = false;
  }

  // One step of size dt with no invariant checks.
  void step(double dt) { commit(propose(dt)); }

 private:
  FracParams params_;
  Domain domain_;
  std::shared_ptr<const SpectralContext> ctx_;
  bool flux_;
  std::vector<double> times_;
  std::vector<SpectralField> increments_;
  GridField u_;
  SpectralField u_hat_;
  SpectralField flux_hat_;
  bool flux_cached_ = false;
  std::vector<double> coef_;
};

struct RunResult {
  NormSeries series;
  GridField final_field;
  std::size_t rejections = 0;
  double mass_drift = 0.0;  // max |Σu(t) - Σu(0)| / Σ|u(0)|
};

using StepObserver = std::function<void(const StepperState&)>;

namespace detail {

struct MonotoneGuard {
  std::vector<double> q, initial, running_min;
  double tol;

  MonotoneGuard(const GridField& u0, std::vector<double> qs, double tol_) : q(std::move(qs)), tol(tol_) {
    for (double e : q) initial.push_back(tracked_norm(u0, e));
    running_min = initial;
  }
  // Index of the first exponent whose norm grew beyond tolerance, or -1.
  int violation(const GridField& u, std::vector<double>& norms) const {
    norms.resize(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
      norms[i] = tracked_norm(u, q[i]);
      if (norms[i] > running_min[i] + tol * initial[i]) return static_cast<int>(i);
    }
    return -1;
  }
  void accept(const std::vector<double>& norms) {
    for (std::size_t i = 0; i < q.size(); ++i) running_min[i] = std::min(running_min[i], norms[i]);
  }
};

inline void record(NormSeries& s, const GridField& u, double t, double dt, const StepperOptions& o, const FracParams& p) {
  const double e = o.record_energy ? energy_integrand(u, p.m, o.norm_q, p.s) : 0.0;
  s.push(t, tracked_norm(u, 1.0), tracked_norm(u, 2.0), tracked_norm(u, o.norm_q),
         lq_norm(u, std::numeric_limits<double>::infinity()), e, dt);
}

}  // namespace detail

// Integrates to o.t_end, halving dt whenever a step breaks L^q monotonicity.
inline RunResult run(const GridField& u0, const FracParams& p, const StepperOptions& o, const StepObserver& observer = {}) {
  p.validate(true);
  if (!(o.t_end > 0.0)) throw DomainError("run: t_end must be positive");
  StepperState st(u0, p, o.flux);
  RunResult res;
  res.series.q = o.norm_q;
  res.series.params = p;
  res.series.domain = u0.domain();
  detail::record(res.series, u0, 0.0, 0.0, o, p);
  detail::MonotoneGuard guard(u0, o.monotone_q, o.tol_mono);
  const double mass0 = u0.sum();
  double abs_mass0 = 0.0;
  for (double v : u0.values()) abs_mass0 += std::fabs(v);

  const Domain& d = u0.domain();
  const double kmax = d.wavenumber_unit() * static_cast<double>(d.n / 3) * std::sqrt(static_cast<double>(d.dim));
  const double g2 = gamma(2.0 - p.alpha);
  const auto graded_node = [&](std::size_t j) {
    return o.t_end * std::pow(static_cast<double>(j) / static_cast<double>(o.graded_steps), o.grading);
  };

  double dt = o.graded_steps > 0 ? graded_node(1) : (o.dt > 0.0 ? o.dt : default_initial_dt(u0, p));
  std::size_t graded_index = 1;
  std::vector<double> norms;
  if (observer) observer(st);

  while (st.t_now() < o.t_end * (1.0 - 1e-14)) {
    if (st.steps() >= o.max_steps) throw NumericError("run: step budget exhausted before t_end");
    double target = dt;
    if (o.graded_steps > 0) target = std::min(dt, graded_node(graded_index) - st.t_now());
    target = std::min(target, o.t_end - st.t_now());
    auto prop = st.propose(target);
    if (o.enforce_monotone) {
      const int bad = guard.violation(prop.u, norms);
      if (bad >= 0) {
        if (o.stop_when_unresolved && spectral_tail_ratio(prop.u_hat) > o.resolution_threshold) {
          res.series.resolution_time = st.t_now();
          break;
        }
        ++res.rejections;
        dt = 0.5 * target;
        if (dt < o.dt_min) {
          std::ostringstream os;
          os << "run: step size underflow at t = " << st.t_now() << " (L^" << o.monotone_q[bad]
             << " norm kept increasing; dt = " << dt << " < dt_min = " << o.dt_min << ")";
          if (res.series.resolution_time)
            os << "; the field has been under-resolved since t = " << *res.series.resolution_time;
          throw NumericError(os.str());
        }
        continue;
      }
      guard.accept(norms);
    }
    st.commit(std::move(prop));
    const GridField& u = st.current();
    detail::record(res.series, u, st.t_now(), target, o, p);
    res.mass_drift = std::max(res.mass_drift, std::fabs(u.sum() - mass0) / std::max(abs_mass0, 1e-300));
    if (!res.series.boundary_time &&
        boundary_mass_fraction(u, o.boundary_layer * d.length) > o.boundary_threshold)
      res.series.boundary_time = st.t_now();
    if (!res.series.resolution_time && spectral_tail_ratio(st.current_hat()) > o.resolution_threshold)
      res.series.resolution_time = st.t_now();
    if (observer) observer(st);
    if (o.stop_when_unresolved && res.series.resolution_time) break;

    if (o.graded_steps > 0) {
      if (st.t_now() >= graded_node(graded_index) * (1.0 - 1e-14)) {
        ++graded_index;
        dt = graded_index <= o.graded_steps ? graded_node(graded_index) - st.t_now() : dt;
      }
    } else if (o.growth > 1.0) {
      dt = std::min(target * o.growth, o.dt_max);
      const double umax = res.series.linf.back();
      const double stiff = g2 * std::pow(umax, p.m) * std::pow(kmax, 2.0 - 2.0 * p.s);
      if (o.flux && stiff > 0.0) dt = std::min(dt, std::pow(o.stability / stiff, 1.0 / p.alpha));
      dt = std::max(dt, target);
    } else {
      dt = target;
    }
  }
  res.final_field = st.current();
  return res;
}

struct LadderResult {
  std::vector<double> epsilons;
  std::vector<RunResult> runs;
  std::vector<double> successive_differences;  // max relative change of final norms
  bool converged = false;
};

// Repeats the run for each viscosity and compares final-time norms.
inline LadderResult run_viscosity_ladder(const GridField& u0, FracParams p, const StepperOptions& o,
                                         const std::vector<double>& epsilons, double tol = 0.01) {
  LadderResult out;
  for (double eps : epsilons) {
    p.epsilon = eps;
    out.epsilons.push_back(eps);
    out.runs.push_back(run(u0, p, o));
    if (out.runs.size() >= 2) {
      const auto& a = out.runs[out.runs.size() - 2].series;
      const auto& b = out.runs.back().series;
      double diff = 0.0;
      for (auto c : {NormSeries::Column::L1, NormSeries::Column::L2, NormSeries::Column::Lq, NormSeries::Column::Linf}) {
        const double x = a.column(c).back(), y = b.column(c).back();
        diff = std::max(diff, std::fabs(x - y) / std::max(std::fabs(y), 1e-300));
      }
      out.successive_differences.push_back(diff);
    }
  }
  out.converged = !out.successive_differences.empty() && out.successive_differences.back() <= tol;
  return out;
}

}  // namespace fracpm
