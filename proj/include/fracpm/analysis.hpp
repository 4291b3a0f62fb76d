#pragma once

// Closed-form decay exponents, the Moser recursion and its limit products,
// and checks of recorded norm histories against the a-priori estimates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracpm/errors.hpp"
#include "fracpm/norms.hpp"
#include "fracpm/params.hpp"
#include "fracpm/specfun.hpp"

namespace fracpm {

// ---------------------------------------------------------------------------
// Exponents

struct ExponentReport {
  int dim = 2;
  double alpha = 0.5, s = 0.5, m = 1.0, q = 2.0, p = std::numeric_limits<double>::infinity(), q0 = 2.0;
  double lambda0 = 0.0;              // (N - 2(1-s)) / N
  double theta_q = 0.0;              // (m + q) / 2
  double decay_exponent = 0.0;       // α / (q(1-λ0) + m): L^q -> L^∞
  double l1lp_exponent = 0.0;        // α(1-1/p) / (q0(1-λ0) + m)
  double comparison_gamma = 0.0;     // (m + q0 - λ0) / (q0 - 1)
  double comparison_exponent = 0.0;  // α / (q0 γ)
  bool ordering_holds = false;       // l1lp_exponent > comparison_exponent
};

inline double lambda0(int dim, double s) {
  return (static_cast<double>(dim) - 2.0 * (1.0 - s)) / static_cast<double>(dim);
}

inline ExponentReport exponents(const FracParams& prm, int dim, double q, double p, double q0) {
  prm.validate();
  if (dim < 2) throw DomainError("parameter hypothesis \"N >= 2\" violated: N = " + std::to_string(dim));
  const auto bad = [](const char* hyp, const char* name, double v) {
    std::ostringstream os;
    os << "parameter hypothesis \"" << hyp << "\" violated: " << name << " = " << v;
    return DomainError(os.str());
  };
  if (!(q > 1.0) || std::isinf(q)) throw bad("q ∈ (1,∞)", "q", q);
  if (!(p > 1.0)) throw bad("p ∈ (1,∞]", "p", p);
  if (!(q0 > 1.0) || std::isinf(q0)) throw bad("q0 ∈ (1,∞)", "q0", q0);
  ExponentReport r;
  r.dim = dim;
  r.alpha = prm.alpha;
  r.s = prm.s;
  r.m = prm.m;
  r.q = q;
  r.p = p;
  r.q0 = q0;
  r.lambda0 = lambda0(dim, prm.s);
  r.theta_q = 0.5 * (prm.m + q);
  r.decay_exponent = prm.alpha / (q * (1.0 - r.lambda0) + prm.m);
  const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  r.l1lp_exponent = prm.alpha * (1.0 - inv_p) / (q0 * (1.0 - r.lambda0) + prm.m);
  r.comparison_gamma = (prm.m + q0 - r.lambda0) / (q0 - 1.0);
  r.comparison_exponent = prm.alpha / (q0 * r.comparison_gamma);
  r.ordering_holds = r.l1lp_exponent > r.comparison_exponent;
  return r;
}

inline nlohmann::json to_json(const ExponentReport& r) {
  const auto num = [](double v) { return std::isinf(v) ? nlohmann::json("inf") : nlohmann::json(v); };
  return {{"N", r.dim},
          {"alpha", r.alpha},
          {"s", r.s},
          {"m", r.m},
          {"q", r.q},
          {"p", num(r.p)},
          {"q0", r.q0},
          {"lambda0", r.lambda0},
          {"theta_q", r.theta_q},
          {"decay_exponent", r.decay_exponent},
          {"l1lp_exponent", r.l1lp_exponent},
          {"comparison_gamma", r.comparison_gamma},
          {"comparison_exponent", r.comparison_exponent},
          {"ordering_holds", r.ordering_holds}};
}

inline std::string to_text(const ExponentReport& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  const auto row = [&](const char* k, double v) { os << std::left << std::setw(22) << k << v << '\n'; };
  row("lambda0", r.lambda0);
  row("theta_q", r.theta_q);
  row("decay_exponent", r.decay_exponent);
  row("l1lp_exponent", r.l1lp_exponent);
  row("comparison_gamma", r.comparison_gamma);
  row("comparison_exponent", r.comparison_exponent);
  os << std::left << std::setw(22) << "ordering"
     << (r.ordering_holds ? "l1lp_exponent > comparison_exponent (holds)"
                          : "l1lp_exponent <= comparison_exponent (VIOLATED)")
     << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Moser iteration

struct MoserSequence {
  std::vector<double> q;           // q_0 .. q_{n_max}
  std::vector<double> normalized;  // λ0^n q_n
  double limit = 0.0;              // q0 + m / (1 - λ0)
};

// q_{n+1} = (m + q_n) / λ0.
inline MoserSequence moser_sequence(double q0, double m, double lam, std::size_t n_max) {
  if (!(q0 > 1.0) || std::isinf(q0)) throw DomainError("moser_sequence: q0 must lie in (1, ∞)");
  if (!(m >= 0.0)) throw DomainError("moser_sequence: m must be >= 0");
  if (!(lam > 0.0 && lam < 1.0)) throw DomainError("moser_sequence: lambda0 must lie in (0, 1)");
  if (n_max < 1) throw DomainError("moser_sequence: n_max must be >= 1");
  MoserSequence s;
  s.q.push_back(q0);
  s.normalized.push_back(q0);
  double scale = 1.0;
  for (std::size_t n = 0; n < n_max; ++n) {
    // λ0^{n+1} q_{n+1} = λ0^n q_n + m λ0^n
    s.normalized.push_back(s.normalized.back() + m * scale);
    scale *= lam;
    s.q.push_back((m + s.q.back()) / lam);
  }
  s.limit = q0 + m / (1.0 - lam);
  return s;
}

struct MoserConstant {
  double c_exponent = 0.0;        // the base constant enters as C^{c_exponent}
  double two_factor = 0.0;        // lim Π (2^{k+1})^{λ0^k / (λ0^{n+1} q_{n+1})}
  double two_factor_exact = 0.0;  // 2^{1/((1-λ0)(q0(1-λ0)+m))}
  double z_limit = 0.0;           // lim Z_n
  double z_from_series = 0.0;     // exp{S_0 / (q0 + m/(1-λ0))}
  double s1 = 0.0;                // lim Π (q_k - 1)^{...}
  double s2 = 0.0;                // lim Π θ_{q_k}^{2...}
  double combined = 0.0;          // 2-factor · S2 / (Z · S1)
  double time_exponent = 0.0;     // -α / (q0(1-λ0) + m)
  double datum_exponent = 0.0;    // q0(1-λ0) / (q0(1-λ0) + m)
  std::size_t iterations = 0;
  // Partial products and the ratio of successive increments at the last step.
  std::vector<double> z_partial, s1_partial, s2_partial, two_partial;
  double z_ratio = 0.0, s1_ratio = 0.0, s2_ratio = 0.0;
};

// Evaluates the limit products of the Moser iteration by partial products
// P_n = exp{Σ_{k<=n} λ0^k ln a_k / (λ0^{n+1} q_{n+1})} until every log
// increment is below tol.
inline MoserConstant moser_constant(double q0, double m, double lam, double alpha, double tol = 1e-13,
                                    std::size_t max_iter = 400) {
  if (!(tol > 0.0)) throw DomainError("moser_constant: tol must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("moser_constant: alpha must lie in (0, 1]");
  const MoserSequence seq = moser_sequence(q0, m, lam, max_iter + 1);
  MoserConstant c;
  const double denom = q0 * (1.0 - lam) + m;
  c.c_exponent = 1.0 / denom;
  c.two_factor_exact = std::pow(2.0, 1.0 / ((1.0 - lam) * denom));
  c.time_exponent = -alpha / denom;
  c.datum_exponent = q0 * (1.0 - lam) / denom;

  // log q_k = log(λ0^k q_k) - k log λ0 avoids overflow.
  const auto log_q = [&](std::size_t k) { return std::log(seq.normalized[k]) - static_cast<double>(k) * std::log(lam); };
  long double sz = 0, s1 = 0, s2 = 0, s2pow = 0, w = 1;
  double prev[4] = {0, 0, 0, 0};
  for (std::size_t n = 0; n <= max_iter; ++n) {
    const double qn = seq.q[n];
    sz += w * log_q(n);
    s1 += w * std::log(qn - 1.0);
    s2 += w * 2.0 * std::log(0.5 * (m + qn));
    s2pow += w * static_cast<long double>(n + 1) * std::log(2.0L);
    w *= lam;
    const double b = seq.normalized[n + 1];
    const double logs[4] = {static_cast<double>(sz / b), static_cast<double>(s1 / b), static_cast<double>(s2 / b),
                            static_cast<double>(s2pow / b)};
    c.z_partial.push_back(std::exp(logs[0]));
    c.s1_partial.push_back(std::exp(logs[1]));
    c.s2_partial.push_back(std::exp(logs[2]));
    c.two_partial.push_back(std::exp(logs[3]));
    c.iterations = n + 1;
    bool done = n >= 4;
    for (int i = 0; i < 4; ++i) {
      if (std::fabs(logs[i] - prev[i]) > tol) done = false;
      prev[i] = logs[i];
    }
    if (done) break;
  }
  if (c.iterations > max_iter) throw NumericError("moser_constant: partial products did not settle");
  c.z_limit = c.z_partial.back();
  c.s1 = c.s1_partial.back();
  c.s2 = c.s2_partial.back();
  c.two_factor = c.two_partial.back();
  // S_0 = Σ λ0^k ln q_k summed to the same depth.
  c.z_from_series = std::exp(static_cast<double>(sz) / seq.limit);
  c.combined = c.two_factor * c.s2 / (c.z_limit * c.s1);
  // Increment ratios at depth 20, well above round-off.
  const std::size_t k = std::min<std::size_t>(20, c.z_partial.size() - 1);
  if (k >= 2) {
    const auto ratio = [k](const std::vector<double>& v) {
      const double d0 = v[k - 1] - v[k - 2];
      return d0 == 0.0 ? 0.0 : (v[k] - v[k - 1]) / d0;
    };
    c.z_ratio = ratio(c.z_partial);
    c.s1_ratio = ratio(c.s1_partial);
    c.s2_ratio = ratio(c.s2_partial);
  }
  return c;
}

inline nlohmann::json to_json(const MoserConstant& c) {
  return {{"C_exponent", c.c_exponent},       {"two_factor", c.two_factor},
          {"two_factor_exact", c.two_factor_exact}, {"Z_limit", c.z_limit},
          {"Z_from_series", c.z_from_series}, {"S1", c.s1},
          {"S2", c.s2},                       {"combined", c.combined},
          {"time_exponent", c.time_exponent}, {"datum_exponent", c.datum_exponent},
          {"iterations", c.iterations},       {"ratios", {{"Z", c.z_ratio}, {"S1", c.s1_ratio}, {"S2", c.s2_ratio}}}};
}

// Ratio of successive partial-product increments at index n (n >= 2).
inline double partial_product_ratio(const std::vector<double>& partial, std::size_t n) {
  if (n < 2 || n >= partial.size()) throw DomainError("partial_product_ratio: index out of range");
  const double d1 = partial[n] - partial[n - 1], d0 = partial[n - 1] - partial[n - 2];
  if (d0 == 0.0) throw NumericError("partial_product_ratio: increments vanished");
  return d1 / d0;
}

// ---------------------------------------------------------------------------
// Checks on recorded series

struct ColumnCheck {
  std::string column;
  bool pass = true;
  std::optional<std::size_t> first_violation;
  double max_excess = 0.0;  // max (value - running min) / initial value
};

struct MonotoneReport {
  double tol = 0.0;
  bool pass = true;
  std::vector<ColumnCheck> columns;
};

// Every norm column must stay below its running minimum plus tol·(initial value).
inline MonotoneReport check_monotone(const NormSeries& s, double tol = 1e-6) {
  MonotoneReport r;
  r.tol = tol;
  const std::pair<const char*, NormSeries::Column> cols[] = {{"L1", NormSeries::Column::L1},
                                                             {"L2", NormSeries::Column::L2},
                                                             {"Lq", NormSeries::Column::Lq},
                                                             {"Linf", NormSeries::Column::Linf}};
  for (const auto& [name, col] : cols) {
    const auto& v = s.column(col);
    ColumnCheck c;
    c.column = name;
    if (!v.empty()) {
      double run_min = v[0];
      const double ref = std::fabs(v[0]) > 0.0 ? std::fabs(v[0]) : 1.0;
      for (std::size_t i = 1; i < v.size(); ++i) {
        const double excess = (v[i] - run_min) / ref;
        c.max_excess = std::max(c.max_excess, excess);
        if (excess > tol && !c.first_violation) {
          c.first_violation = i;
          c.pass = false;
        }
        run_min = std::min(run_min, v[i]);
      }
    }
    r.pass = r.pass && c.pass;
    r.columns.push_back(c);
  }
  return r;
}

struct EnergyReport {
  double tol = 0.0;
  bool pass = true;
  double max_violation = 0.0;  // max (lhs - rhs) / rhs over the nodes
  std::size_t worst_index = 0;
  double c_alpha = 0.0;
};

// C_a t^{1-a} ‖u(t)‖_q^q + (q(q-1)/θ_q²) ∫_0^t E dτ <= C_a t^{1-a} ‖u0‖_q^q (1 + tol),
// C_a = 1/((1-a)Γ(1-a)), θ_q = (m+q)/2, trapezoid rule in time.
inline EnergyReport check_energy(const NormSeries& s, double tol = 5e-2) {
  const double a = s.params.alpha, q = s.q, m = s.params.m;
  if (!(a > 0.0 && a < 1.0)) throw DomainError("check_energy: alpha must lie in (0, 1)");
  if (!(q > 1.0) || std::isinf(q)) throw DomainError("check_energy: the series q must lie in (1, ∞)");
  EnergyReport r;
  r.tol = tol;
  r.c_alpha = 1.0 / ((1.0 - a) * gamma(1.0 - a));
  const double theta = 0.5 * (m + q), coef = q * (q - 1.0) / (theta * theta);
  const double u0q = std::pow(s.lq.empty() ? 0.0 : s.lq[0], q);
  double integral = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    integral += 0.5 * (s.energy[i] + s.energy[i - 1]) * (s.t[i] - s.t[i - 1]);
    const double w = r.c_alpha * std::pow(s.t[i], 1.0 - a);
    const double lhs = w * std::pow(s.lq[i], q) + coef * integral, rhs = w * u0q;
    const double v = rhs > 0.0 ? (lhs - rhs) / rhs : (lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (i == 1 || v > r.max_violation) {
      r.max_violation = i == 1 ? v : std::max(r.max_violation, v);
      r.worst_index = i;
    }
  }
  r.pass = r.max_violation <= tol;
  return r;
}

struct DecayFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
  std::size_t samples = 0;
  double t_a = 0.0, t_b = 0.0;
};

namespace detail {

inline std::vector<std::size_t> window_indices(const NormSeries& s, double t_a, double t_b) {
  if (!(t_a > 0.0) || !(t_b > t_a)) throw DomainError("decay window must satisfy 0 < t_a < t_b");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.t[i] >= t_a && s.t[i] <= t_b) idx.push_back(i);
  if (idx.size() < 10) throw DomainError("decay window holds fewer than 10 samples");
  return idx;
}

}  // namespace detail

// Least squares of log‖·‖ against log t over [t_a, t_b].
inline DecayFit fit_decay(const NormSeries& s, NormSeries::Column col, double t_a, double t_b) {
  const auto idx = detail::window_indices(s, t_a, t_b);
  const auto& v = s.column(col);
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i : idx) {
    if (!(v[i] > 0.0)) throw DomainError("fit_decay: nonpositive norm value at t = " + std::to_string(s.t[i]));
    const double x = std::log(s.t[i]), y = std::log(v[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double n = static_cast<double>(idx.size());
  DecayFit f;
  f.samples = idx.size();
  f.t_a = s.t[idx.front()];
  f.t_b = s.t[idx.back()];
  const double sxx_c = sxx - sx * sx / n, sxy_c = sxy - sx * sy / n, syy_c = syy - sy * sy / n;
  f.slope = sxy_c / sxx_c;
  f.intercept = (sy - f.slope * sx) / n;
  f.r2 = syy_c > 0.0 ? (sxy_c * sxy_c) / (sxx_c * syy_c) : 1.0;
  return f;
}

struct DecayBoundReport {
  double exponent = 0.0, tol = 0.0;
  bool pass = true;
  double max_rise = 0.0;  // max_i M_i / min_{j<=i} M_j - 1
  std::size_t rise_index = 0;
  double decades = 0.0;   // log10(t_b / t_a) actually covered
  DecayFit fit;
};

// Envelope M(t) = ‖u(t)‖ t^{exponent}: must never exceed (1 + tol) times its
// smallest earlier value in the window.
inline DecayBoundReport check_decay_bound(const NormSeries& s, double exponent, NormSeries::Column col, double t_a,
                                          double t_b, double tol = 0.15) {
  DecayBoundReport r;
  r.exponent = exponent;
  r.tol = tol;
  r.fit = fit_decay(s, col, t_a, t_b);
  const auto idx = detail::window_indices(s, t_a, t_b);
  const auto& v = s.column(col);
  double run_min = std::numeric_limits<double>::infinity();
  for (std::size_t i : idx) {
    const double M = v[i] * std::pow(s.t[i], exponent);
    run_min = std::min(run_min, M);
    const double rise = M / run_min - 1.0;
    if (rise > r.max_rise) {
      r.max_rise = rise;
      r.rise_index = i;
    }
  }
  r.decades = std::log10(r.fit.t_b / r.fit.t_a);
  r.pass = r.max_rise <= tol;
  return r;
}

// [0.1 t_end, first boundary-flag time or t_end].
inline std::pair<double, double> default_decay_window(const NormSeries& s) {
  if (s.size() < 2) throw DomainError("default_decay_window: empty series");
  const double t_end = s.t.back();
  return {0.1 * t_end, s.boundary_time ? std::min(*s.boundary_time, t_end) : t_end};
}

inline nlohmann::json to_json(const MonotoneReport& r) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : r.columns)
    cols.push_back({{"column", c.column},
                    {"pass", c.pass},
                    {"max_excess", c.max_excess},
                    {"first_violation", c.first_violation ? nlohmann::json(*c.first_violation) : nlohmann::json()}});
  return {{"check", "monotone"}, {"tol", r.tol}, {"pass", r.pass}, {"columns", cols}};
}

inline nlohmann::json to_json(const EnergyReport& r) {
  return {{"check", "energy"},
          {"tol", r.tol},
          {"pass", r.pass},
          {"max_violation", r.max_violation},
          {"worst_index", r.worst_index},
          {"C_alpha", r.c_alpha}};
}

inline nlohmann::json to_json(const DecayFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"samples", f.samples},
          {"t_a", f.t_a},     {"t_b", f.t_b}};
}

inline nlohmann::json to_json(const DecayBoundReport& r) {
  return {{"check", "decay_bound"},
          {"exponent", r.exponent},
          {"tol", r.tol},
          {"pass", r.pass},
          {"max_rise", r.max_rise},
          {"decades", r.decades},
          {"fit", to_json(r.fit)},
          {"note", "periodic box; bound checked only before the boundary flag"}};
}

}  // namespace fracpm
