#pragma once

// Verification suites: each check runs a fixed, deterministic configuration
// and reports pass/fail with a JSON detail block.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracpm/analysis.hpp"
#include "fracpm/kernels.hpp"
#include "fracpm/mild.hpp"
#include "fracpm/specfun.hpp"
#include "fracpm/spectral.hpp"
#include "fracpm/stepper.hpp"

namespace fracpm::verify {

struct Check {
  std::string name;
  bool pass = false;
  std::string summary;
  nlohmann::json detail;
  double seconds = 0.0;
};

inline nlohmann::json to_json(const Check& c) {
  return {{"check", c.name}, {"pass", c.pass}, {"summary", c.summary}, {"seconds", c.seconds}, {"detail", c.detail}};
}

namespace detail {

inline Check timed(const std::string& name, const std::function<void(Check&)>& body) {
  Check c;
  c.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  body(c);
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return c;
}

inline std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

inline double l2_distance(const GridField& a, const GridField& b) { return lq_norm(a - b, 2.0); }

inline GridField gaussian(const Domain& d, double width, double amplitude = 1.0) {
  const double c = 0.5 * d.length;
  return GridField::sample(d, [&](const std::array<double, 3>& x) {
    double r2 = 0.0;
    for (int k = 0; k < d.dim; ++k) r2 += (x[k] - c) * (x[k] - c);
    return amplitude * std::exp(-r2 / (2.0 * width * width));
  });
}

// exp(-|x - c - a e1|²/2w²) - exp(-|x - c + a e1|²/2w²).
inline GridField two_bump(const Domain& d, double width, double offset, double amplitude = 1.0) {
  const double c = 0.5 * d.length;
  return GridField::sample(d, [&](const std::array<double, 3>& x) {
    double rp = 0.0, rm = 0.0;
    for (int k = 0; k < d.dim; ++k) {
      const double y = x[k] - c, sh = k == 0 ? offset : 0.0;
      rp += (y - sh) * (y - sh);
      rm += (y + sh) * (y + sh);
    }
    const double w2 = 2.0 * width * width;
    return amplitude * (std::exp(-rp / w2) - std::exp(-rm / w2));
  });
}

// Richardson estimate from three successive refinements by 2.
struct Richardson {
  double d1 = 0.0, d2 = 0.0, order = 0.0, error = 0.0;
};

inline Richardson richardson(const GridField& coarse, const GridField& mid, const GridField& fine) {
  Richardson r;
  r.d1 = l2_distance(coarse, mid);
  r.d2 = l2_distance(mid, fine);
  r.order = std::log2(r.d1 / r.d2);
  r.error = r.order > 0.0 ? r.d2 / (std::pow(2.0, r.order) - 1.0) : std::numeric_limits<double>::infinity();
  return r;
}

inline nlohmann::json to_json(const Richardson& r) {
  return {{"diff_coarse", r.d1}, {"diff_fine", r.d2}, {"observed_order", r.order}, {"error_estimate", r.error}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Special functions

struct MLReference {
  double alpha, beta, z, value;
};

inline Check mittag_leffler(const std::vector<MLReference>& oracle, double tol = 1e-10, double tol_exp = 1e-12) {
  return detail::timed("mittag_leffler", [&](Check& c) {
    double worst = 0.0;
    MLReference at{};
    for (const auto& r : oracle) {
      const double v = ml_eval({r.alpha, r.beta}, r.z);
      const double e = std::fabs(v - r.value) / std::max(std::fabs(r.value), 1e-300);
      if (e > worst || !std::isfinite(e)) {
        worst = std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
        at = r;
      }
    }
    double worst_exp = 0.0;
    const MittagLeffler e11(1.0, 1.0);
    for (int i = 0; i <= 200; ++i) {
      const double z = -50.0 * i / 200.0;
      worst_exp = std::max(worst_exp, std::fabs(e11(z) - std::exp(z)) / std::exp(z));
    }
    c.pass = !oracle.empty() && worst <= tol && worst_exp <= tol_exp;
    c.detail = {{"points", oracle.size()},   {"max_rel_error", worst}, {"tol", tol},
                {"worst", {at.alpha, at.beta, at.z}}, {"exp_max_rel_error", worst_exp}, {"tol_exp", tol_exp}};
    c.summary = "max rel error " + detail::fmt(worst) + " on " + std::to_string(oracle.size()) +
                " points (tol " + detail::fmt(tol) + "); E_{1,1} vs exp " + detail::fmt(worst_exp);
  });
}

// ---------------------------------------------------------------------------
// Kernels

// PC identity, Volterra closed forms, the identity g_{1-a,n} = g_{1-a} * h and
// monotonicity of g_{1-a,n} on T = 1, M = 2048.
inline Check kernel_identities(std::size_t steps = 2048, int n = 1) {
  return detail::timed("kernel_identities", [&](Check& c) {
    const auto grid = UniformGrid::over(1.0, steps);
    const double tol = default_tol_conv(grid.horizon());
    c.pass = true;
    c.detail = nlohmann::json::array();
    double worst_pc = 0.0, worst_s = 0.0, worst_id = 0.0;
    for (double a : {0.3, 0.5, 0.8}) {
      double pc[2] = {0.0, 0.0};
      for (int k = 0; k < 2; ++k)
        for (double v : pc_pair_tempered(a, k == 0 ? 0.0 : 1.0, grid).identity_defect())
          pc[k] = std::max(pc[k], std::fabs(v));
      const auto res = volterra_resolvent(a, n, grid);
      const MittagLeffler e1(a, 1.0);
      double es = 0.0, eh = 0.0;
      for (std::size_t j = 1; j <= steps; ++j) {
        const double t = grid.t(j);
        es = std::max(es, std::fabs(res.s.value(j) / e1(-n * std::pow(t, a)) - 1.0));
        const double hx = n * ml_derivative_kernel(a, n, t);
        eh = std::max(eh, std::fabs(res.h.value(j) / hx - 1.0));
      }
      const auto conv = convolve(res.h, sample_g_kernel(1.0 - a, grid));
      double id = 0.0;
      for (std::size_t j = 1; j <= steps; ++j) id = std::max(id, std::fabs(conv[j - 1] - res.g_n.value(j)));
      bool nonneg = true;
      for (std::size_t j = 1; j <= steps; ++j) nonneg = nonneg && res.g_n.value(j) >= 0.0;
      const std::size_t inc = res.g_n.first_increase();
      const bool ok = pc[0] <= tol && pc[1] <= tol && es <= 1e-6 && eh <= 1e-6 && id <= tol && nonneg && inc == 0;
      c.pass = c.pass && ok;
      worst_pc = std::max({worst_pc, pc[0], pc[1]});
      worst_s = std::max({worst_s, es, eh});
      worst_id = std::max(worst_id, id);
      c.detail.push_back({{"alpha", a},
                          {"n", n},
                          {"pc_defect_nu0", pc[0]},
                          {"pc_defect_nu1", pc[1]},
                          {"s_rel_error", es},
                          {"h_rel_error", eh},
                          {"identity_defect", id},
                          {"g_n_nonnegative", nonneg},
                          {"g_n_first_increase", inc},
                          {"tol_conv", tol},
                          {"pass", ok}});
    }
    c.summary = "PC defect " + detail::fmt(worst_pc) + ", closed forms " + detail::fmt(worst_s) + ", g_n identity " +
                detail::fmt(worst_id) + " (tol_conv " + detail::fmt(tol) + ", closed-form tol 1e-06)";
  });
}

// ‖h_n * f - f‖_{L²(0,T)} for f = sin t must decrease along n = 10, 100, 1000.
// The horizon keeps n^{1/a} Δt small enough to resolve the largest n.
inline Check yosida_ladder() {
  return detail::timed("yosida_ladder", [&](Check& c) {
    c.pass = true;
    c.detail = nlohmann::json::array();
    std::string text;
    for (auto [a, T] : {std::pair{0.5, 1e-3}, std::pair{0.8, 0.1}}) {
      const auto grid = UniformGrid::over(T, 4096);
      const auto f = TimeSeries::sample(grid, [](double t) { return std::sin(t); });
      std::vector<double> err;
      for (int n : {10, 100, 1000}) {
        const auto y = yosida_mollify(volterra_resolvent(a, n, grid).h, f);
        double acc = 0.0;
        for (std::size_t j = 0; j <= grid.steps; ++j) {
          const double d = y.values[j] - f.values[j];
          acc += (j == 0 || j == grid.steps ? 0.5 : 1.0) * d * d;
        }
        err.push_back(std::sqrt(acc * grid.dt));
      }
      const bool ok = err[1] < err[0] && err[2] < err[1];
      c.pass = c.pass && ok;
      c.detail.push_back({{"alpha", a}, {"T", T}, {"M", grid.steps}, {"n", {10, 100, 1000}}, {"l2_error", err}, {"pass", ok}});
      text += (text.empty() ? "" : "; ") + std::string("a=") + detail::fmt(a, 2) + ": " + detail::fmt(err[0]) + " > " +
              detail::fmt(err[1]) + " > " + detail::fmt(err[2]);
    }
    c.summary = "L2 error decreasing in n (" + text + ")";
  });
}

// ---------------------------------------------------------------------------
// Spectral

inline Check stroock_varopoulos(std::uint64_t seed = 0, std::size_t fields = 100, double tol = 1e-8) {
  return detail::timed("stroock_varopoulos", [&](Check& c) {
    const Domain d{2, 64, 2.0 * std::numbers::pi};
    std::mt19937_64 rng(seed);
    std::vector<GridField> samples;
    for (std::size_t i = 0; i < fields; ++i) samples.push_back(random_bandlimited_field(d, 6, rng));
    c.pass = true;
    c.detail = nlohmann::json::array();
    double worst = std::numeric_limits<double>::infinity();
    for (double m : {1.0, 2.0})
      for (double q : {1.5, 2.0, 4.0})
        for (double s : {0.5, 0.75}) {
          double lo = std::numeric_limits<double>::infinity();
          for (const auto& u : samples) {
            const auto t = stroock_varopoulos_terms(u, m, q, s);
            lo = std::min(lo, t.residual() / t.scale());
          }
          const bool ok = lo >= -tol;
          c.pass = c.pass && ok;
          worst = std::min(worst, lo);
          c.detail.push_back({{"m", m}, {"q", q}, {"s", s}, {"min_relative_residual", lo}, {"pass", ok}});
        }
    c.summary = "min residual/scale " + detail::fmt(worst) + " over " + std::to_string(fields) +
                " fields x 12 lattice points (must be >= -" + detail::fmt(tol) + ")";
  });
}

inline Check fundamental_decay(int fold = 24) {
  return detail::timed("fundamental_decay", [&](Check& c) {
    const Domain d{2, 128, 16.0 * std::numbers::pi};
    const FracParams p{0.5, 0.5, 1.0, 1.0, 0.0};
    std::vector<double> times;
    for (int i = 0; i <= 4; ++i) times.push_back(std::pow(10.0, i / 4.0));
    const auto tab = fundamental_decay_table(p, 2.0, times, d, fold);
    const double target = -p.alpha * d.dim / 4.0;
    const double rel = std::fabs(tab.z_slope / target - 1.0);
    c.pass = rel <= 0.1 && tab.z_l1_defect <= 1e-10;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : tab.rows) rows.push_back({{"t", r.t}, {"Z_L2", r.z_norm}, {"gradY_L2", r.grad_y_norm}});
    c.detail = {{"z_slope", tab.z_slope},         {"z_exponent", tab.z_exponent},
                {"relative_slope_error", rel},    {"grad_y_slope", tab.grad_y_slope},
                {"grad_y_exponent", tab.grad_y_exponent}, {"z_l1_defect", tab.z_l1_defect},
                {"rows", rows},                   {"notes", tab.notes}};
    c.summary = "Z slope " + detail::fmt(tab.z_slope, 4) + " vs " + detail::fmt(target) + " (rel " +
                detail::fmt(rel) + ", tol 0.1); |‖Z‖_1 - 1| = " + detail::fmt(tab.z_l1_defect) + " (tol 1e-10)";
  });
}

// ---------------------------------------------------------------------------
// Linear solver order

// Θ off, u0 = cos x on a 2π box with ε = 1: û(t) = E_a(-t^a) û(0). Graded
// nodes t_j = T (j/M)^{(2-a)/a} recover the 2 - a order despite the t^a
// behaviour at 0.
inline Check linear_order() {
  return detail::timed("linear_order", [&](Check& c) {
    const Domain d{2, 16, 2.0 * std::numbers::pi};
    const auto u0 = GridField::sample(d, [](const std::array<double, 3>& x) { return std::cos(x[0]); });
    c.pass = true;
    c.detail = nlohmann::json::array();
    std::string text;
    for (double a : {0.3, 0.5, 0.8}) {
      const FracParams p{a, 0.5, 1.0, 1.0, 0.0};
      const double exact = MittagLeffler(a, 1.0)(-1.0);
      std::vector<double> err, orders;
      for (std::size_t M : {64, 128, 256, 512}) {
        StepperOptions o;
        o.t_end = 1.0;
        o.flux = false;
        o.graded_steps = M;
        o.grading = (2.0 - a) / a;
        o.record_energy = false;
        o.enforce_monotone = false;
        err.push_back(std::fabs(run(u0, p, o).final_field[0] - exact));
      }
      bool ok = true;
      for (std::size_t i = 0; i + 1 < err.size(); ++i) {
        orders.push_back(std::log2(err[i] / err[i + 1]));
        ok = ok && std::fabs(orders.back() - (2.0 - a)) <= 0.3;
      }
      c.pass = c.pass && ok;
      c.detail.push_back({{"alpha", a}, {"steps", {64, 128, 256, 512}}, {"errors", err}, {"orders", orders},
                          {"expected", 2.0 - a}, {"pass", ok}});
      text += (text.empty() ? "" : "; ") + std::string("a=") + detail::fmt(a, 2) + ":";
      for (double o : orders) text += " " + detail::fmt(o);
    }
    c.summary = "observed orders (" + text + "), expected 2-a +- 0.3";
  });
}

// ---------------------------------------------------------------------------
// Nonlinear runs

// Stepper vs Picard on a mixed-sign two-bump datum inside the certified horizon.
inline Check cross_validation() {
  return detail::timed("cross_validation", [&](Check& c) {
    const Domain d{2, 64, 16.0};
    const auto u0 = detail::two_bump(d, 1.0, 2.0);
    const FracParams p{0.5, 0.5, 1.0, 1e-2, 0.0};
    const auto cert = picard_certified(u0, p, 1.0);
    const double T = cert.horizon;
    std::vector<GridField> pic, stp;
    std::vector<double> ratios;
    for (std::size_t J : {16, 32, 64}) {
      PicardOptions po;
      po.steps = J;
      const auto r = picard_solve(u0, p, T, po);
      ratios.push_back(r.contraction_ratio);
      pic.push_back(r.trajectory.u.back());
      StepperOptions so;
      so.t_end = T;
      so.dt = T / static_cast<double>(J);
      so.enforce_monotone = false;
      so.record_energy = false;
      stp.push_back(run(u0, p, so).final_field);
    }
    const auto rp = detail::richardson(pic[0], pic[1], pic[2]);
    const auto rs = detail::richardson(stp[0], stp[1], stp[2]);
    const double dist = detail::l2_distance(pic[2], stp[2]);
    const double bound = 3.0 * (rp.error + rs.error);
    c.pass = cert.contraction_ratio < 0.5 && dist <= bound;
    c.detail = {{"horizon", T},
                {"halvings", cert.halvings},
                {"contraction_ratio", cert.contraction_ratio},
                {"iterations", cert.iterations},
                {"picard", detail::to_json(rp)},
                {"stepper", detail::to_json(rs)},
                {"ratios_by_J", ratios},
                {"l2_distance", dist},
                {"bound", bound}};
    c.summary = "T = " + detail::fmt(T) + ", ratio " + detail::fmt(cert.contraction_ratio) + " (< 0.5); L2 distance " +
                detail::fmt(dist) + " <= 3 x (" + detail::fmt(rp.error) + " + " + detail::fmt(rs.error) + ") = " +
                detail::fmt(bound);
  });
}

// Monotonicity, mass and the energy inequality along ε = 1e-2, 1e-3, 1e-4 for
// s ∈ {0.5, 0.75}, m ∈ {1, 2}, a ∈ {0.5, 0.8}. Runs stop at the first step the
// spectral tail exceeds the resolution threshold; checks cover [0, T*].
inline Check a_priori_estimates(double t_end = 1.0) {
  return detail::timed("a_priori_estimates", [&](Check& c) {
    const Domain d{2, 128, 16.0};
    const auto u0 = detail::gaussian(d, 1.0);
    c.pass = true;
    c.detail = nlohmann::json::array();
    double worst_mono = 0.0, worst_mass = 0.0, worst_energy = -std::numeric_limits<double>::infinity();
    double shortest = t_end;
    std::size_t n_runs = 0;
    for (double s : {0.5, 0.75})
      for (double m : {1.0, 2.0})
        for (double a : {0.5, 0.8})
          for (double eps : {1e-2, 1e-3, 1e-4}) {
            const FracParams p{a, s, m, eps, 0.0};
            StepperOptions o;
            o.t_end = t_end;
            o.dt = 1e-3;
            o.norm_q = 4.0;
            o.stop_when_unresolved = true;
            const auto r = run(u0, p, o);
            const auto mono = check_monotone(r.series, 1e-6);
            const auto en = check_energy(r.series, 5e-2);
            const bool mass_ok = r.mass_drift <= 1e-10;
            const bool ok = mono.pass && en.pass && mass_ok && r.series.size() > 1;
            double excess = 0.0;
            for (const auto& col : mono.columns) excess = std::max(excess, col.max_excess);
            const double t_star = r.series.t.back();
            c.pass = c.pass && ok;
            worst_mono = std::max(worst_mono, excess);
            worst_mass = std::max(worst_mass, r.mass_drift);
            worst_energy = std::max(worst_energy, en.max_violation);
            shortest = std::min(shortest, t_star);
            ++n_runs;
            c.detail.push_back({{"s", s},
                                {"m", m},
                                {"alpha", a},
                                {"epsilon", eps},
                                {"t_star", t_star},
                                {"resolution_time", r.series.resolution_time ? nlohmann::json(*r.series.resolution_time)
                                                                             : nlohmann::json()},
                                {"steps", r.series.size() - 1},
                                {"rejections", r.rejections},
                                {"monotone", to_json(mono)},
                                {"mass_drift", r.mass_drift},
                                {"energy", to_json(en)},
                                {"pass", ok}});
          }
    c.summary = std::to_string(n_runs) + " runs: max monotone excess " + detail::fmt(worst_mono) +
                " (tol 1e-6), mass drift " + detail::fmt(worst_mass) + " (tol 1e-10), energy violation " +
                detail::fmt(worst_energy) + " (tol 5e-2); shortest resolved horizon " + detail::fmt(shortest);
  });
}

// ---------------------------------------------------------------------------
// Decay

struct DecayRunConfig {
  std::size_t n = 192;
  double length = 24.0;
  double width = 1.0;
  double t_end = 400.0;
  double dt = 1e-3;
  double growth = 1.05;
  double stability = 3.0;
  double epsilon = 1e-3;
};

// Standard bump run (a = 0.5, s = 0.5, m = 1, q = 2): the envelope
// ‖u‖_∞ t^{a/(q(1-λ0)+m)} must not rise by more than 15% over the window.
inline Check decay_bound(const DecayRunConfig& cfg = {}) {
  return detail::timed("decay_bound", [&](Check& c) {
    const Domain d{2, cfg.n, cfg.length};
    const auto u0 = detail::gaussian(d, cfg.width);
    const FracParams p{0.5, 0.5, 1.0, cfg.epsilon, 0.0};
    const auto ex = exponents(p, d.dim, 2.0, std::numeric_limits<double>::infinity(), 2.0);
    StepperOptions o;
    o.t_end = cfg.t_end;
    o.dt = cfg.dt;
    o.growth = cfg.growth;
    o.stability = cfg.stability;
    o.norm_q = 2.0;
    o.record_energy = false;
    const auto r = run(u0, p, o);
    auto [ta, tb] = default_decay_window(r.series);
    // Start at the last sample at or before the nominal start so the samples
    // themselves span the full window.
    const auto first_after = std::upper_bound(r.series.t.begin(), r.series.t.end(), ta);
    if (first_after != r.series.t.begin() && *(first_after - 1) > 0.0) ta = *(first_after - 1);
    const auto rep = check_decay_bound(r.series, ex.decay_exponent, NormSeries::Column::Linf, ta, tb, 0.15);
    const bool resolved = !r.series.resolution_time || *r.series.resolution_time >= tb;
    c.pass = rep.pass && rep.decades >= 1.0 - 1e-9 && resolved;
    c.detail = to_json(rep);
    c.detail["window"] = {ta, tb};
    c.detail["steps"] = r.series.size() - 1;
    c.detail["rejections"] = r.rejections;
    c.detail["boundary_time"] = r.series.boundary_time ? nlohmann::json(*r.series.boundary_time) : nlohmann::json();
    c.detail["resolution_time"] =
        r.series.resolution_time ? nlohmann::json(*r.series.resolution_time) : nlohmann::json();
    c.summary = "envelope rise " + detail::fmt(rep.max_rise) + " (tol 0.15) over " + detail::fmt(rep.decades) +
                " decades [" + detail::fmt(ta) + ", " + detail::fmt(tb) + "]; fitted slope " +
                detail::fmt(rep.fit.slope) + " vs bound -" + detail::fmt(ex.decay_exponent);
  });
}

// ---------------------------------------------------------------------------
// Moser machinery and exponent ordering

inline Check moser(std::size_t depth = 20) {
  return detail::timed("moser", [&](Check& c) {
    c.pass = true;
    c.detail = nlohmann::json::array();
    double worst_limit = 0.0, worst_two = 0.0, worst_ratio = 0.0;
    for (double q0 : {1.5, 2.0, 4.0})
      for (double m : {1.0, 2.0})
        for (double lam : {0.5, 0.75}) {
          const auto seq = moser_sequence(q0, m, lam, depth + 1);
          const double limit_err = std::fabs(seq.normalized[depth + 1] - seq.limit);
          const auto mc = moser_constant(q0, m, lam, 0.5);
          const double two_err = std::fabs(mc.two_factor / mc.two_factor_exact - 1.0);
          const double ratio_err = std::max({std::fabs(mc.z_ratio / lam - 1.0), std::fabs(mc.s1_ratio / lam - 1.0),
                                             std::fabs(mc.s2_ratio / lam - 1.0)});
          const bool finite = std::isfinite(mc.s1) && mc.s1 > 0.0 && std::isfinite(mc.s2) && mc.s2 > 0.0 &&
                              std::isfinite(mc.z_limit) && mc.z_limit > 0.0;
          const bool ok = limit_err <= 1e-4 && two_err <= 1e-10 && ratio_err <= 0.1 && finite;
          // Depth at which the normalized sequence first meets 1e-4.
          std::size_t reach = 0;
          for (const auto more = moser_sequence(q0, m, lam, 400); reach < more.normalized.size(); ++reach)
            if (std::fabs(more.normalized[reach] - more.limit) <= 1e-4) break;
          c.pass = c.pass && ok;
          worst_limit = std::max(worst_limit, limit_err);
          worst_two = std::max(worst_two, two_err);
          worst_ratio = std::max(worst_ratio, ratio_err);
          c.detail.push_back({{"q0", q0},
                              {"m", m},
                              {"lambda0", lam},
                              {"normalized_error", limit_err},
                              {"depth_for_1e-4", reach == 0 ? 0 : reach - 1},
                              {"two_factor_rel_error", two_err},
                              {"ratio_rel_error", ratio_err},
                              {"constant", to_json(mc)},
                              {"pass", ok}});
        }
    c.summary = "normalized-limit error at n=" + std::to_string(depth) + ": " + detail::fmt(worst_limit) +
                " (tol 1e-4); 2-factor " + detail::fmt(worst_two) + " (tol 1e-10); increment ratio vs lambda0 " +
                detail::fmt(worst_ratio) + " (tol 0.1)";
  });
}

inline Check exponent_ordering() {
  return detail::timed("exponent_ordering", [&](Check& c) {
    c.pass = true;
    c.detail = nlohmann::json::array();
    double margin = std::numeric_limits<double>::infinity();
    for (double q0 : {1.5, 2.0, 4.0})
      for (double m : {1.0, 1.5, 2.0})
        for (double s : {0.5, 0.75, 0.9}) {
          const FracParams p{0.5, s, m, 0.0, 0.0};
          const auto r = exponents(p, 2, q0, std::numeric_limits<double>::infinity(), q0);
          c.pass = c.pass && r.ordering_holds;
          margin = std::min(margin, r.l1lp_exponent - r.comparison_exponent);
          c.detail.push_back(to_json(r));
        }
    c.summary = "l1lp - comparison exponent >= " + detail::fmt(margin) + " on 27 points";
  });
}

// ---------------------------------------------------------------------------
// Suites

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"kernels", "spectral", "linear", "nonlinear", "decay", "moser"};
  return names;
}

inline std::vector<Check> run_suite(const std::string& name, std::uint64_t seed = 0) {
  if (name == "kernels") return {kernel_identities(), yosida_ladder()};
  if (name == "spectral") return {stroock_varopoulos(seed), fundamental_decay()};
  if (name == "linear") return {linear_order()};
  if (name == "nonlinear") return {cross_validation(), a_priori_estimates()};
  if (name == "decay") return {decay_bound()};
  if (name == "moser") return {moser(), exponent_ordering()};
  throw UsageError("unknown suite '" + name + "' (expected kernels, spectral, linear, nonlinear, decay or moser)");
}

}  // namespace fracpm::verify
