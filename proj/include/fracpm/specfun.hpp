#pragma once

// Gamma and Mittag-Leffler functions on the negative real axis.
//
// E_{a,b}(-x) is evaluated by one of three methods:
//   * power series in extended precision while the largest term stays
//     within ~e^11 of the result (x^{1/a} <= 11);
//   * the algebraic asymptotic expansion with optimal truncation, accepted
//     whenever the first omitted term is below 1e-15 of the sum;
//   * otherwise a real-line integral representation (0 < a < 1), which
//     covers the band where the series cancels catastrophically but the
//     expansion has not yet become accurate.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/sin_pi.hpp>

#include "fracpm/errors.hpp"

namespace fracpm {

inline double gamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) {
    std::ostringstream os;
    os << "gamma: pole at non-positive integer " << x;
    throw DomainError(os.str());
  }
  return std::tgamma(x);
}

// 1/Γ(x), entire; zero at the poles of Γ.
inline double rgamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) return 0.0;
  if (x > 171.0) return std::exp(-std::lgamma(x));
  return 1.0 / std::tgamma(x);
}

struct MLParams {
  double alpha = 1.0;
  double beta = 1.0;

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("Mittag-Leffler: alpha must lie in (0, 2]");
    if (!(beta > 0.0)) throw DomainError("Mittag-Leffler: beta must be positive");
  }
};

// E_{a,b}(z) for z <= 0 with coefficient tables cached for repeated use.
class MittagLeffler {
 public:
  static constexpr double kSeriesLimit = 11.0;  // bound on x^{1/a} for the series
  static constexpr double kAsymptoticTol = 1e-15;

  explicit MittagLeffler(MLParams p) : p_(p) {
    p_.validate();
    is_exp_ = (p_.alpha == 1.0 && p_.beta == 1.0);
    if (is_exp_) return;
    series_limit_ = std::pow(kSeriesLimit, p_.alpha);

    const auto nser = static_cast<std::size_t>(std::ceil(120.0 / p_.alpha)) + 16;
    series_coef_.resize(nser);
    for (std::size_t k = 0; k < nser; ++k) {
      const long double arg = static_cast<long double>(p_.alpha) * k + p_.beta;
      series_coef_[k] = arg < 1700.0L ? 1.0L / std::tgamma(arg) : std::exp(-std::lgamma(arg));
    }

    // log|1/Γ(b - a k)| and its sign; reflection keeps large negative
    // arguments finite.
    constexpr std::size_t nasy = 600;
    // The envelope drops the sin(pi z) factor so its minimum marks the
    // optimal truncation index even when single coefficients sit near a pole.
    asy_log_.resize(nasy + 1);
    asy_env_.resize(nasy + 1);
    asy_sign_.resize(nasy + 1);
    for (std::size_t k = 1; k <= nasy; ++k) {
      const double z = p_.beta - p_.alpha * static_cast<double>(k);
      if (z > 0.0) {
        asy_log_[k] = asy_env_[k] = -std::lgamma(z);
        asy_sign_[k] = 1;
        continue;
      }
      asy_env_[k] = std::lgamma(1.0 - z) - std::log(std::numbers::pi);
      if (z == std::floor(z)) {
        asy_sign_[k] = 0;
        continue;
      }
      const double sp = boost::math::sin_pi(z);
      asy_log_[k] = asy_env_[k] + std::log(std::fabs(sp));
      asy_sign_[k] = sp > 0.0 ? 1 : -1;
    }
  }

  MittagLeffler(double alpha, double beta) : MittagLeffler(MLParams{alpha, beta}) {}

  const MLParams& params() const { return p_; }

  // Largest x evaluated by the series branch.
  double series_limit() const { return is_exp_ ? std::numeric_limits<double>::infinity() : series_limit_; }

  double operator()(double z) const {
    if (std::isnan(z) || z > 0.0) throw DomainError("Mittag-Leffler: argument must be <= 0");
    if (is_exp_) return std::exp(z);
    const double x = -z;
    if (x == 0.0) return static_cast<double>(series_coef_[0]);
    if (x <= series_limit_) return series(x);
    double err = 0.0;
    const double a = asymptotic(x, &err);
    if (err <= kAsymptoticTol * std::fabs(a)) return a;
    if (p_.alpha < 1.0) return integral(x);
    std::ostringstream os;
    os << "Mittag-Leffler: no convergent method for alpha=" << p_.alpha << " beta=" << p_.beta << " x=" << x
       << " (asymptotic error estimate " << err << ")";
    throw NumericError(os.str());
  }

  // Branch entry points, exposed for crossover checks.
  double series(double x) const {
    long double sum = 0.0L, xk = 1.0L;
    const long double lx = x;
    for (std::size_t k = 0; k < series_coef_.size(); ++k) {
      const long double term = xk * series_coef_[k];
      sum += (k % 2 == 0) ? term : -term;
      if (k > 4 && static_cast<double>(k) * p_.alpha > std::pow(x, 1.0 / p_.alpha) + 2.0 &&
          std::fabs(term) <= 1e-22L * std::fabs(sum))
        return static_cast<double>(sum);
      xk *= lx;
    }
    std::ostringstream os;
    os << "Mittag-Leffler series did not converge at x=" << x << " (alpha=" << p_.alpha << ")";
    throw NumericError(os.str());
  }

  double asymptotic(double x, double* err_estimate) const {
    const double lx = std::log(x);
    double sum = 0.0;
    double env_prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < asy_log_.size(); ++k) {
      const double env = std::exp(asy_env_[k] - static_cast<double>(k) * lx);
      const bool past_peak = static_cast<double>(k) * p_.alpha > p_.beta;
      if (past_peak && env > env_prev) {
        *err_estimate = env_prev;
        return sum;
      }
      if (past_peak) env_prev = env;
      if (asy_sign_[k] != 0) {
        const int sign = asy_sign_[k] * ((k % 2 == 1) ? 1 : -1);
        sum += sign * std::exp(asy_log_[k] - static_cast<double>(k) * lx);
      }
      if (past_peak && env < 1e-18 * std::fabs(sum)) {
        *err_estimate = env;
        return sum;
      }
    }
    *err_estimate = env_prev;
    return sum;
  }

  double integral(double x) const {
    const double a = p_.alpha, b = p_.beta;
    if (!(a < 1.0)) throw NumericError("Mittag-Leffler integral representation requires alpha < 1");
    const double sb = std::sin(b * std::numbers::pi);
    const double sba = std::sin((b - a) * std::numbers::pi);
    const double ca = std::cos(a * std::numbers::pi);
    const double pw = (1.0 - b) / a;
    auto f = [&](double u) {
      if (u <= 0.0) return 0.0;
      const double damp = std::pow(u, 1.0 / a);
      if (damp > 740.0) return 0.0;
      const double num = u * sb + x * sba;
      const double den = u * u + 2.0 * x * u * ca + x * x;
      return std::exp(-damp) * std::pow(u, pw) * num / den;
    };
    // The integrand lives on u ≲ few; split there so both rules see smooth pieces.
    const double split = std::min(x, 4.0);
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    const double tol = 1e-15;
    double e1 = 0.0, e2 = 0.0;
    const double i1 = ts.integrate(f, 0.0, split, tol, &e1);
    const double i2 = es.integrate(f, split, std::numeric_limits<double>::infinity(), tol, &e2);
    const double v = (i1 + i2) / (a * std::numbers::pi);
    if (!std::isfinite(v)) throw NumericError("Mittag-Leffler integral representation produced a non-finite value");
    return v;
  }

 private:
  MLParams p_;
  bool is_exp_ = false;
  double series_limit_ = 0.0;
  std::vector<long double> series_coef_;
  std::vector<double> asy_log_;
  std::vector<double> asy_env_;
  std::vector<int> asy_sign_;
};

inline double ml_eval(const MLParams& p, double z) { return MittagLeffler(p)(z); }

// t^{a-1} E_{a,a}(-lam t^a).
inline double ml_derivative_kernel(double alpha, double lam, double t) {
  if (!(t > 0.0)) throw DomainError("ml_derivative_kernel: t must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("ml_derivative_kernel: alpha must lie in (0, 1]");
  if (!(lam >= 0.0)) throw DomainError("ml_derivative_kernel: lambda must be non-negative");
  return std::pow(t, alpha - 1.0) * ml_eval({alpha, alpha}, -lam * std::pow(t, alpha));
}

}  // namespace fracpm
