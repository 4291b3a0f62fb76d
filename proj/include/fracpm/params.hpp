#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include "fracpm/errors.hpp"

namespace fracpm {

// Parameters of  ∂_t^a u - eps Δu = div(|u|^m ∇(-Δ)^{-s} u).
struct FracParams {
  double alpha = 0.5;
  double s = 0.5;
  double m = 1.0;
  double epsilon = 0.0;
  double nu = 0.0;

  // alpha = 1 (the classical limit) is accepted only when explicitly allowed;
  // it is used by sanity checks against the heat equation.
  void validate(bool allow_classical_limit = false) const {
    const bool alpha_ok = alpha > 0.0 && (alpha < 1.0 || (allow_classical_limit && alpha == 1.0));
    if (!alpha_ok) throw DomainError(violation("0 < alpha < 1", "alpha", alpha));
    if (!(s >= 0.5 && s < 1.0)) throw DomainError(violation("1/2 <= s < 1", "s", s));
    if (!(m >= 1.0)) throw DomainError(violation("m >= 1", "m", m));
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw DomainError(violation("epsilon >= 0", "epsilon", epsilon));
    if (!(nu >= 0.0) || !std::isfinite(nu)) throw DomainError(violation("nu >= 0", "nu", nu));
  }

 private:
  static std::string violation(const char* hypothesis, const char* name, double v) {
    std::ostringstream os;
    os << "parameter hypothesis \"" << hypothesis << "\" violated: " << name << " = " << v;
    return os.str();
  }
};

}  // namespace fracpm
