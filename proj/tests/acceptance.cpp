// Acceptance run: one PASS/FAIL line per criterion, details as JSON on stderr.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "fracpm/verify.hpp"
#include "support.hpp"

namespace v = fracpm::verify;

int main() {
  std::vector<v::MLReference> oracle;
  for (const auto& r : fracpm::testing::load_ml_reference()) oracle.push_back({r.alpha, r.beta, r.z, r.value});

  struct Criterion {
    const char* title;
    v::Check (*run)(const std::vector<v::MLReference>&);
  };
  const Criterion criteria[] = {
      {"Mittag-Leffler evaluation vs extended-precision oracle", [](const auto& o) { return v::mittag_leffler(o); }},
      {"kernel identities (PC pair, Volterra closed forms, g_{1-a,n})",
       [](const auto&) { return v::kernel_identities(); }},
      {"Stroock-Varopoulos residual on random band-limited fields",
       [](const auto&) { return v::stroock_varopoulos(0); }},
      {"linear L1 scheme order", [](const auto&) { return v::linear_order(); }},
      {"stepper vs Picard cross-validation", [](const auto&) { return v::cross_validation(); }},
      {"a-priori estimates on nonlinear runs", [](const auto&) { return v::a_priori_estimates(); }},
      {"decay bound envelope", [](const auto&) { return v::decay_bound(); }},
      {"Moser recursion and limit products", [](const auto&) { return v::moser(); }},
      {"exponent ordering lattice", [](const auto&) { return v::exponent_ordering(); }},
      {"fundamental-solution decay", [](const auto&) { return v::fundamental_decay(); }},
  };

  int failures = 0, index = 0;
  for (const auto& c : criteria) {
    ++index;
    v::Check r;
    try {
      r = c.run(oracle);
    } catch (const std::exception& e) {
      r.name = c.title;
      r.pass = false;
      r.summary = std::string("exception: ") + e.what();
    }
    if (!r.pass) ++failures;
    std::printf("[%2d] %s  %s (%.1f s): %s\n", index, r.pass ? "PASS" : "FAIL", c.title, r.seconds, r.summary.c_str());
    std::fflush(stdout);
    std::cerr << v::to_json(r).dump() << '\n';
  }
  std::printf("%d/%d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}
