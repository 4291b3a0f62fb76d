#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracpm::testing {

struct MLReference {
  double alpha, beta, z, value;
};

// Frozen high-precision Mittag-Leffler values (see tests/oracle/gen_ml_oracle.py).
inline std::vector<MLReference> load_ml_reference() {
  std::ifstream in(std::string(FRACPM_TEST_DATA) + "/ml_oracle.csv");
  if (!in) throw std::runtime_error("cannot open ml_oracle.csv");
  std::vector<MLReference> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream is(line);
    MLReference r{};
    is >> r.alpha >> r.beta >> r.z >> r.value;
    rows.push_back(r);
  }
  return rows;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace fracpm::testing
