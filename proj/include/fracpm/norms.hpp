#pragma once

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fracpm/errors.hpp"
#include "fracpm/params.hpp"
#include "fracpm/spectral.hpp"

namespace fracpm {

// Norm history of a run; row 0 is the initial datum (t = 0, dt = 0).
struct NormSeries {
  std::vector<double> t, l1, l2, lq, linf, energy, dt;
  double q = 2.0;         // exponent of the Lq column and of the energy integrand
  FracParams params{};
  Domain domain{};
  std::optional<double> boundary_time;    // first time the tail-mass monitor fired
  std::optional<double> resolution_time;  // first time the spectral-tail monitor fired

  enum class Column { L1, L2, Lq, Linf, Energy };

  std::size_t size() const { return t.size(); }

  const std::vector<double>& column(Column c) const {
    switch (c) {
      case Column::L1: return l1;
      case Column::L2: return l2;
      case Column::Lq: return lq;
      case Column::Linf: return linf;
      case Column::Energy: return energy;
    }
    throw UsageError("NormSeries: unknown column");
  }

  static Column parse_column(const std::string& name) {
    if (name == "L1") return Column::L1;
    if (name == "L2") return Column::L2;
    if (name == "Lq") return Column::Lq;
    if (name == "Linf") return Column::Linf;
    if (name == "energy_integrand") return Column::Energy;
    throw UsageError("unknown norm column '" + name + "' (expected L1, L2, Lq, Linf or energy_integrand)");
  }

  void push(double time, double a1, double a2, double aq, double ainf, double e, double step) {
    t.push_back(time);
    l1.push_back(a1);
    l2.push_back(a2);
    lq.push_back(aq);
    linf.push_back(ainf);
    energy.push_back(e);
    dt.push_back(step);
  }

  void validate() const {
    const std::size_t n = t.size();
    for (const auto* c : {&l1, &l2, &lq, &linf, &energy, &dt})
      if (c->size() != n) throw UsageError("NormSeries: ragged columns");
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0 && !(t[i] > t[i - 1])) throw UsageError("NormSeries: times must be strictly increasing");
      for (const auto* c : {&t, &l1, &l2, &lq, &linf, &energy, &dt})
        if (!((*c)[i] >= 0.0)) throw UsageError("NormSeries: entries must be non-negative");
    }
  }

  void write_csv(std::ostream& os) const {
    os << "t,L1,L2,Lq,Linf,energy_integrand,dt\n" << std::setprecision(17);
    for (std::size_t i = 0; i < size(); ++i)
      os << t[i] << ',' << l1[i] << ',' << l2[i] << ',' << lq[i] << ',' << linf[i] << ',' << energy[i] << ',' << dt[i]
         << '\n';
  }

  static NormSeries read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw UsageError("norms CSV: empty input");
    if (line.rfind("t,L1,L2,Lq,Linf,energy_integrand,dt", 0) != 0)
      throw UsageError("norms CSV: header must be t,L1,L2,Lq,Linf,energy_integrand,dt");
    NormSeries s;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::istringstream ls(line);
      double v[7];
      char comma = 0;
      for (int k = 0; k < 7; ++k) {
        if (!(ls >> v[k])) throw UsageError("norms CSV: malformed number on line " + std::to_string(lineno));
        if (k < 6 && (!(ls >> comma) || comma != ','))
          throw UsageError("norms CSV: expected ',' on line " + std::to_string(lineno));
      }
      s.push(v[0], v[1], v[2], v[3], v[4], v[5], v[6]);
    }
    s.validate();
    return s;
  }
};

}  // namespace fracpm
