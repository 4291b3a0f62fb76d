#pragma once

// Run configuration: a single JSON document.
//
//   {
//     "params":  {"alpha": 0.5, "s": 0.5, "m": 1, "epsilon": 1e-3, "nu": 0},
//     "domain":  {"N": 2, "n": 64, "L": 16},
//     "u0":      {"shape": "gaussian", "width": 1, "amplitude": 1},
//     "solver":  "stepper",
//     "dt": 1e-3, "t_end": 1,
//     "snapshot_times": [0.5, 1],
//     "q_list": [1, 2, 4, "inf"], "norm_q": 4,
//     "output": "out",
//     "seed": 0,
//     "stepper": {"growth": 1, "stability": 0.5, "enforce_monotone": true,
//                 "stop_when_unresolved": false, "flux": true},
//     "mild":    {"steps": 32, "max_iter": 60, "tol_fix": 1e-12}
//   }
//
// u0 shapes: gaussian {width, amplitude}, two-bump {width, offset, amplitude},
// single-mode {k: [kx, ky(, kz)], amplitude}, random {kmax, amplitude} (uses
// seed), file {path} (snapshot format).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracpm/errors.hpp"
#include "fracpm/io.hpp"
#include "fracpm/mild.hpp"
#include "fracpm/params.hpp"
#include "fracpm/spectral.hpp"
#include "fracpm/stepper.hpp"

namespace fracpm {

struct InitialDatum {
  std::string shape = "gaussian";
  double width = 1.0, offset = 2.0, amplitude = 1.0;
  std::vector<int> k{1, 0, 0};
  int kmax = 4;
  std::string path;
};

struct RunConfig {
  FracParams params{};
  Domain domain{2, 64, 16.0};
  InitialDatum u0{};
  std::string solver = "stepper";
  double dt = 0.0;
  double t_end = 1.0;
  std::vector<double> snapshot_times;
  std::vector<double> q_list{1.0, 2.0, 4.0, std::numeric_limits<double>::infinity()};
  double norm_q = 4.0;
  std::string output = "out";
  std::uint64_t seed = 0;
  StepperOptions stepper{};
  PicardOptions mild{};
  nlohmann::json source;  // the parsed document, for hashing
};

// Configuration error located by line/column (parse) or field path (schema).
class ConfigError : public UsageError {
 public:
  using UsageError::UsageError;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

class FieldReader {
 public:
  FieldReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "document" : path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& field, const std::string& what) {
    throw ConfigError("config field '" + field + "': " + what);
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }
  const nlohmann::json& raw(const std::string& key) const { return j_.at(key); }

  void reject_unknown(std::initializer_list<const char*> known) const {
    const std::set<std::string> ok(known.begin(), known.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) fail(at(k), "unknown key");
  }

  void number(const std::string& key, double& out) const {
    if (!has(key)) return;
    out = to_number(j_.at(key), at(key));
  }

  static double to_number(const nlohmann::json& v, const std::string& field) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "inf" || s == "Infinity" || s == "∞") return std::numeric_limits<double>::infinity();
    }
    fail(field, "expected a number");
  }

  template <class Int>
  void integer(const std::string& key, Int& out) const {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(at(key), "expected a non-negative integer");
    out = static_cast<Int>(v.get<long long>());
  }

  void boolean(const std::string& key, bool& out) const {
    if (!has(key)) return;
    if (!j_.at(key).is_boolean()) fail(at(key), "expected true or false");
    out = j_.at(key).get<bool>();
  }

  void string(const std::string& key, std::string& out) const {
    if (!has(key)) return;
    if (!j_.at(key).is_string()) fail(at(key), "expected a string");
    out = j_.at(key).get<std::string>();
  }

  void numbers(const std::string& key, std::vector<double>& out) const {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_array()) fail(at(key), "expected an array");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(to_number(v[i], at(key) + "[" + std::to_string(i) + "]"));
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
};

// Rethrows a validation failure with the offending field prefixed.
template <class F>
void checked(const std::string& field, F&& f) {
  try {
    f();
  } catch (const DomainError& e) {
    throw ConfigError("config field '" + field + "': " + e.what());
  }
}

}  // namespace detail

inline RunConfig parse_run_config(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError("config parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                      e.what());
  }
  RunConfig c;
  c.source = doc;
  const detail::FieldReader top(doc, "");
  top.reject_unknown({"params", "domain", "u0", "solver", "dt", "t_end", "snapshot_times", "q_list", "norm_q",
                      "output", "seed", "stepper", "mild"});

  if (top.has("params")) {
    const detail::FieldReader r(top.raw("params"), "params");
    r.reject_unknown({"alpha", "s", "m", "epsilon", "nu"});
    r.number("alpha", c.params.alpha);
    r.number("s", c.params.s);
    r.number("m", c.params.m);
    r.number("epsilon", c.params.epsilon);
    r.number("nu", c.params.nu);
  }
  detail::checked("params", [&] { c.params.validate(); });

  if (top.has("domain")) {
    const detail::FieldReader r(top.raw("domain"), "domain");
    r.reject_unknown({"N", "n", "L"});
    r.integer("N", c.domain.dim);
    r.integer("n", c.domain.n);
    r.number("L", c.domain.length);
  }
  detail::checked("domain", [&] { c.domain.validate(); });

  if (top.has("u0")) {
    const detail::FieldReader r(top.raw("u0"), "u0");
    r.reject_unknown({"shape", "width", "offset", "amplitude", "k", "kmax", "path"});
    r.string("shape", c.u0.shape);
    r.number("width", c.u0.width);
    r.number("offset", c.u0.offset);
    r.number("amplitude", c.u0.amplitude);
    r.integer("kmax", c.u0.kmax);
    r.string("path", c.u0.path);
    if (r.has("k")) {
      const auto& k = r.raw("k");
      if (!k.is_array() || k.size() < 1 || k.size() > 3) detail::FieldReader::fail("u0.k", "expected 1-3 integers");
      c.u0.k = {0, 0, 0};
      for (std::size_t i = 0; i < k.size(); ++i) {
        if (!k[i].is_number_integer()) detail::FieldReader::fail("u0.k", "expected integers");
        c.u0.k[i] = k[i].get<int>();
      }
    }
  }
  static const std::set<std::string> shapes{"gaussian", "two-bump", "single-mode", "random", "file"};
  if (!shapes.count(c.u0.shape))
    detail::FieldReader::fail("u0.shape", "unknown shape '" + c.u0.shape +
                                              "' (expected gaussian, two-bump, single-mode, random or file)");
  if (c.u0.shape == "file" && !std::filesystem::exists(c.u0.path))
    detail::FieldReader::fail("u0.path", "file '" + c.u0.path + "' does not exist");
  if (!(c.u0.width > 0.0)) detail::FieldReader::fail("u0.width", "must be positive");

  top.string("solver", c.solver);
  if (c.solver != "stepper" && c.solver != "mild" && c.solver != "both")
    detail::FieldReader::fail("solver", "expected stepper, mild or both");
  top.number("dt", c.dt);
  top.number("t_end", c.t_end);
  if (!(c.t_end > 0.0) || !std::isfinite(c.t_end)) detail::FieldReader::fail("t_end", "must be positive and finite");
  if (!(c.dt >= 0.0) || !std::isfinite(c.dt)) detail::FieldReader::fail("dt", "must be >= 0 (0 selects the default)");
  top.numbers("snapshot_times", c.snapshot_times);
  for (double t : c.snapshot_times)
    if (!(t >= 0.0 && t <= c.t_end)) detail::FieldReader::fail("snapshot_times", "entries must lie in [0, t_end]");
  std::sort(c.snapshot_times.begin(), c.snapshot_times.end());
  top.numbers("q_list", c.q_list);
  if (c.q_list.empty()) detail::FieldReader::fail("q_list", "must not be empty");
  for (double q : c.q_list)
    if (!(q >= 1.0)) detail::FieldReader::fail("q_list", "entries must lie in [1, inf]");
  top.number("norm_q", c.norm_q);
  if (!(c.norm_q > 1.0) || std::isinf(c.norm_q)) detail::FieldReader::fail("norm_q", "must lie in (1, inf)");
  top.string("output", c.output);
  top.integer("seed", c.seed);

  c.stepper.t_end = c.t_end;
  c.stepper.dt = c.dt;
  c.stepper.monotone_q = c.q_list;
  c.stepper.norm_q = c.norm_q;
  if (top.has("stepper")) {
    const detail::FieldReader r(top.raw("stepper"), "stepper");
    r.reject_unknown({"growth", "stability", "enforce_monotone", "stop_when_unresolved", "flux", "dt_min", "dt_max",
                      "tol_mono", "max_steps"});
    r.number("growth", c.stepper.growth);
    r.number("stability", c.stepper.stability);
    r.boolean("enforce_monotone", c.stepper.enforce_monotone);
    r.boolean("stop_when_unresolved", c.stepper.stop_when_unresolved);
    r.boolean("flux", c.stepper.flux);
    r.number("dt_min", c.stepper.dt_min);
    r.number("dt_max", c.stepper.dt_max);
    r.number("tol_mono", c.stepper.tol_mono);
    r.integer("max_steps", c.stepper.max_steps);
    if (!(c.stepper.growth >= 1.0)) detail::FieldReader::fail("stepper.growth", "must be >= 1");
  }
  if (top.has("mild")) {
    const detail::FieldReader r(top.raw("mild"), "mild");
    r.reject_unknown({"steps", "max_iter", "tol_fix", "flux"});
    r.integer("steps", c.mild.steps);
    r.integer("max_iter", c.mild.max_iter);
    r.number("tol_fix", c.mild.tol_fix);
    r.boolean("flux", c.mild.flux);
  }
  c.mild.flux = c.mild.flux && c.stepper.flux;
  if (c.mild.steps < 1) detail::FieldReader::fail("mild.steps", "must be >= 1");
  if (c.solver != "stepper" && !(c.params.epsilon > 0.0))
    detail::FieldReader::fail("params.epsilon", "mild solutions require epsilon > 0");
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

inline GridField make_initial_datum(const RunConfig& c) {
  const Domain& d = c.domain;
  const InitialDatum& u = c.u0;
  const double mid = 0.5 * d.length;
  if (u.shape == "gaussian")
    return GridField::sample(d, [&](const std::array<double, 3>& x) {
      double r2 = 0.0;
      for (int k = 0; k < d.dim; ++k) r2 += (x[k] - mid) * (x[k] - mid);
      return u.amplitude * std::exp(-r2 / (2.0 * u.width * u.width));
    });
  if (u.shape == "two-bump")
    return GridField::sample(d, [&](const std::array<double, 3>& x) {
      double rp = 0.0, rm = 0.0;
      for (int k = 0; k < d.dim; ++k) {
        const double y = x[k] - mid, sh = k == 0 ? u.offset : 0.0;
        rp += (y - sh) * (y - sh);
        rm += (y + sh) * (y + sh);
      }
      const double w2 = 2.0 * u.width * u.width;
      return u.amplitude * (std::exp(-rp / w2) - std::exp(-rm / w2));
    });
  if (u.shape == "single-mode")
    return GridField::sample(d, [&](const std::array<double, 3>& x) {
      double ph = 0.0;
      for (int k = 0; k < d.dim; ++k) ph += u.k[k] * d.wavenumber_unit() * x[k];
      return u.amplitude * std::cos(ph);
    });
  if (u.shape == "random") {
    std::mt19937_64 rng(c.seed);
    return random_bandlimited_field(d, u.kmax, rng, u.amplitude);
  }
  if (u.shape == "file") {
    auto snap = read_snapshot(u.path);
    if (!(snap.field.domain() == d))
      throw ConfigError("config field 'u0.path': snapshot grid does not match 'domain'");
    return snap.field;
  }
  throw ConfigError("config field 'u0.shape': unknown shape '" + u.shape + "'");
}

// FNV-1a over the canonical (sorted-key) dump.
inline std::string config_hash(const nlohmann::json& j) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace fracpm
