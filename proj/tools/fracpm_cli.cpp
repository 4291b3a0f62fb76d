// fracpm: run solvers, dump kernels, print exponents, run verification suites
// and fit decay rates.
//
// Exit codes: 0 ok, 1 check failure, 2 usage, 3 numeric failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fracpm/fracpm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kUsage = 2, kNumeric = 3 };

double parse_extended(const std::string& s, const std::string& name) {
  if (s == "inf" || s == "Inf" || s == "infinity" || s == "∞") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw fracpm::UsageError("option --" + name + ": '" + s + "' is not a number");
}

json num(double v) { return std::isinf(v) ? json("inf") : json(v); }

json optional_time(const std::optional<double>& t) { return t ? json(*t) : json(); }

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string command;

  void write(const fs::path& artifact) const {
    json p{{"artifact", artifact.filename().string()},
           {"config_hash", config_hash},
           {"version", fracpm::version},
           {"seed", seed},
           {"command", command}};
    std::ofstream os(artifact.string() + ".provenance.json");
    if (!os) throw fracpm::UsageError("cannot write provenance for " + artifact.string());
    os << p.dump(2) << '\n';
  }
};

void write_json(const fs::path& path, const json& j, const Provenance& prov) {
  std::ofstream os(path);
  if (!os) throw fracpm::UsageError("cannot write " + path.string());
  os << j.dump(2) << '\n';
  prov.write(path);
}

void write_norms(const fs::path& path, const fracpm::NormSeries& s, const Provenance& prov) {
  std::ofstream os(path);
  if (!os) throw fracpm::UsageError("cannot write " + path.string());
  s.write_csv(os);
  os.close();
  prov.write(path);
}

fracpm::NormSeries trajectory_norms(const fracpm::TrajectoryGrid& tr, double q) {
  fracpm::NormSeries s;
  s.q = q;
  s.params = tr.params;
  s.domain = tr.domain;
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < tr.t.size(); ++j) {
    const auto& u = tr.u[j];
    s.push(tr.t[j], fracpm::lq_norm(u, 1.0), fracpm::lq_norm(u, 2.0), fracpm::lq_norm(u, q), fracpm::lq_norm(u, inf),
           fracpm::energy_integrand(u, tr.params.m, q, tr.params.s), j == 0 ? 0.0 : tr.t[j] - tr.t[j - 1]);
  }
  return s;
}

// ---------------------------------------------------------------------------

int cmd_run(const std::string& config_path, const std::string& output_override) {
  const fracpm::RunConfig cfg = fracpm::load_run_config(config_path);
  const fs::path out = output_override.empty() ? fs::path(cfg.output) : fs::path(output_override);
  fs::create_directories(out);
  const Provenance prov{fracpm::config_hash(cfg.source), cfg.seed, "run " + config_path};
  const fracpm::GridField u0 = fracpm::make_initial_datum(cfg);

  json report{{"config_hash", prov.config_hash}, {"version", fracpm::version}, {"solver", cfg.solver},
              {"params", {{"alpha", cfg.params.alpha}, {"s", cfg.params.s}, {"m", cfg.params.m},
                          {"epsilon", cfg.params.epsilon}, {"nu", cfg.params.nu}}},
              {"domain", {{"N", cfg.domain.dim}, {"n", cfg.domain.n}, {"L", cfg.domain.length}}},
              {"t_end", cfg.t_end}};
  std::optional<fracpm::GridField> stepper_final, mild_final;

  if (cfg.solver == "stepper" || cfg.solver == "both") {
    std::size_t next = 0, count = 0;
    json snaps = json::array();
    const auto snapshot = [&](const fracpm::StepperState& st) {
      while (next < cfg.snapshot_times.size() && st.t_now() >= cfg.snapshot_times[next] * (1.0 - 1e-12)) {
        std::ostringstream name;
        name << "snapshot_" << std::setw(3) << std::setfill('0') << count++ << ".bin";
        fracpm::write_snapshot((out / name.str()).string(), st.current(), st.t_now());
        prov.write(out / name.str());
        snaps.push_back({{"file", name.str()}, {"requested", cfg.snapshot_times[next]}, {"t", st.t_now()}});
        ++next;
      }
    };
    const auto res = fracpm::run(u0, cfg.params, cfg.stepper, snapshot);
    write_norms(out / "norms.csv", res.series, prov);
    json checks{{"monotone", fracpm::to_json(fracpm::check_monotone(res.series, cfg.stepper.tol_mono))}};
    if (cfg.params.alpha < 1.0 && cfg.stepper.record_energy)
      checks["energy"] = fracpm::to_json(fracpm::check_energy(res.series));
    report["stepper"] = {{"steps", res.series.size() - 1},
                         {"t_final", res.series.t.back()},
                         {"rejections", res.rejections},
                         {"mass_drift", res.mass_drift},
                         {"boundary_time", optional_time(res.series.boundary_time)},
                         {"resolution_time", optional_time(res.series.resolution_time)},
                         {"dt_history", res.series.dt},
                         {"snapshots", snaps},
                         {"checks", checks},
                         {"norms", "norms.csv"}};
    stepper_final = res.final_field;
  }

  if (cfg.solver == "mild" || cfg.solver == "both") {
    const auto res = fracpm::picard_solve(u0, cfg.params, cfg.t_end, cfg.mild);
    const auto series = trajectory_norms(res.trajectory, cfg.norm_q);
    write_norms(out / "norms_mild.csv", series, prov);
    fracpm::write_snapshot((out / "mild_final.bin").string(), res.trajectory.u.back(), res.trajectory.t.back());
    prov.write(out / "mild_final.bin");
    report["mild"] = {{"iterations", res.iterations},
                      {"contraction_ratio", res.contraction_ratio},
                      {"differences", res.differences},
                      {"horizon", res.horizon},
                      {"steps", cfg.mild.steps},
                      {"norms", "norms_mild.csv"},
                      {"final", "mild_final.bin"}};
    mild_final = res.trajectory.u.back();
  }

  if (stepper_final && mild_final) {
    const double d = fracpm::lq_norm(*stepper_final - *mild_final, 2.0);
    report["cross_validation"] = {{"t", cfg.t_end},
                                  {"l2_distance", d},
                                  {"relative", d / std::max(fracpm::lq_norm(*mild_final, 2.0), 1e-300)}};
  }
  write_json(out / "report.json", report, prov);
  std::cout << report.dump(2) << '\n';
  return kOk;
}

int cmd_exponents(const fracpm::FracParams& p, int dim, const std::string& q, const std::string& pp,
                  const std::string& q0, bool as_json) {
  const auto r = fracpm::exponents(p, dim, parse_extended(q, "q"), parse_extended(pp, "p"), parse_extended(q0, "q0"));
  if (as_json)
    std::cout << fracpm::to_json(r).dump(2) << '\n';
  else
    std::cout << fracpm::to_text(r);
  return kOk;
}

int cmd_kernels(const std::string& kind, double alpha, double nu, int n, double T, std::size_t M,
                const std::string& outdir) {
  const auto grid = fracpm::UniformGrid::over(T, M);
  const fs::path out(outdir);
  fs::create_directories(out);
  json params{{"kind", kind}, {"alpha", alpha}, {"nu", nu}, {"n", n}, {"T", T}, {"M", M}};
  const Provenance prov{fracpm::config_hash(params), 0, "kernels"};
  json report{{"params", params}, {"files", json::array()}};
  const auto dump = [&](const fracpm::KernelTable& k, const std::string& file) {
    std::ofstream os(out / file);
    if (!os) throw fracpm::UsageError("cannot write " + (out / file).string());
    k.write_csv(os);
    os.close();
    prov.write(out / file);
    report["files"].push_back(file);
  };
  const auto max_abs = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
  };
  if (kind == "g") {
    dump(fracpm::sample_g_kernel(alpha, grid), "g.csv");
  } else if (kind == "pc") {
    const auto pc = fracpm::pc_pair_tempered(alpha, nu, grid);
    dump(pc.k, "pc_k.csv");
    dump(pc.l, "pc_l.csv");
    report["identity_defect"] = max_abs(pc.identity_defect());
    report["tol_conv"] = fracpm::default_tol_conv(T);
  } else {
    const auto r = fracpm::volterra_resolvent(alpha, n, grid);
    dump(r.s, "s.csv");
    dump(r.h, "h.csv");
    dump(r.g_n, "g_n.csv");
    report["g_n_first_increase"] = r.g_n.first_increase();
  }
  write_json(out / "kernels.json", report, prov);
  std::cout << report.dump(2) << '\n';
  return kOk;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& json_path) {
  const auto checks = fracpm::verify::run_suite(suite, seed);
  bool ok = true;
  json summary{{"suite", suite}, {"seed", seed}, {"version", fracpm::version}, {"checks", json::array()}};
  for (const auto& c : checks) {
    ok = ok && c.pass;
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " (" << std::fixed << std::setprecision(1) << c.seconds
              << " s): " << c.summary << '\n';
    std::cout.unsetf(std::ios::floatfield);
    summary["checks"].push_back(fracpm::verify::to_json(c));
  }
  summary["pass"] = ok;
  for (const auto& c : summary["checks"])
    std::cout << json{{"check", c["check"]}, {"pass", c["pass"]}, {"summary", c["summary"]}}.dump() << '\n';
  if (!json_path.empty()) {
    const Provenance prov{fracpm::config_hash({{"suite", suite}, {"seed", seed}}), seed, "verify " + suite};
    write_json(json_path, summary, prov);
  }
  return ok ? kOk : kCheckFailed;
}

int cmd_fit(const std::string& path, const std::string& column, double t_a, double t_b,
            const std::optional<double>& exponent, double tol) {
  std::ifstream in(path);
  if (!in) throw fracpm::UsageError("cannot open " + path);
  const auto s = fracpm::NormSeries::read_csv(in);
  if (s.size() < 2) throw fracpm::UsageError("norms CSV holds fewer than two rows");
  const auto col = fracpm::NormSeries::parse_column(column);
  if (!(t_a > 0.0)) t_a = 0.1 * s.t.back();
  if (!(t_b > 0.0)) t_b = s.t.back();
  const auto fit = fracpm::fit_decay(s, col, t_a, t_b);
  json out{{"file", path}, {"column", column}, {"fit", fracpm::to_json(fit)}};
  int code = kOk;
  if (exponent) {
    const auto rep = fracpm::check_decay_bound(s, *exponent, col, t_a, t_b, tol);
    out["decay_bound"] = fracpm::to_json(rep);
    if (!rep.pass) code = kCheckFailed;
  }
  std::cout << out.dump(2) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-fractional porous medium equation with nonlocal pressure: solvers and verification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fracpm::version));

  auto* run = app.add_subcommand("run", "Run the configured solver(s) and write norms, snapshots and a report");
  std::string config_path, output_override;
  run->add_option("config", config_path, "JSON run configuration")->required();
  run->add_option("-o,--output", output_override, "Output directory (overrides the config)");

  auto* ex = app.add_subcommand("exponents", "Print decay exponents and the comparison ordering");
  fracpm::FracParams ep;
  int dim = 2;
  std::string q = "2", pp = "inf", q0 = "2";
  bool as_json = false;
  ex->add_option("--alpha", ep.alpha, "Caputo order")->capture_default_str();
  ex->add_option("--s", ep.s, "Riesz potential order")->capture_default_str();
  ex->add_option("--m", ep.m, "Nonlinearity exponent")->capture_default_str();
  ex->add_option("--N", dim, "Spatial dimension")->capture_default_str();
  ex->add_option("--q", q, "Exponent of the L^q -> L^inf estimate")->capture_default_str();
  ex->add_option("--p", pp, "Exponent p of the L^1 -> L^p estimate (inf allowed)")->capture_default_str();
  ex->add_option("--q0", q0, "Initial Moser exponent")->capture_default_str();
  ex->add_flag("--json", as_json, "Emit JSON");

  auto* kn = app.add_subcommand("kernels", "Dump kernel tables as t,value CSV");
  std::string kind = "resolvent", kdir = "kernels";
  double kalpha = 0.5, knu = 0.0, kT = 1.0;
  int kn_n = 10;
  std::size_t kM = 1024;
  kn->add_option("--kind", kind, "g, pc or resolvent")->check(CLI::IsMember({"g", "pc", "resolvent"}))->capture_default_str();
  kn->add_option("--alpha", kalpha)->capture_default_str();
  kn->add_option("--nu", knu, "Tempering rate of the PC pair")->capture_default_str();
  kn->add_option("--n", kn_n, "Yosida index")->capture_default_str();
  kn->add_option("--T", kT, "Horizon")->capture_default_str();
  kn->add_option("--M", kM, "Grid intervals")->capture_default_str();
  kn->add_option("-o,--output", kdir, "Output directory")->capture_default_str();

  auto* vf = app.add_subcommand("verify", "Run a verification suite");
  std::string suite, vjson;
  std::uint64_t seed = 0;
  vf->add_option("suite", suite, "kernels, spectral, linear, nonlinear, decay or moser")
      ->required()
      ->check(CLI::IsMember(fracpm::verify::suite_names()));
  vf->add_option("--seed", seed, "Seed of randomized suites")->capture_default_str();
  vf->add_option("--json", vjson, "Write the JSON summary to this file");

  auto* ft = app.add_subcommand("fit", "Fit a decay rate to a norms CSV");
  std::string norms_path, column = "Linf";
  double t_a = 0.0, t_b = 0.0, tol = 0.15;
  std::optional<double> exponent;
  ft->add_option("norms", norms_path, "norms.csv")->required();
  ft->add_option("--column", column, "L1, L2, Lq, Linf or energy_integrand")->capture_default_str();
  ft->add_option("--t-a", t_a, "Window start (default 0.1 t_end)");
  ft->add_option("--t-b", t_b, "Window end (default t_end)");
  ft->add_option("--exponent", exponent, "Also check the envelope ‖u‖ t^exponent");
  ft->add_option("--tol", tol, "Envelope tolerance")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run) return cmd_run(config_path, output_override);
    if (*ex) return cmd_exponents(ep, dim, q, pp, q0, as_json);
    if (*kn) return cmd_kernels(kind, kalpha, knu, kn_n, kT, kM, kdir);
    if (*vf) return cmd_verify(suite, seed, vjson);
    if (*ft) return cmd_fit(norms_path, column, t_a, t_b, exponent, tol);
  } catch (const fracpm::BlowupError& e) {
    std::cerr << "error: numeric blowup: " << e.what() << '\n';
    return kNumeric;
  } catch (const fracpm::HorizonError& e) {
    std::cerr << "error: " << e.what() << " (halve the horizon)\n";
    return kNumeric;
  } catch (const fracpm::NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::invalid_argument& e) {  // DomainError, UsageError, ConfigError
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
