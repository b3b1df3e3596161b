// avg_spde: experiment driver for the slow-fast FitzHugh-Nagumo toolkit.
//
//   avg_spde <subcommand> [--config PATH] [--seed U64] [--out DIR] [--plot]
//            [--check] [--replicas N] [--timestamps] [--KEY VALUE ...]
//
// Exit codes: 0 ok, 2 invalid input, 3 blow-up dominated run, 4 --check failed.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <iostream>
#include <map>
#include <optional>

#include "avgspde/config.hpp"
#include "avgspde/errors.hpp"
#include "avgspde/experiments.hpp"
#include "avgspde/kernels/kernels.hpp"
#include "avgspde/report_io.hpp"
#include "avgspde/svg.hpp"

#ifndef AVGSPDE_VERSION
#define AVGSPDE_VERSION "0.0.0"
#endif

using namespace avgspde;
using json = nlohmann::ordered_json;

namespace {

constexpr int kOk = 0, kInvalid = 2, kBlowUp = 3, kCheckFailed = 4;

struct RunOptions {
  std::string config_path;
  std::string out_dir;
  bool plot = false;
  bool check = false;
  bool timestamps = false;
};

struct Outcome {
  std::vector<io::OutputFile> files;
  std::vector<std::string> warnings;
  json summary = json::object();
  int status = kOk;
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// JSON has no NaN; non-finite summary values become null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void fail_check(Outcome& o, const std::string& what) {
  std::cerr << "check failed: " << what << "\n";
  o.status = kCheckFailed;
}

Outcome run_trajectory(const ExperimentConfig& cfg, const RunOptions& ro) {
  Outcome o;
  Trajectory tr;
  std::string title;
  if (cfg.subcommand == "simulate") {
    tr = run_simulation(cfg);
    title = "slow-fast realisation (eps = " + format_shortest(cfg.epsilon) + ")";
  } else if (cfg.subcommand == "average") {
    tr = run_averaged(cfg);
    title = "averaged equation (L = " + format_shortest(cfg.L) + ")";
  } else {
    tr = run_deviation(cfg);
    title = "deviation process z";
  }
  o.warnings = make_meta(cfg, {cfg.L}).audit_warnings;
  o.files.push_back({"trajectory.csv", io::trajectory_csv(tr, cfg.coeffs)});
  if (ro.plot) o.files.push_back({"trajectory.svg", svg::trajectory_plot(tr, title)});
  o.summary["records"] = tr.size();
  o.summary["final_u_mid"] = number(tr.u_mid.empty() ? NAN : tr.u_mid.back());
  std::cout << cfg.subcommand << ": " << tr.size() << " records, final u(0) = "
            << io::format_double(tr.u_mid.back()) << "\n";
  return o;
}

Outcome run_convergence(const ExperimentConfig& cfg, const RunOptions& ro) {
  Outcome o;
  const auto r = run_convergence_study(cfg);
  o.warnings = r.meta.audit_warnings;
  o.files.push_back({"convergence.csv", io::convergence_csv(r)});
  if (ro.plot) o.files.push_back({"convergence.svg", svg::convergence_plot(r)});
  o.summary["slope"] = number(r.slope);
  o.summary["slope_se"] = number(r.slope_se);
  o.summary["slope_ci"] = {number(r.slope_ci_low), number(r.slope_ci_high)};
  o.summary["ci_level"] = r.ci_level;
  o.summary["fitted_constant"] = number(r.fitted_constant);
  o.summary["kappa"] = r.kappa;
  o.summary["quantile_constant"] = number(r.quantile_constant);
  json med = json::array();
  for (double m : r.median_error) med.push_back(number(m));
  o.summary["median_sup_error"] = med;
  o.summary["blowups"] = r.blowups;
  o.summary["runs"] = r.runs;
  std::cout << "convergence: slope " << io::format_double(r.slope) << " +- " << io::format_double(r.slope_se)
            << ", blow-ups " << r.blowups << "/" << r.runs << "\n";
  if (r.failed) {
    std::cerr << "convergence: more than 5% of runs blew up\n";
    o.status = kBlowUp;
  } else if (ro.check && !(r.slope >= 0.35 && r.slope <= 0.65)) {
    fail_check(o, "slope " + io::format_double(r.slope) + " outside [0.35, 0.65]");
  }
  return o;
}

Outcome run_bifurcation(const ExperimentConfig& cfg, const RunOptions& ro) {
  Outcome o;
  const auto r = run_bifurcation_sweep(cfg);
  o.warnings = r.meta.audit_warnings;
  o.files.push_back({"bifurcation.csv", io::bifurcation_csv(r)});
  if (ro.plot) o.files.push_back({"bifurcation.svg", svg::bifurcation_plot(r)});
  o.summary["threshold"] = r.threshold;
  std::size_t blown = 0;
  for (const auto& row : r.rows) blown += row.blew_up;
  o.summary["rows_blown_up"] = blown;
  std::optional<double> last_zero, first_branch;
  bool ok = true;
  for (const auto& row : r.rows) {
    if (row.L <= 1.3 + 1e-12) {
      ok = ok && row.amp_averaged <= 1e-3;
      last_zero = row.L;
    } else if (row.L >= 1.4 - 1e-12) {
      ok = ok && row.amp_averaged >= 0.1;
      if (!first_branch) first_branch = row.L;
    }
  }
  ok = ok && last_zero && first_branch && *last_zero < r.threshold && r.threshold < *first_branch;
  o.summary["brackets_threshold"] = ok;
  std::cout << "bifurcation: " << r.rows.size() << " rows, threshold " << io::format_double(r.threshold)
            << (ok ? " bracketed" : " not bracketed") << "\n";
  if (blown == r.rows.size()) o.status = kBlowUp;
  else if (ro.check && !ok) fail_check(o, "averaged amplitudes do not bracket the threshold");
  return o;
}

Outcome run_variance(const ExperimentConfig& cfg, const RunOptions& ro) {
  Outcome o;
  const auto r = run_variance_scaling(cfg);
  o.warnings = r.meta.audit_warnings;
  o.files.push_back({"variance.csv", io::variance_csv(r)});
  if (ro.plot) o.files.push_back({"variance.svg", svg::variance_plot(r)});
  o.summary["c_direct"] = number(r.c_direct);
  o.summary["beta_direct"] = number(r.beta_direct);
  o.summary["c_surrogate"] = number(r.c_surrogate);
  o.summary["beta_surrogate"] = number(r.beta_surrogate);
  o.summary["c_direct_half"] = number(r.c_direct_half);
  o.summary["c_surrogate_half"] = number(r.c_surrogate_half);
  o.summary["blowups"] = r.blowups;
  std::cout << "variance: direct std = " << io::format_double(r.c_direct) << " eps^"
            << io::format_double(r.beta_direct) << ", surrogate std = " << io::format_double(r.c_surrogate)
            << " eps^" << io::format_double(r.beta_surrogate) << "\n";
  if (ro.check) {
    auto in = [](double b) { return b >= 0.4 && b <= 0.6; };
    const double rel = std::fabs(r.c_direct - r.c_surrogate) / std::min(r.c_direct, r.c_surrogate);
    if (!in(r.beta_direct) || !in(r.beta_surrogate)) fail_check(o, "fitted exponent outside [0.4, 0.6]");
    else if (!(rel <= 0.15)) fail_check(o, "coefficients differ by " + io::format_double(rel));
  }
  return o;
}

Outcome run_mixing(const ExperimentConfig& cfg, const RunOptions& ro) {
  Outcome o;
  const auto r = run_mixing_check(cfg);
  o.warnings = r.meta.audit_warnings;
  o.files.push_back({"mixing.csv", io::mixing_csv(r)});
  if (ro.plot) o.files.push_back({"mixing.svg", svg::mixing_plot(r)});
  bool all = true;
  double worst = 0.0;
  for (const auto& row : r.rows) {
    all = all && row.satisfied;
    worst = std::max(worst, std::fabs(row.measured - row.exact));
  }
  o.summary["all_satisfied"] = all;
  o.summary["max_abs_deviation"] = worst;
  std::cout << "mixing: " << r.rows.size() << " modes, bound " << (all ? "satisfied" : "violated")
            << ", max |measured - exact| = " << io::format_double(worst) << "\n";
  if (ro.check && (!all || worst > 1e-12)) fail_check(o, "contraction check");
  return o;
}

Outcome run_benchmark(const ExperimentConfig& cfg, const RunOptions& ro) {
  Outcome o;
  const auto r = run_speedup_benchmark(cfg);
  o.warnings = r.meta.audit_warnings;
  o.files.push_back({"bench.csv", io::bench_csv(r)});
  if (ro.plot) o.files.push_back({"bench.svg", svg::bench_plot(r)});
  json steps = json::array();
  for (const auto& row : r.rows)
    steps.push_back({{"epsilon", row.epsilon}, {"direct_steps", row.direct_steps},
                     {"surrogate_steps", row.surrogate_steps}});
  o.summary["steps"] = steps;
  for (const auto& row : r.rows)
    std::cout << "benchmark: eps " << format_shortest(row.epsilon) << " direct " << row.t_direct_s << " s, surrogate "
              << row.t_surrogate_s << " s, ratio " << row.ratio << "\n";
  return o;
}

Outcome run_gaussianity(const ExperimentConfig& cfg, const RunOptions& ro) {
  Outcome o;
  const auto r = run_gaussianity_check(cfg);
  o.warnings = r.meta.audit_warnings;
  o.files.push_back({"gaussianity.csv", io::gaussianity_csv(r)});
  if (ro.plot) o.files.push_back({"gaussianity.svg", svg::gaussianity_plot(r)});
  bool ok = true;
  for (const auto& row : r.rows) {
    o.summary[row.source + "_p_value"] = number(row.p_value);
    std::cout << "gaussianity: " << row.source << " var " << io::format_double(row.sample_variance) << " (oracle "
              << io::format_double(row.oracle_variance) << "), KS p = " << io::format_double(row.p_value)
              << (row.degenerate ? " [degenerate]" : "") << "\n";
    if (!row.degenerate) ok = ok && row.p_value > 0.01;
  }
  if (ro.check && !ok) fail_check(o, "KS p-value <= 0.01");
  return o;
}

Outcome run_audit(const ExperimentConfig& cfg, const RunOptions&) {
  Outcome o;
  const auto r = hypothesis_audit(problem_from_config(cfg));
  o.warnings = r.warnings();
  o.files.push_back({"audit.csv", io::audit_csv(r)});
  o.summary["all_pass"] = r.all_pass();
  o.summary["fitted_abc"] = {r.fitted_a, r.fitted_b, r.fitted_c};
  for (const auto& w : o.warnings) std::cerr << w << "\n";
  std::cout << "audit: " << r.items.size() << " checks, " << o.warnings.size() << " warnings\n";
  return o;
}

int dispatch(const ExperimentConfig& cfg, const RunOptions& ro) {
  const std::string started = ro.timestamps ? utc_now() : "";
  Outcome o;
  try {
    const auto& s = cfg.subcommand;
    if (s == "simulate" || s == "average" || s == "deviation") o = run_trajectory(cfg, ro);
    else if (s == "convergence") o = run_convergence(cfg, ro);
    else if (s == "bifurcation") o = run_bifurcation(cfg, ro);
    else if (s == "variance") o = run_variance(cfg, ro);
    else if (s == "mixing") o = run_mixing(cfg, ro);
    else if (s == "benchmark") o = run_benchmark(cfg, ro);
    else if (s == "gaussianity") o = run_gaussianity(cfg, ro);
    else o = run_audit(cfg, ro);
  } catch (const BlowUpError& e) {
    std::cerr << cfg.subcommand << ": " << e.what() << "\n";
    return kBlowUp;
  } catch (const std::invalid_argument& e) {
    std::cerr << cfg.subcommand << ": " << e.what() << "\n";
    return kInvalid;
  } catch (const std::logic_error& e) {
    std::cerr << cfg.subcommand << ": " << e.what() << "\n";
    return kInvalid;
  }

  io::RunManifest m;
  m.subcommand = cfg.subcommand;
  m.config = cfg;
  m.version = AVGSPDE_VERSION;
  m.kernel = std::string(kernels::active().name);
  m.audit_warnings = o.warnings;
  m.summary = o.summary;
  m.exit_status = o.status;
  if (ro.timestamps) m.timestamps = std::make_pair(started, utc_now());
  const std::string dir = ro.out_dir.empty() ? "avg_spde_out/" + cfg.subcommand : ro.out_dir;
  try {
    io::write_outputs(dir, o.files, m);
  } catch (const std::exception& e) {
    std::cerr << "cannot write outputs: " << e.what() << "\n";
    return kInvalid;
  }
  return o.status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slow-fast stochastic reaction-diffusion: averaging and deviation experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", AVGSPDE_VERSION);

  RunOptions ro;
  std::map<std::string, std::map<std::string, std::string>> overrides;
  for (const auto& sub : subcommands()) {
    CLI::App* sc = app.add_subcommand(sub, "run the " + sub + " study");
    sc->add_option("--config", ro.config_path, "key=value config file or a run manifest");
    sc->add_option("--out", ro.out_dir, "output directory (default avg_spde_out/<subcommand>)");
    sc->add_flag("--plot", ro.plot, "also write SVG plots");
    sc->add_flag("--check", ro.check, "exit 4 when the study's acceptance threshold fails");
    sc->add_flag("--timestamps", ro.timestamps, "record wall-clock timestamps in the manifest");
    for (const auto& key : config_keys()) {
      sc->add_option_function<std::string>(
          "--" + key, [&overrides, sub, key](const std::string& v) { overrides[sub][key] = v; },
          "override config key " + key);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kInvalid;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  const std::string sub = chosen->get_name();
  std::vector<std::pair<std::string, std::string>> ov(overrides[sub].begin(), overrides[sub].end());
  ExperimentConfig cfg;
  try {
    cfg = parse_config(ro.config_path, sub, ov);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kInvalid;
  }
  return dispatch(cfg, ro);
}
