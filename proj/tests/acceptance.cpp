// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "avgspde/config.hpp"
#include "avgspde/kernels/kernels.hpp"
#include "avgspde/parallel.hpp"
#include "avgspde/estimators.hpp"
#include "avgspde/experiments.hpp"
#include "avgspde/statistics.hpp"

using namespace avgspde;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v{false, ""};
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!v.pass) ++failures;
  char t[32];
  std::snprintf(t, sizeof t, "%.1fs", s);
  std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << id << " " << name << ": " << v.detail << " (" << t << ")"
            << std::endl;
}

std::string fmt(double x, int digits = 5) {
  char b[64];
  std::snprintf(b, sizeof b, "%.*g", digits, x);
  return b;
}

// ---------------------------------------------------------------------------

Verdict convergence_rate() {
  const auto r = run_convergence_study(default_config("convergence"));
  const bool ok = !r.failed && r.slope >= 0.35 && r.slope <= 0.65;
  return {ok, "slope " + fmt(r.slope) + " +- " + fmt(r.slope_se, 2) + " in [0.35, 0.65], blow-ups " +
                  std::to_string(r.blowups) + "/" + std::to_string(r.runs)};
}

Verdict bifurcation() {
  const auto r = run_bifurcation_sweep(default_config("bifurcation"));
  bool amp_ok = true;
  double rms10 = NAN, rms18 = NAN, worst_low = 0.0, least_high = INFINITY;
  for (const auto& row : r.rows) {
    if (row.L <= 1.3 + 1e-12) worst_low = std::max(worst_low, row.amp_averaged);
    if (row.L >= 1.4 - 1e-12) least_high = std::min(least_high, row.amp_averaged);
    if (std::fabs(row.L - 1.0) < 1e-9) rms10 = row.rms_direct;
    if (std::fabs(row.L - 1.8) < 1e-9) rms18 = row.rms_direct;
  }
  amp_ok = worst_low <= 1e-3 && least_high >= 0.1;
  const bool rms_ok = rms10 < 0.05 && rms18 > 0.2;
  return {amp_ok && rms_ok, std::string("averaged amp max(L<=1.3) ") + fmt(worst_low, 3) + " <= 1e-3, min(L>=1.4) " +
                                fmt(least_high, 4) + " >= 0.1 [" + (amp_ok ? "ok" : "FAIL") + "]; rms(1.0) " +
                                fmt(rms10, 4) + " < 0.05 < 0.2 < rms(1.8) " + fmt(rms18, 4) + " [" +
                                (rms_ok ? "ok" : "FAIL") + "]"};
}

Verdict variance_scaling() {
  const auto r = run_variance_scaling(default_config("variance"));
  auto in = [](double b) { return b >= 0.4 && b <= 0.6; };
  const double rel = std::fabs(r.c_direct - r.c_surrogate) / std::min(r.c_direct, r.c_surrogate);
  const bool ok = in(r.beta_direct) && in(r.beta_surrogate) && rel <= 0.15;
  return {ok, "beta_direct " + fmt(r.beta_direct, 4) + ", beta_surrogate " + fmt(r.beta_surrogate, 4) +
                  " in [0.4, 0.6]; c_direct " + fmt(r.c_direct, 4) + " vs c_surrogate " + fmt(r.c_surrogate, 4) +
                  " differ " + fmt(100 * rel, 3) + "% <= 15%"};
}

Verdict deviation_variance() {
  // 16 independent paths of length 512, first fifth discarded; known zero mean
  const auto p = fhn_problem(1.0, 16, 0.1);
  const auto m = fhn_closed_model(p);
  const double T = 512.0, dt = 0.01, burn = T / 5.0;
  const std::size_t R = 16;
  std::vector<double> v(R);
  parallel_for(R, [&](std::size_t r) {
    const auto z = integrate_deviation(m, SlowPath(p.grid.zeros()), T, dt, 2024, r, 1);
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < z.size(); ++i)
      if (z.times[i] >= burn) s += z.u[i][0] * z.u[i][0], ++n;
    v[r] = s / static_cast<double>(n);
  });
  const double var = stats::mean(v);
  const double se = std::sqrt(stats::variance(v) / static_cast<double>(R));
  const double rel = std::fabs(var / 0.07356 - 1.0);
  return {rel <= 0.05, "mode-1 variance " + fmt(var) + " (SE " + fmt(se, 2) + ") vs 0.07356, off " +
                           fmt(100 * rel, 3) + "% <= 5%"};
}

Verdict mixing() {
  const auto r = run_mixing_check(default_config("mixing"));
  double worst = 0.0;
  bool bound = true;
  for (const auto& row : r.rows) {
    worst = std::max(worst, std::fabs(row.measured - row.exact));
    bound = bound && row.satisfied;
  }
  return {worst <= 1e-12 && bound, "mode 1 factor " + fmt(r.rows[0].measured, 6) + ", max |measured - exact| " +
                                       fmt(worst, 3) + " <= 1e-12, bound " + fmt(r.rows[0].bound, 6) + " " +
                                       (bound ? "holds for all " : "violated among ") + std::to_string(r.rows.size()) +
                                       " modes"};
}

Verdict fbar_oracle() {
  const EigenGrid g(1.0, 16);
  const auto q = make_covariance(CovarianceKind::ResolventPower, 1.0, g);
  const auto u = g.mode(1, 0.5);
  NoiseStream s(7, StreamRole::EstimatorNoise, 0);
  const auto est = estimate_fbar(DriftSpec::fhn_slow(), DriftSpec::fhn_fast(), u, 3.0, q, g, 5.0, 400.0, 0.01, s);
  const auto exact = fbar_closed_fhn(u, g);
  double worst = 0.0;
  for (std::size_t k = 0; k < 16; ++k) worst = std::max(worst, std::fabs(est.mean[k] - exact[k]) / est.std_error[k]);
  // published values use cos(k pi x / 2L) harmonics: phi_3 = -cos(3 pi x / 2) at L = 1
  const double m1 = est.mean[0], m3_cos = -est.mean[2];
  const bool v1 = std::fabs(m1 - 0.55045) <= 3.0 * est.std_error[0];
  const bool v3 = std::fabs(m3_cos - (-0.03125)) <= 3.0 * est.std_error[2];
  return {worst <= 3.0 && v1 && v3, "max |estimate - closed form| = " + fmt(worst, 3) + " SE <= 3; mode 1 " +
                                        fmt(m1, 6) + " vs 0.55045, mode 3 " + fmt(m3_cos, 6) + " vs -0.03125 (SE " +
                                        fmt(est.std_error[0], 2) + ", " + fmt(est.std_error[2], 2) + ")"};
}

Verdict b_oracle() {
  const EigenGrid g(1.0, 16);
  const auto q = make_covariance(CovarianceKind::ResolventPower, 1.0, g);
  BEstimateSettings st;
  st.replicas = 128;
  const auto b = estimate_B(DriftSpec::fhn_slow(), DriftSpec::fhn_fast(), g.zeros(), 3.0, q, g, st, 314);
  const double rel = std::fabs(b.at(0, 0) / 0.21589 - 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < b.n; ++i)
    for (std::size_t j = 0; j < b.n; ++j)
      if (i != j) worst = std::max(worst, std::fabs(b.at(i, j)) / b.se(i, j));
  return {rel <= 0.10 && worst <= 3.0, "B_11 " + fmt(b.at(0, 0)) + " (SE " + fmt(b.se(0, 0), 2) + ") vs 0.21589, off " +
                                           fmt(100 * rel, 3) + "% <= 10%; max |off-diagonal|/SE " + fmt(worst, 3) +
                                           " <= 3; lags " + std::to_string(b.lags_used)};
}

Verdict gaussianity() {
  const auto r = run_gaussianity_check(default_config("gaussianity"));
  bool ok = true;
  std::string d;
  for (const auto& row : r.rows) {
    ok = ok && !row.degenerate && row.p_value > 0.01;
    d += (d.empty() ? "" : "; ") + row.source + " KS p " + fmt(row.p_value, 3) + " > 0.01 (var " +
         fmt(row.sample_variance, 4) + ", v* " + fmt(row.oracle_variance, 4) + ")";
  }
  return {ok, d + ", " + std::to_string(r.rows.front().replicas) + " replicas, eps 0.05"};
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    files[e.path().filename().string()] = s.str();
  }
  return files;
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "avg_spde_acceptance";
  fs::remove_all(root);
  std::string differing, errors;
  std::size_t same = 0;
  for (const auto& sub : subcommands()) {
    for (const char* run : {"a", "b"}) {
      const std::string cmd = std::string(AVG_SPDE_EXE) + " " + sub + " --seed 42 --plot --out " +
                              (root / sub / run).string() + " > /dev/null 2>&1";
      const int rc = std::system(cmd.c_str());
      if (rc != 0) errors += " " + sub + "(rc " + std::to_string(rc) + ")";
    }
    const auto a = read_dir(root / sub / "a"), b = read_dir(root / sub / "b");
    std::string diff;
    for (const auto& [name, content] : a) {
      auto it = b.find(name);
      if (it == b.end() || it->second != content) diff += (diff.empty() ? "" : ",") + name;
    }
    if (a.size() != b.size()) diff += (diff.empty() ? "" : ",") + std::string("file set");
    if (diff.empty()) ++same;
    else differing += " " + sub + "[" + diff + "]";
  }
  const bool ok = differing.empty() && errors.empty();
  std::string d = std::to_string(same) + "/" + std::to_string(subcommands().size()) +
                  " subcommands byte-identical across reruns (CSV, SVG, manifest)";
  if (!differing.empty()) d += "; differ:" + differing;
  if (!errors.empty()) d += "; failed runs:" + errors;
  return {ok, d};
}

Verdict property_suite() {
  std::string d;
  bool ok = true;
  auto note = [&](bool pass, const std::string& what) {
    ok = ok && pass;
    d += (d.empty() ? "" : "; ") + what + (pass ? "" : " [FAIL]");
  };

  // transform round trip and semigroup composition
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  double rt = 0.0, sg = 0.0;
  for (std::size_t n : {4u, 16u, 63u}) {
    const EigenGrid g(1.7, n);
    SpectralField f(n);
    for (std::size_t k = 0; k < n; ++k) f[k] = nd(rng);
    const auto back = from_physical(to_physical(f, g), g);
    const auto pb = from_padded_physical(to_padded_physical(f, g), g);
    const auto s1 = apply_diagonal(apply_diagonal(f, multiplier::Semigroup{0.21}, g), multiplier::Semigroup{0.05}, g);
    const auto s2 = apply_diagonal(f, multiplier::Semigroup{0.26}, g);
    for (std::size_t k = 0; k < n; ++k) {
      rt = std::max({rt, std::fabs(back[k] - f[k]), std::fabs(pb[k] - f[k])});
      sg = std::max(sg, std::fabs(s1[k] - s2[k]));
    }
  }
  note(rt <= 1e-12, "round trip " + fmt(rt, 2));
  note(sg <= 1e-12, "semigroup " + fmt(sg, 2));

  // exact fast stepper keeps the stationary law (first two moments, 2%)
  {
    const EigenGrid g(1.0, 4);
    const auto q = make_covariance(CovarianceKind::ResolventPower, 1.0, g);
    const auto u = g.mode(1, 0.3);
    FastExactStepper st(g, 0.05, 0.1, 3.0, q);
    NoiseStream init(3, StreamRole::EstimatorNoise, 0), s(3, StreamRole::FastNoise, 0);
    const std::size_t n = 400000;
    std::vector<double> m(4, 0.0), m2(4, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto v = sample_stationary_linear(u, 3.0, q, g, init);
      st.step(v, u, s);
      for (std::size_t k = 0; k < 4; ++k) m[k] += v[k], m2[k] += v[k] * v[k];
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      const double lam = g.eigenvalues()[k];
      const double var = 9.0 * q.mode_variances[k] / (2.0 * (1.0 + lam));
      const double em = m[k] / n, ev = m2[k] / n - em * em;
      worst = std::max({worst, std::fabs(em - u[k] / (1.0 + lam)) / std::sqrt(var), std::fabs(ev / var - 1.0)});
    }
    note(worst <= 0.02, "stationarity " + fmt(100 * worst, 2) + "%");
  }

  // weak consistency order from dt halving
  {
    auto p = fhn_problem(1.0, 4, 1.0, 0.0, 0.5, 1.0);
    p.u0 = p.grid.mode(1, 0.5);
    const std::size_t R = 20000;
    auto mean_at = [&](double dt) {
      std::vector<double> x(R);
      parallel_for(R, [&](std::size_t r) { x[r] = integrate_slow_fast(p, 1.0, dt, 17, r, {1000000}).u.back()[0]; });
      return stats::mean(x);
    };
    const double ref = mean_at(0.0125);
    std::vector<double> lx, ly;
    for (double dt : {0.2, 0.1, 0.05}) {
      lx.push_back(std::log(dt));
      ly.push_back(std::log(std::fabs(mean_at(dt) - ref)));
    }
    const double order = stats::linear_fit(lx, ly).slope;
    note(order >= 0.8, "weak order " + fmt(order, 3));
  }

  // H4 flags
  {
    const EigenGrid g(1.0, 64);
    const bool p1 = trace_report(make_covariance(CovarianceKind::ResolventPower, 1.0, g), g).h4_satisfied;
    const bool p2 = trace_report(make_covariance(CovarianceKind::ResolventPower, 2.0, g), g).h4_satisfied;
    const bool cy = trace_report(make_covariance(CovarianceKind::Cylindrical, 0.0, g), g).h4_satisfied;
    note(!p1 && p2 && !cy, std::string("H4 p=1 ") + (p1 ? "pass" : "warn") + ", p=2 " + (p2 ? "pass" : "warn") +
                               ", cylindrical " + (cy ? "pass" : "warn"));
  }
  return {ok, d};
}

}  // namespace

int main() {
  std::cout << "acceptance suite (kernels: " << kernels::active().name << ", workers: " << worker_count() << ")"
            << std::endl;
  report(1, "convergence rate", convergence_rate);
  report(2, "bifurcation", bifurcation);
  report(3, "variance scaling", variance_scaling);
  report(4, "deviation stationary variance", deviation_variance);
  report(5, "mixing contraction", mixing);
  report(6, "averaged drift oracle", fbar_oracle);
  report(7, "deviation covariance oracle", b_oracle);
  report(8, "gaussianity", gaussianity);
  report(9, "determinism", determinism);
  report(10, "property suite", property_suite);
  std::cout << (10 - failures) << "/10 criteria passed" << std::endl;
  return failures;
}
