#include "avgspde/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include "avgspde/errors.hpp"
#include "avgspde/parallel.hpp"
#include "avgspde/statistics.hpp"

#ifndef AVGSPDE_VERSION
#define AVGSPDE_VERSION "0.0.0"
#endif

namespace avgspde {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

CovarianceSpec covariance(const std::string& kind, double power, const EigenGrid& grid) {
  return kind == "cylindrical" ? make_covariance(CovarianceKind::Cylindrical, 0.0, grid)
                               : make_covariance(CovarianceKind::ResolventPower, power, grid);
}

FastScheme scheme_of(const std::string& s) {
  if (s == "exact") return FastScheme::Exact;
  if (s == "general") return FastScheme::General;
  return FastScheme::Auto;
}

std::vector<double> mid_values(const Trajectory& tr, double from_time) {
  std::vector<double> out;
  for (std::size_t i = 0; i < tr.size(); ++i)
    if (tr.times[i] >= from_time - 1e-12) out.push_back(tr.u_mid[i]);
  return out;
}

Trajectory averaged_path(const AveragedModel& m, const SpectralField& u0, double T, double dt, std::uint64_t seed,
                         std::uint64_t replica) {
  return integrate_averaged(m, u0, T, dt, seed, replica, 1);
}

}  // namespace

SlowFastProblem problem_from_config(const ExperimentConfig& cfg, double L, double epsilon) {
  SlowFastProblem p{EigenGrid(L, cfg.N),
                    parse_drift(cfg.f),
                    parse_drift(cfg.g),
                    cfg.sigma1,
                    cfg.sigma2,
                    epsilon,
                    {},
                    {},
                    {},
                    {},
                    {}};
  p.Q1 = covariance(cfg.q1_kind, cfg.q1_power, p.grid);
  p.Q2 = covariance(cfg.q2_kind, cfg.q2_power, p.grid);
  p.u0 = p.grid.mode(cfg.u0_mode, cfg.u0_amp);
  p.v0 = p.grid.zeros();
  p.validate();
  return p;
}

SlowFastOptions options_from_config(const ExperimentConfig& cfg) {
  SlowFastOptions o;
  o.output_stride = cfg.stride;
  o.scheme = scheme_of(cfg.scheme);
  o.fast_init = cfg.v0 == "stationary" ? FastInit::Stationary : FastInit::AsGiven;
  return o;
}

ReportMeta make_meta(const ExperimentConfig& cfg, const std::vector<double>& L_values) {
  ReportMeta m{config_hash(cfg), cfg.seed, AVGSPDE_VERSION, {}};
  for (double L : L_values) {
    const auto warnings = hypothesis_audit(problem_from_config(cfg, L, cfg.epsilon)).warnings();
    for (const auto& w : warnings)
      m.audit_warnings.push_back(L_values.size() > 1 ? "L=" + format_shortest(L) + ": " + w : w);
  }
  return m;
}

Trajectory run_simulation(const ExperimentConfig& cfg) {
  return integrate_slow_fast(problem_from_config(cfg), cfg.T, cfg.dt, cfg.seed, 0, options_from_config(cfg));
}

Trajectory run_averaged(const ExperimentConfig& cfg) {
  const auto p = problem_from_config(cfg);
  return integrate_averaged(averaged_model_for(p, cfg.seed), p.u0, cfg.T, cfg.dt, cfg.seed, 0, cfg.stride);
}

Trajectory run_deviation(const ExperimentConfig& cfg) {
  const auto p = problem_from_config(cfg);
  const auto m = averaged_model_for(p, cfg.seed);
  const Trajectory path = averaged_path(m, p.u0, cfg.T, cfg.dt, cfg.seed, 0);
  return integrate_deviation(m, SlowPath(path), cfg.T, cfg.dt, cfg.seed, 0, cfg.stride);
}

// ---------------------------------------------------------------------------

ConvergenceReport run_convergence_study(const ExperimentConfig& cfg) {
  const auto& eps = cfg.epsilons;
  if (eps.size() < 4) throw ParameterError("convergence: epsilons needs at least 4 values");
  const auto [lo, hi] = std::minmax_element(eps.begin(), eps.end());
  if (*hi / *lo < 10.0 * (1.0 - 1e-12)) throw ParameterError("convergence: epsilons must span at least one decade");

  ConvergenceReport rep;
  rep.meta = make_meta(cfg, {cfg.L});
  rep.epsilons = eps;
  rep.kappa = cfg.kappa;
  const std::size_t R = cfg.replicas;
  const auto opt = options_from_config(cfg);

  // The averaged model does not involve epsilon; with sigma1 = 0 its path is
  // shared by every replica.
  const auto base = problem_from_config(cfg, cfg.L, eps.front());
  const auto model = averaged_model_for(base, cfg.seed);
  const bool shared = cfg.sigma1 == 0.0;
  std::optional<Trajectory> shared_path;
  if (shared) shared_path = integrate_averaged(model, base.u0, cfg.T, cfg.dt, cfg.seed, 0, cfg.stride);

  rep.rows.resize(eps.size() * R);
  parallel_for(rep.rows.size(), [&](std::size_t idx) {
    const std::size_t e = idx / R, r = idx % R;
    ConvergenceRow& row = rep.rows[idx];
    row.epsilon = eps[e];
    row.replica = r;
    try {
      const auto p = problem_from_config(cfg, cfg.L, eps[e]);
      const Trajectory direct = integrate_slow_fast(p, cfg.T, cfg.dt, cfg.seed, r, opt);
      const Trajectory avg =
          shared ? *shared_path : integrate_averaged(model, p.u0, cfg.T, cfg.dt, cfg.seed, r, cfg.stride);
      if (direct.size() != avg.size()) throw ParameterError("convergence: recorded grids differ");
      double sup = 0.0;
      for (std::size_t i = 0; i < direct.size(); ++i) sup = std::max(sup, h_norm(direct.u[i] - avg.u[i]));
      row.sup_error = sup;
    } catch (const BlowUpError&) {
      row.sup_error = kNaN;
    }
  });

  rep.runs = rep.rows.size();
  std::vector<double> ratios;
  for (std::size_t e = 0; e < eps.size(); ++e) {
    std::vector<double> ok;
    for (std::size_t r = 0; r < R; ++r) {
      const double s = rep.rows[e * R + r].sup_error;
      if (std::isnan(s)) {
        ++rep.blowups;
      } else {
        ok.push_back(s);
        ratios.push_back(s / std::sqrt(eps[e]));
      }
    }
    rep.median_error.push_back(ok.empty() ? kNaN : stats::median(ok));
  }
  rep.failed = static_cast<double>(rep.blowups) > 0.05 * static_cast<double>(rep.runs);

  std::vector<double> lx, ly;
  for (std::size_t e = 0; e < eps.size(); ++e)
    if (rep.median_error[e] > 0.0) {
      lx.push_back(std::log(eps[e]));
      ly.push_back(std::log(rep.median_error[e]));
    }
  if (lx.size() >= 2) {
    const auto fit = stats::linear_fit(lx, ly);
    rep.slope = fit.slope;
    rep.slope_se = fit.slope_se;
    const double t = stats::t_critical(1.0 - rep.ci_level, static_cast<double>(lx.size()) - 2.0);
    rep.slope_ci_low = fit.slope - t * fit.slope_se;
    rep.slope_ci_high = fit.slope + t * fit.slope_se;
    rep.fitted_constant = std::exp(fit.intercept);
  } else {
    rep.slope = rep.slope_se = rep.slope_ci_low = rep.slope_ci_high = rep.fitted_constant = kNaN;
  }
  rep.quantile_constant = ratios.empty() ? kNaN : stats::quantile(ratios, 1.0 - cfg.kappa);
  return rep;
}

// ---------------------------------------------------------------------------

BifurcationReport run_bifurcation_sweep(const ExperimentConfig& cfg) {
  BifurcationReport rep;
  rep.meta = make_meta(cfg, cfg.L_grid);
  rep.epsilon = cfg.epsilon;
  rep.threshold = M_PI / std::pow(2.0, 1.25);
  const auto opt = options_from_config(cfg);
  const std::size_t R = cfg.replicas;
  const std::size_t nL = cfg.L_grid.size();

  // direct runs are the expensive part: spread (L, replica) over workers
  std::vector<double> mean_square(nL * R, kNaN);
  std::vector<double> amp(nL, kNaN);
  parallel_for(nL * R + nL, [&](std::size_t idx) {
    if (idx < nL * R) {
      const std::size_t l = idx / R, r = idx % R;
      try {
        const auto p = problem_from_config(cfg, cfg.L_grid[l], cfg.epsilon);
        const auto tr = integrate_slow_fast(p, cfg.T, cfg.dt, cfg.seed, r, opt);
        const auto mids = mid_values(tr, cfg.t_burn);
        double s = 0.0;
        for (double x : mids) s += x * x;
        mean_square[idx] = s / static_cast<double>(mids.size());
      } catch (const BlowUpError&) {
      }
    } else {
      const std::size_t l = idx - nL * R;
      try {
        const auto p = problem_from_config(cfg, cfg.L_grid[l], cfg.epsilon);
        const auto m = averaged_model_for(p, cfg.seed);
        const auto tr = integrate_averaged(m, p.u0, cfg.T, cfg.dt, cfg.seed, 0, cfg.stride);
        amp[l] = std::fabs(tr.u_mid.back());
      } catch (const BlowUpError&) {
      }
    }
  });

  for (std::size_t l = 0; l < nL; ++l) {
    BifurcationRow row{cfg.L_grid[l], 0.0, amp[l], std::isnan(amp[l])};
    double s = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      s += mean_square[l * R + r];
      row.blew_up = row.blew_up || std::isnan(mean_square[l * R + r]);
    }
    row.rms_direct = std::sqrt(s / static_cast<double>(R));
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------

ScalingReport run_variance_scaling(const ExperimentConfig& cfg) {
  ScalingReport rep;
  rep.meta = make_meta(cfg, {cfg.L});
  const auto& eps = cfg.epsilons;
  const std::size_t R = cfg.replicas;
  const auto opt = options_from_config(cfg);
  const auto base = problem_from_config(cfg, cfg.L, eps.front());
  const auto model = averaged_model_for(base, cfg.seed);

  std::vector<double> vd(eps.size() * R, kNaN), vs(eps.size() * R, kNaN);
  parallel_for(2 * eps.size() * R, [&](std::size_t job) {
    const bool surrogate = job >= eps.size() * R;
    const std::size_t idx = surrogate ? job - eps.size() * R : job;
    const std::size_t e = idx / R;
    try {
      if (!surrogate) {
        const auto p = problem_from_config(cfg, cfg.L, eps[e]);
        const auto tr = integrate_slow_fast(p, cfg.T, cfg.dt, cfg.seed, idx, opt);
        vd[idx] = stats::variance(mid_values(tr, cfg.t_burn));
      } else {
        const Trajectory path = averaged_path(model, base.u0, cfg.T, cfg.dt_surrogate, cfg.seed, idx);
        const auto z = integrate_deviation(model, SlowPath(path), cfg.T, cfg.dt_surrogate, cfg.seed, idx, 1);
        vs[idx] = eps[e] * stats::variance(mid_values(z, cfg.t_burn));
      }
    } catch (const BlowUpError&) {
    }
  });

  std::vector<double> le, ld, ls;
  for (std::size_t e = 0; e < eps.size(); ++e) {
    double sd = 0.0, ss = 0.0;
    std::size_t nd = 0, ns = 0;
    for (std::size_t r = 0; r < R; ++r) {
      const double a = vd[e * R + r], b = vs[e * R + r];
      if (std::isnan(a)) ++rep.blowups; else { sd += a; ++nd; }
      if (std::isnan(b)) ++rep.blowups; else { ss += b; ++ns; }
    }
    ScalingRow row{eps[e], nd ? sd / static_cast<double>(nd) : kNaN, ns ? ss / static_cast<double>(ns) : kNaN};
    rep.rows.push_back(row);
    if (row.var_direct > 0.0 && row.var_surrogate > 0.0) {
      le.push_back(std::log(eps[e]));
      ld.push_back(0.5 * std::log(row.var_direct));
      ls.push_back(0.5 * std::log(row.var_surrogate));
    }
  }
  auto fit_pair = [&](const std::vector<double>& y, double& c, double& beta, double& c_half) {
    if (le.size() < 2) {
      c = beta = c_half = kNaN;
      return;
    }
    const auto f = stats::linear_fit(le, y);
    c = std::exp(f.intercept);
    beta = f.slope;
    double s = 0.0;
    for (std::size_t i = 0; i < le.size(); ++i) s += y[i] - 0.5 * le[i];
    c_half = std::exp(s / static_cast<double>(le.size()));
  };
  fit_pair(ld, rep.c_direct, rep.beta_direct, rep.c_direct_half);
  fit_pair(ls, rep.c_surrogate, rep.beta_surrogate, rep.c_surrogate_half);
  return rep;
}

// ---------------------------------------------------------------------------

MixingReport run_mixing_check(const ExperimentConfig& cfg) {
  MixingReport rep;
  rep.meta = make_meta(cfg, {cfg.L});
  const auto p = problem_from_config(cfg);
  if (!p.g.is_affine()) throw UnsupportedFormError("mixing check needs a fast drift linear in (u, v)");
  double c_y = 0.0;
  for (const auto& t : p.g.terms())
    if (t.px == 0 && t.py == 1) c_y = t.coef;
  const auto& grid = p.grid;
  const bool exact = scheme_of(cfg.scheme) != FastScheme::General && p.g.is_unit_linear_relaxation();
  const double bound = std::exp(-(grid.lambda1() - p.constants.C_g) * cfg.dt / p.epsilon);

  for (std::size_t k = 1; k <= grid.n_modes(); ++k) {
    SpectralField va = p.v0, vb = p.v0 + grid.mode(k, 1.0);
    NoiseStream sa = derive_stream(cfg.seed, StreamRole::FastNoise, 0);
    NoiseStream sb = derive_stream(cfg.seed, StreamRole::FastNoise, 0);
    if (exact) {
      FastExactStepper st(grid, cfg.dt, p.epsilon, p.sigma2, p.Q2);
      st.step(va, p.u0, sa);
      st.step(vb, p.u0, sb);
    } else {
      FastGeneralStepper st(grid, cfg.dt, p.epsilon, p.sigma2, p.Q2, p.g);
      st.step(va, p.u0, sa);
      st.step(vb, p.u0, sb);
    }
    MixingRow row;
    row.mode = k;
    row.measured = vb[k - 1] - va[k - 1];
    row.exact = std::exp(-(grid.eigenvalues()[k - 1] - c_y) * cfg.dt / p.epsilon);
    row.bound = bound;
    row.satisfied = row.measured <= bound;
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------

BenchReport run_speedup_benchmark(const ExperimentConfig& cfg) {
  using clock = std::chrono::steady_clock;
  BenchReport rep;
  rep.meta = make_meta(cfg, {cfg.L});
  const auto opt = options_from_config(cfg);
  const auto base = problem_from_config(cfg, cfg.L, cfg.epsilons.front());
  const auto model = averaged_model_for(base, cfg.seed);
  auto seconds = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };

  // timings are medians over `replicas` repeats, run one at a time
  for (double eps : cfg.epsilons) {
    const auto p = problem_from_config(cfg, cfg.L, eps);
    std::vector<double> td, ts;
    for (std::size_t r = 0; r < cfg.replicas; ++r) {
      const auto t0 = clock::now();
      integrate_slow_fast(p, cfg.T, cfg.dt, cfg.seed, r, opt);
      const auto t1 = clock::now();
      const Trajectory path = averaged_path(model, p.u0, cfg.T, cfg.dt_surrogate, cfg.seed, r);
      integrate_deviation(model, SlowPath(path), cfg.T, cfg.dt_surrogate, cfg.seed, r, cfg.stride);
      const auto t2 = clock::now();
      td.push_back(seconds(t0, t1));
      ts.push_back(seconds(t1, t2));
    }
    BenchRow row;
    row.epsilon = eps;
    row.t_direct_s = stats::median(td);
    row.t_surrogate_s = stats::median(ts);
    row.ratio = row.t_direct_s / row.t_surrogate_s;
    const bool exact = opt.scheme == FastScheme::Exact ||
                       (opt.scheme == FastScheme::Auto && p.g.is_unit_linear_relaxation());
    row.direct_steps = step_count(cfg.T, cfg.dt) * (exact ? 1 : fast_substep_count(cfg.dt, eps));
    row.surrogate_steps = 2 * step_count(cfg.T, cfg.dt_surrogate);
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------

double deviation_lyapunov_variance(const AveragedModel& m, const SpectralField& u, double T) {
  const EigenGrid& grid = m.grid;
  const std::size_t n = grid.n_modes();
  DriftEvaluator ev(grid);
  std::vector<double> padded;
  m.fbar_prime(u, padded, ev);
  SpectralField fphi(n);
  ev.product(padded, grid.mode(1, 1.0), fphi);
  const double rate = grid.lambda1() - fphi[0];
  double b11 = 0.0;
  if (!m.sqrtB_dense.empty()) {
    for (std::size_t j = 0; j < n; ++j) b11 += m.sqrtB_dense[j] * m.sqrtB_dense[j];
  } else {
    b11 = m.sqrtB_diagonal[0] * m.sqrtB_diagonal[0];
  }
  return b11 * -std::expm1(-2.0 * rate * T) / (2.0 * rate);
}

GaussianityReport run_gaussianity_check(const ExperimentConfig& cfg) {
  if (cfg.replicas < 128) throw ParameterError("gaussianity: replicas must be >= 128");
  if (cfg.u0_amp != 0.0 || cfg.sigma1 != 0.0)
    throw ParameterError("gaussianity: the oracle needs u0_amp = 0 and sigma1 = 0");
  GaussianityReport rep;
  rep.meta = make_meta(cfg, {cfg.L});
  const auto p = problem_from_config(cfg);
  const auto model = averaged_model_for(p, cfg.seed);
  const auto opt = options_from_config(cfg);
  const std::size_t R = cfg.replicas;
  const double oracle = deviation_lyapunov_variance(model, p.u0, cfg.T);
  const double sqeps = std::sqrt(p.epsilon);

  rep.direct_samples.assign(R, kNaN);
  rep.limit_samples.assign(R, kNaN);
  parallel_for(2 * R, [&](std::size_t job) {
    const std::size_t r = job % R;
    if (job < R) {
      const auto tr = integrate_slow_fast(p, cfg.T, cfg.dt, cfg.seed, r, opt);
      const auto avg = integrate_averaged(model, p.u0, cfg.T, cfg.dt, cfg.seed, r, cfg.stride);
      rep.direct_samples[r] = (tr.u.back()[0] - avg.u.back()[0]) / sqeps;
    } else {
      const SlowPath path(p.u0);
      const auto z = integrate_deviation(model, path, cfg.T, cfg.dt_surrogate, cfg.seed, r, cfg.stride);
      rep.limit_samples[r] = z.u.back()[0];
    }
  });

  auto row_for = [&](std::string source, const std::vector<double>& xs) {
    GaussianityRow row{std::move(source), p.epsilon, R, stats::variance(xs), oracle, kNaN, kNaN, false};
    row.degenerate = !(oracle > 1e-300) || !(row.sample_variance > 1e-300);
    if (!row.degenerate) {
      const auto ks = stats::ks_test(xs, [oracle](double x) { return stats::normal_cdf(x, 0.0, oracle); });
      row.ks_statistic = ks.statistic;
      row.p_value = ks.p_value;
    }
    return row;
  };
  rep.rows.push_back(row_for("direct", rep.direct_samples));
  rep.rows.push_back(row_for("limit", rep.limit_samples));
  return rep;
}

}  // namespace avgspde
