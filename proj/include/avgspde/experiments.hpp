#pragma once

// Scripted studies: convergence rate, bifurcation sweep, variance scaling,
// mixing, direct-vs-surrogate cost, Gaussianity of the deviation.

#include <cstdint>
#include <string>
#include <vector>

#include "avgspde/config.hpp"
#include "avgspde/dynamics.hpp"
#include "avgspde/estimators.hpp"
#include "avgspde/integrators.hpp"

namespace avgspde {

struct ReportMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
  std::vector<std::string> audit_warnings;
};

/// Problem described by cfg, with L and epsilon overridden.
SlowFastProblem problem_from_config(const ExperimentConfig& cfg, double L, double epsilon);
inline SlowFastProblem problem_from_config(const ExperimentConfig& cfg) {
  return problem_from_config(cfg, cfg.L, cfg.epsilon);
}
SlowFastOptions options_from_config(const ExperimentConfig& cfg);
ReportMeta make_meta(const ExperimentConfig& cfg, const std::vector<double>& L_values);

// Single-path runs behind simulate / average / deviation.
Trajectory run_simulation(const ExperimentConfig& cfg);
Trajectory run_averaged(const ExperimentConfig& cfg);
/// Limit deviation z driven along the averaged path from u0.
Trajectory run_deviation(const ExperimentConfig& cfg);

struct ConvergenceRow {
  double epsilon = 0.0;
  std::size_t replica = 0;
  double sup_error = 0.0;  // NaN when the replica blew up
};

struct ConvergenceReport {
  ReportMeta meta;
  std::vector<double> epsilons;
  std::vector<ConvergenceRow> rows;
  std::vector<double> median_error;  // per epsilon, over surviving replicas
  double slope = 0.0;
  double slope_se = 0.0;
  double ci_level = 0.95;
  double slope_ci_low = 0.0;
  double slope_ci_high = 0.0;
  double fitted_constant = 0.0;  // exp(intercept) of the median fit
  double kappa = 0.05;
  double quantile_constant = 0.0;  // (1 - kappa)-quantile of sup_error / sqrt(eps)
  std::size_t blowups = 0;
  std::size_t runs = 0;
  bool failed = false;  // more than 5% of runs blew up
};

/// Paired direct / averaged runs sharing W1 increments; sup over recorded
/// times of |u_eps - u|_H; slope of log median error against log epsilon.
ConvergenceReport run_convergence_study(const ExperimentConfig& cfg);

struct BifurcationRow {
  double L = 0.0;
  double rms_direct = 0.0;
  double amp_averaged = 0.0;
  bool blew_up = false;
};

struct BifurcationReport {
  ReportMeta meta;
  double epsilon = 0.0;
  double threshold = 0.0;  // pi / 2^{5/4}
  std::vector<BifurcationRow> rows;
};

BifurcationReport run_bifurcation_sweep(const ExperimentConfig& cfg);

struct ScalingRow {
  double epsilon = 0.0;
  double var_direct = 0.0;
  double var_surrogate = 0.0;
};

struct ScalingReport {
  ReportMeta meta;
  std::vector<ScalingRow> rows;
  // std = c eps^beta, least squares in log-log
  double c_direct = 0.0, beta_direct = 0.0;
  double c_surrogate = 0.0, beta_surrogate = 0.0;
  // c with beta pinned at 1/2
  double c_direct_half = 0.0, c_surrogate_half = 0.0;
  std::size_t blowups = 0;
};

ScalingReport run_variance_scaling(const ExperimentConfig& cfg);

struct MixingRow {
  std::size_t mode = 0;
  double measured = 0.0;
  double exact = 0.0;
  double bound = 0.0;
  bool satisfied = false;
};

struct MixingReport {
  ReportMeta meta;
  std::vector<MixingRow> rows;
};

/// Two fast paths on the same noise, initial data differing by phi_k; the
/// one-step contraction of mode k against the exact and bound factors.
MixingReport run_mixing_check(const ExperimentConfig& cfg);

struct BenchRow {
  double epsilon = 0.0;
  double t_direct_s = 0.0;
  double t_surrogate_s = 0.0;
  double ratio = 0.0;
  std::size_t direct_steps = 0;  // macro steps x fast substeps
  std::size_t surrogate_steps = 0;
};

struct BenchReport {
  ReportMeta meta;
  std::vector<BenchRow> rows;
};

BenchReport run_speedup_benchmark(const ExperimentConfig& cfg);

struct GaussianityRow {
  std::string source;  // "direct" (z_eps) or "limit" (z)
  double epsilon = 0.0;
  std::size_t replicas = 0;
  double sample_variance = 0.0;
  double oracle_variance = 0.0;
  double ks_statistic = 0.0;
  double p_value = 0.0;
  bool degenerate = false;
};

struct GaussianityReport {
  ReportMeta meta;
  std::vector<GaussianityRow> rows;
  std::vector<double> direct_samples, limit_samples;
};

/// Mode-1 samples of z_eps(T) and z(T) against N(0, v*), v* the Lyapunov
/// variance of the linear deviation equation at u = 0.
GaussianityReport run_gaussianity_check(const ExperimentConfig& cfg);

/// Mode-1 variance of z(T), z(0) = 0, for the deviation equation linearised
/// at the constant field u (exact when fbar'(u) is spatially constant).
double deviation_lyapunov_variance(const AveragedModel& m, const SpectralField& u, double T);

}  // namespace avgspde
