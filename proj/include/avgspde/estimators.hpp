#pragma once

// The averaged drift fbar(u), its v-averaged derivative, and the deviation
// covariance B(u): closed forms for FitzHugh-Nagumo and ergodic / Green-Kubo
// estimators for general drifts.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "avgspde/dynamics.hpp"
#include "avgspde/integrators.hpp"

namespace avgspde {

struct AveragedModel {
  enum class Provenance { ClosedFormFhn, SlowOnly, Estimated };

  EigenGrid grid;
  /// out <- fbar(u). The evaluator is caller-owned scratch.
  std::function<void(const SpectralField& u, SpectralField& out, DriftEvaluator& ev)> fbar;
  /// padded <- fbar'_u(u) on the 2N+1 padded nodes.
  std::function<void(const SpectralField& u, std::vector<double>& padded, DriftEvaluator& ev)> fbar_prime;
  /// Noise factor of the deviation equation: per-mode multipliers (diagonal)
  /// or a dense N x N row-major matrix; exactly one is non-empty.
  std::vector<double> sqrtB_diagonal;
  std::vector<double> sqrtB_dense;
  double sigma1 = 0.0;
  CovarianceSpec Q1;
  Provenance provenance = Provenance::ClosedFormFhn;
};

std::string provenance_name(AveragedModel::Provenance p);

/// u - u^3 + (1 - d_xx)^{-1} u  (the A u term is left to the integrator).
SpectralField fbar_closed_fhn(const SpectralField& u, const EigenGrid& grid);

/// |sigma2| sqrt(q_k) / (1 + l_k); sigma2 = 3 gives 3 sqrt(q_k)/(1 + l_k).
std::vector<double> sqrtB_closed_fhn(const CovarianceSpec& Q, const EigenGrid& grid, double sigma2 = 3.0);

/// Closed-form FitzHugh-Nagumo model: fbar as above, fbar' = 1 - 3u^2,
/// diagonal sqrtB.
AveragedModel fhn_closed_model(const SlowFastProblem& p);

struct FbarEstimate {
  SpectralField mean;
  SpectralField std_error;  // batch means, 16 batches
};

/// Time average of f(u, v(tau)) along the unit-time-scale fast equation
///   dv = [A v + g(u, v)] dtau + sigma2 dW,
/// after discarding t_burn. Starts from v = 0.
FbarEstimate estimate_fbar(const DriftSpec& f, const DriftSpec& g, const SpectralField& u, double sigma2,
                           const CovarianceSpec& Q2, const EigenGrid& grid, double t_burn, double t_avg, double dt,
                           NoiseStream& s);

struct BEstimateSettings {
  double dt = 0.01;
  double t_burn = 5.0;
  std::size_t lag_max = 400;
  /// Origins per replica; 0 selects 16 * lag_max.
  std::size_t record_steps = 0;
  std::size_t replicas = 16;
  double floor = 1.0e-3;
};

struct BEstimate {
  std::size_t n = 0;
  std::vector<double> B;          // n x n, symmetric
  std::vector<double> std_error;  // n x n, across replicas
  std::vector<double> sqrt_factor;  // n x n symmetric PSD square root (negative eigenvalues clipped)
  std::size_t lags_used = 0;
  bool converged = true;  // false when the autocorrelation floor was never reached
  std::size_t clipped_eigenvalues = 0;

  double at(std::size_t i, std::size_t j) const { return B[i * n + j]; }
  double se(std::size_t i, std::size_t j) const { return std_error[i * n + j]; }
};

/// B_ij = 2 sum_lag w dt C_ij(lag), C the ensemble- and time-averaged lagged
/// covariance of the centred drift coefficients, trapezoidal weights, lags
/// cut where the trace autocorrelation drops below floor * C(0).
/// Replica r uses stream (seed, estimator-noise, r).
BEstimate estimate_B(const DriftSpec& f, const DriftSpec& g, const SpectralField& u, double sigma2,
                     const CovarianceSpec& Q2, const EigenGrid& grid, const BEstimateSettings& settings,
                     std::uint64_t seed);

/// Model for a general problem. f independent of v gives fbar = f exactly;
/// FitzHugh-Nagumo drifts give the closed form; otherwise fbar and fbar' are
/// estimated on demand (deterministically, with streams keyed by u) and
/// sqrtB is estimated once at u0.
AveragedModel averaged_model_for(const SlowFastProblem& p, std::uint64_t seed);

/// Symmetric PSD square root of an n x n matrix; negative eigenvalues are
/// clipped to zero. Returns the number clipped through `clipped`.
std::vector<double> psd_sqrt(const std::vector<double>& m, std::size_t n, std::size_t* clipped = nullptr);

}  // namespace avgspde
