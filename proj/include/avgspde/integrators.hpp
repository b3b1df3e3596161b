#pragma once

// Time stepping for the coupled slow-fast system, the averaged equation and
// the deviation equation. Every scheme integrates the diagonal linear part
// exactly (exponential Euler) and draws the stochastic convolution with its
// exact per-mode variance.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "avgspde/dynamics.hpp"
#include "avgspde/noise.hpp"
#include "avgspde/random.hpp"
#include "avgspde/spectral.hpp"

namespace avgspde {

struct CoupledState {
  double t = 0.0;
  SpectralField u;
  SpectralField v;
};

/// Sampled path. u holds full coefficient vectors; the scalar observables are
/// recorded alongside. v_mid / v_norm are NaN for single-field equations.
struct Trajectory {
  std::vector<double> times;
  std::vector<double> u_mid, v_mid, u_norm, v_norm;
  std::vector<SpectralField> u;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
  void record(double t, const SpectralField& u_field, const SpectralField* v_field, const EigenGrid& grid);
};

// ---------------------------------------------------------------------------
// Single-step operators.

/// Exponential Euler step of du = [A u + drift] dt + sigma dW, W Q-Wiener:
///   u_k <- e^{-l dt} u_k + (1 - e^{-l dt})/l drift_k + sigma xi_k,
///   xi_k ~ N(0, q_k (1 - e^{-2 l dt}) / (2 l)).
/// Precomputes the per-mode factors for a fixed dt.
class SlowStepper {
 public:
  SlowStepper(const EigenGrid& grid, double dt, double sigma, const CovarianceSpec& Q);

  /// Draws the noise from `s` unless sigma == 0 (then `s` is untouched).
  void step(SpectralField& u, const SpectralField& drift, NoiseStream& s);

  double dt() const noexcept { return dt_; }
  std::span<const double> decay() const noexcept { return decay_; }
  std::span<const double> noise_std() const noexcept { return scale_; }

 private:
  double dt_;
  bool noisy_;
  std::vector<double> decay_, gain_, scale_, xi_, out_;
};

/// Functional form; always draws from `s`.
SpectralField step_slow(const SpectralField& u, const SpectralField& drift, double dt, double sigma1,
                        const CovarianceSpec& Q1, NoiseStream& s, const EigenGrid& g);

/// Exact OU step of the fast equation for g(u, v) = u - v:
///   rate mu_k = (1 + l_k)/eps,
///   v_k <- e^{-mu dt} v_k + (1 - e^{-mu dt}) u_k/(1 + l_k) + xi_k,
///   xi_k ~ N(0, sigma2^2 q_k (1 - e^{-2 mu dt}) / (2 (1 + l_k))).
class FastExactStepper {
 public:
  FastExactStepper(const EigenGrid& grid, double dt, double epsilon, double sigma2, const CovarianceSpec& Q2);

  void step(SpectralField& v, const SpectralField& u, NoiseStream& s);
  std::span<const double> decay() const noexcept { return decay_; }

 private:
  std::vector<double> decay_, gain_, scale_, xi_, out_;
};

SpectralField step_fast_exact_linear(const SpectralField& v, const SpectralField& u, double dt, double epsilon,
                                     double sigma2, const CovarianceSpec& Q2, NoiseStream& s, const EigenGrid& g,
                                     const DriftSpec& g_drift = DriftSpec::fhn_fast());

/// Substepped semi-implicit fast step for a general polynomial g:
///   dt_f = dt / ceil(dt / (theta eps)), theta = 0.1,
/// the linear part (A + c I)/eps is exact, with c the constant coefficient of
/// the pure v-term of g, and the remainder of g is explicit and pseudospectral.
class FastGeneralStepper {
 public:
  static constexpr double kTheta = 0.1;

  FastGeneralStepper(const EigenGrid& grid, double dt, double epsilon, double sigma2, const CovarianceSpec& Q2,
                     DriftSpec g_drift);

  void step(SpectralField& v, const SpectralField& u, NoiseStream& s, double time = 0.0);
  std::size_t substeps() const noexcept { return substeps_; }

 private:
  DriftSpec g_;
  DriftSpec remainder_;
  DriftEvaluator eval_;
  std::size_t substeps_;
  std::vector<double> decay_, gain_, scale_, xi_, out_;
  SpectralField drive_;
};

std::size_t fast_substep_count(double dt, double epsilon);

SpectralField step_fast_general(const SpectralField& v, const SpectralField& u, double dt, double epsilon,
                                double sigma2, const CovarianceSpec& Q2, const DriftSpec& g_drift, NoiseStream& s,
                                const EigenGrid& grid);

/// Draw from the stationary law of the frozen-u fast equation with g = u - v:
/// mode k ~ N(u_k/(1 + l_k), sigma2^2 q_k / (2 (1 + l_k))).
SpectralField sample_stationary_linear(const SpectralField& u, double sigma2, const CovarianceSpec& Q2,
                                       const EigenGrid& grid, NoiseStream& s,
                                       const DriftSpec& g_drift = DriftSpec::fhn_fast());

// ---------------------------------------------------------------------------
// Whole-path integrators.

enum class FastScheme { Auto, Exact, General };
enum class FastInit { AsGiven, Stationary };

struct SlowFastOptions {
  std::size_t output_stride = 1;
  FastScheme scheme = FastScheme::Auto;
  FastInit fast_init = FastInit::AsGiven;
};

/// Lie splitting: fast step first, then a slow step with f(u, v) frozen.
/// Slow noise comes from (seed, slow-noise, replica), fast noise from
/// (seed, fast-noise, replica). The last step is always recorded.
/// Throws BlowUpError with the failure time.
Trajectory integrate_slow_fast(const SlowFastProblem& p, double T, double dt, std::uint64_t seed,
                               std::uint64_t replica, const SlowFastOptions& opt = {});

/// Number of steps for horizon T: round(T / dt), at least 1.
std::size_t step_count(double T, double dt);

struct AveragedModel;

/// du = [A u + fbar(u)] dt + sigma1 dW1 with the slow-noise stream of the
/// given (seed, replica): a paired slow-fast run sees the same W1 increments.
Trajectory integrate_averaged(const AveragedModel& m, const SpectralField& u0, double T, double dt,
                              std::uint64_t seed, std::uint64_t replica, std::size_t output_stride = 1);

/// Slow path fed to the deviation equation: a frozen field or a recorded
/// trajectory (piecewise constant between records).
class SlowPath {
 public:
  explicit SlowPath(SpectralField constant) : data_(std::move(constant)) {}
  explicit SlowPath(const Trajectory& path) : data_(&path) {}

  const SpectralField& at(double t) const;

 private:
  std::variant<SpectralField, const Trajectory*> data_;
};

/// dz = [A z + fbar'_u(u(t)) z] dt + sqrtB dWbar, z(0) = 0, noise from the
/// deviation-noise stream.
Trajectory integrate_deviation(const AveragedModel& m, const SlowPath& u_path, double T, double dt,
                               std::uint64_t seed, std::uint64_t replica, std::size_t output_stride = 1);

/// (u_eps - u)/sqrt(eps) on the common time grid. Throws ParameterError if
/// the grids differ.
Trajectory empirical_deviation(const Trajectory& eps_path, const Trajectory& avg_path, double epsilon,
                               const EigenGrid& grid);

}  // namespace avgspde
