#include "avgspde/integrators.hpp"

#include <algorithm>
#include <cmath>

#include "avgspde/errors.hpp"
#include "avgspde/estimators.hpp"
#include "avgspde/kernels/kernels.hpp"

namespace avgspde {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// (1 - e^{-r h}) / r, continuous at r = 0.
double phi1(double r, double h) { return r == 0.0 ? h : -std::expm1(-r * h) / r; }

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ParameterError(std::string(what) + " must be positive");
}

void check_field(const SpectralField& f, double t) {
  if (kernels::active().max_abs(f.data(), f.size()) > kBlowUpThreshold) throw BlowUpError(t);
}

void require_linear_fast(const DriftSpec& g) {
  if (!g.is_unit_linear_relaxation())
    throw UnsupportedFormError("exact fast stepping needs g(u, v) = u - v, got '" + g.serialize() + "'");
}

}  // namespace

void Trajectory::record(double t, const SpectralField& u_field, const SpectralField* v_field, const EigenGrid& grid) {
  times.push_back(t);
  u.push_back(u_field);
  u_mid.push_back(mid_value(u_field, grid));
  u_norm.push_back(h_norm(u_field));
  v_mid.push_back(v_field ? mid_value(*v_field, grid) : kNaN);
  v_norm.push_back(v_field ? h_norm(*v_field) : kNaN);
}

// -- slow ------------------------------------------------------------------

SlowStepper::SlowStepper(const EigenGrid& grid, double dt, double sigma, const CovarianceSpec& Q)
    : dt_(dt), noisy_(sigma != 0.0) {
  require_positive(dt, "dt");
  const auto lam = grid.eigenvalues();
  const std::size_t n = lam.size();
  if (Q.mode_variances.size() != n) throw ParameterError("SlowStepper: covariance/grid size mismatch");
  decay_.resize(n);
  gain_.resize(n);
  scale_.resize(n);
  xi_.assign(n, 0.0);
  out_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    decay_[k] = std::exp(-lam[k] * dt);
    gain_[k] = phi1(lam[k], dt);
    // phi1(2l, dt) = (1 - e^{-2 l dt}) / (2 l), the OU variance factor.
    scale_[k] = std::fabs(sigma) * std::sqrt(Q.mode_variances[k] * phi1(2.0 * lam[k], dt));
  }
}

void SlowStepper::step(SpectralField& u, const SpectralField& drift, NoiseStream& s) {
  const std::size_t n = decay_.size();
  if (noisy_) s.fill_normals(xi_);
  kernels::active().exp_update(decay_.data(), u.data(), gain_.data(), drift.data(), scale_.data(), xi_.data(),
                               out_.data(), n);
  std::copy(out_.begin(), out_.end(), u.data());
}

SpectralField step_slow(const SpectralField& u, const SpectralField& drift, double dt, double sigma1,
                        const CovarianceSpec& Q1, NoiseStream& s, const EigenGrid& g) {
  if (u.size() != g.n_modes() || drift.size() != g.n_modes()) throw ParameterError("step_slow: size mismatch");
  SlowStepper stepper(g, dt, sigma1, Q1);
  SpectralField out = u;
  std::vector<double> xi(g.n_modes());
  s.fill_normals(xi);
  const auto decay = stepper.decay();
  const auto scale = stepper.noise_std();
  const auto lam = g.eigenvalues();
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = decay[k] * u[k] + phi1(lam[k], dt) * drift[k] + scale[k] * xi[k];
  return out;
}

// -- fast, exact -----------------------------------------------------------

FastExactStepper::FastExactStepper(const EigenGrid& grid, double dt, double epsilon, double sigma2,
                                   const CovarianceSpec& Q2) {
  require_positive(dt, "dt");
  require_positive(epsilon, "epsilon");
  const auto lam = grid.eigenvalues();
  const std::size_t n = lam.size();
  if (Q2.mode_variances.size() != n) throw ParameterError("FastExactStepper: covariance/grid size mismatch");
  decay_.resize(n);
  gain_.resize(n);
  scale_.resize(n);
  xi_.resize(n);
  out_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double one_plus = 1.0 + lam[k];
    const double mu = one_plus / epsilon;
    decay_[k] = std::exp(-mu * dt);
    gain_[k] = -std::expm1(-mu * dt) / one_plus;
    scale_[k] = std::fabs(sigma2) * std::sqrt(Q2.mode_variances[k] * -std::expm1(-2.0 * mu * dt) / (2.0 * one_plus));
  }
}

void FastExactStepper::step(SpectralField& v, const SpectralField& u, NoiseStream& s) {
  s.fill_normals(xi_);
  kernels::active().exp_update(decay_.data(), v.data(), gain_.data(), u.data(), scale_.data(), xi_.data(),
                               out_.data(), out_.size());
  std::copy(out_.begin(), out_.end(), v.data());
}

SpectralField step_fast_exact_linear(const SpectralField& v, const SpectralField& u, double dt, double epsilon,
                                     double sigma2, const CovarianceSpec& Q2, NoiseStream& s, const EigenGrid& g,
                                     const DriftSpec& g_drift) {
  require_linear_fast(g_drift);
  if (u.size() != g.n_modes() || v.size() != g.n_modes()) throw ParameterError("step_fast: size mismatch");
  FastExactStepper stepper(g, dt, epsilon, sigma2, Q2);
  SpectralField out = v;
  stepper.step(out, u, s);
  return out;
}

// -- fast, general ---------------------------------------------------------

std::size_t fast_substep_count(double dt, double epsilon) {
  require_positive(dt, "dt");
  require_positive(epsilon, "epsilon");
  const double ratio = dt / (FastGeneralStepper::kTheta * epsilon);
  // Guard the ceil against round-off so dt == theta*eps gives one substep.
  const double r = std::ceil(ratio * (1.0 - 1e-12));
  return static_cast<std::size_t>(std::max(1.0, r));
}

namespace {

double linear_v_coefficient(const DriftSpec& g) {
  for (const auto& t : g.terms())
    if (t.px == 0 && t.py == 1) return t.coef;
  return 0.0;
}

DriftSpec without_linear_v(const DriftSpec& g) {
  std::vector<PolyTerm> rest;
  for (const auto& t : g.terms())
    if (!(t.px == 0 && t.py == 1)) rest.push_back(t);
  return DriftSpec::polynomial(g.name() + "-remainder", std::move(rest));
}

}  // namespace

FastGeneralStepper::FastGeneralStepper(const EigenGrid& grid, double dt, double epsilon, double sigma2,
                                       const CovarianceSpec& Q2, DriftSpec g_drift)
    : g_(std::move(g_drift)),
      remainder_(without_linear_v(g_)),
      eval_(grid),
      substeps_(fast_substep_count(dt, epsilon)),
      drive_(grid.n_modes()) {
  const auto lam = grid.eigenvalues();
  const std::size_t n = lam.size();
  if (Q2.mode_variances.size() != n) throw ParameterError("FastGeneralStepper: covariance/grid size mismatch");
  const double h = dt / static_cast<double>(substeps_);
  const double c = linear_v_coefficient(g_);
  decay_.resize(n);
  gain_.resize(n);
  scale_.resize(n);
  xi_.resize(n);
  out_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double rate = (lam[k] - c) / epsilon;
    decay_[k] = std::exp(-rate * h);
    gain_[k] = phi1(rate, h) / epsilon;
    scale_[k] = std::fabs(sigma2) * std::sqrt(Q2.mode_variances[k] * phi1(2.0 * rate, h) / epsilon);
  }
}

void FastGeneralStepper::step(SpectralField& v, const SpectralField& u, NoiseStream& s, double time) {
  const bool frozen_drive = !remainder_.depends_on_y();
  const bool empty = remainder_.terms().empty();
  if (empty) std::fill(drive_.data(), drive_.data() + drive_.size(), 0.0);
  if (frozen_drive && !empty) eval_.eval(remainder_, u, v, drive_, time);
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < substeps_; ++i) {
    if (!frozen_drive) eval_.eval(remainder_, u, v, drive_, time);
    s.fill_normals(xi_);
    k.exp_update(decay_.data(), v.data(), gain_.data(), drive_.data(), scale_.data(), xi_.data(), out_.data(),
                 out_.size());
    std::copy(out_.begin(), out_.end(), v.data());
  }
  check_field(v, time);
}

SpectralField step_fast_general(const SpectralField& v, const SpectralField& u, double dt, double epsilon,
                                double sigma2, const CovarianceSpec& Q2, const DriftSpec& g_drift, NoiseStream& s,
                                const EigenGrid& grid) {
  if (u.size() != grid.n_modes() || v.size() != grid.n_modes()) throw ParameterError("step_fast: size mismatch");
  FastGeneralStepper stepper(grid, dt, epsilon, sigma2, Q2, g_drift);
  SpectralField out = v;
  stepper.step(out, u, s);
  return out;
}

SpectralField sample_stationary_linear(const SpectralField& u, double sigma2, const CovarianceSpec& Q2,
                                       const EigenGrid& grid, NoiseStream& s, const DriftSpec& g_drift) {
  require_linear_fast(g_drift);
  if (u.size() != grid.n_modes() || Q2.mode_variances.size() != grid.n_modes())
    throw ParameterError("sample_stationary_linear: size mismatch");
  const auto lam = grid.eigenvalues();
  SpectralField out(grid.n_modes());
  s.fill_normals(out.coefficients());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double one_plus = 1.0 + lam[k];
    out[k] = u[k] / one_plus + std::fabs(sigma2) * std::sqrt(Q2.mode_variances[k] / (2.0 * one_plus)) * out[k];
  }
  return out;
}

// -- paths -----------------------------------------------------------------

std::size_t step_count(double T, double dt) {
  require_positive(T, "T");
  require_positive(dt, "dt");
  const double n = std::round(T / dt);
  return static_cast<std::size_t>(std::max(1.0, n));
}

Trajectory integrate_slow_fast(const SlowFastProblem& p, double T, double dt, std::uint64_t seed,
                               std::uint64_t replica, const SlowFastOptions& opt) {
  p.validate();
  const std::size_t n = step_count(T, dt);
  const std::size_t stride = std::max<std::size_t>(1, opt.output_stride);
  const EigenGrid& grid = p.grid;
  NoiseStream slow = derive_stream(seed, StreamRole::SlowNoise, replica);
  NoiseStream fast = derive_stream(seed, StreamRole::FastNoise, replica);

  bool exact = false;
  switch (opt.scheme) {
    case FastScheme::Auto: exact = p.g.is_unit_linear_relaxation(); break;
    case FastScheme::Exact: require_linear_fast(p.g); exact = true; break;
    case FastScheme::General: exact = false; break;
  }

  SpectralField u = p.u0;
  SpectralField v = p.v0;
  std::optional<FastExactStepper> exact_step;
  std::optional<FastGeneralStepper> general_step;
  if (exact)
    exact_step.emplace(grid, dt, p.epsilon, p.sigma2, p.Q2);
  else
    general_step.emplace(grid, dt, p.epsilon, p.sigma2, p.Q2, p.g);

  if (opt.fast_init == FastInit::Stationary) {
    if (p.g.is_unit_linear_relaxation()) {
      v = sample_stationary_linear(u, p.sigma2, p.Q2, grid, fast);
    } else {
      // Relax the frozen-u fast equation for ten of its time units.
      FastGeneralStepper burn(grid, p.epsilon, p.epsilon, p.sigma2, p.Q2, p.g);
      for (int i = 0; i < 10; ++i) burn.step(v, u, fast, 0.0);
    }
  }

  SlowStepper slow_step(grid, dt, p.sigma1, p.Q1);
  DriftEvaluator ev(grid);
  SpectralField drift(grid.n_modes());

  Trajectory traj;
  traj.record(0.0, u, &v, grid);
  for (std::size_t i = 1; i <= n; ++i) {
    const double t = static_cast<double>(i) * dt;
    if (exact)
      exact_step->step(v, u, fast);
    else
      general_step->step(v, u, fast, t);
    ev.eval(p.f, u, v, drift, t);
    slow_step.step(u, drift, slow);
    check_field(u, t);
    if (i % stride == 0 || i == n) traj.record(t, u, &v, grid);
  }
  return traj;
}

Trajectory integrate_averaged(const AveragedModel& m, const SpectralField& u0, double T, double dt,
                              std::uint64_t seed, std::uint64_t replica, std::size_t output_stride) {
  const EigenGrid& grid = m.grid;
  if (u0.size() != grid.n_modes()) throw ParameterError("integrate_averaged: initial data size mismatch");
  const std::size_t n = step_count(T, dt);
  const std::size_t stride = std::max<std::size_t>(1, output_stride);
  NoiseStream slow = derive_stream(seed, StreamRole::SlowNoise, replica);
  SlowStepper slow_step(grid, dt, m.sigma1, m.Q1);
  DriftEvaluator ev(grid);
  SpectralField u = u0, drift(grid.n_modes());

  Trajectory traj;
  traj.record(0.0, u, nullptr, grid);
  for (std::size_t i = 1; i <= n; ++i) {
    const double t = static_cast<double>(i) * dt;
    try {
      m.fbar(u, drift, ev);
    } catch (const BlowUpError&) {
      throw BlowUpError(t);
    }
    slow_step.step(u, drift, slow);
    check_field(u, t);
    if (i % stride == 0 || i == n) traj.record(t, u, nullptr, grid);
  }
  return traj;
}

const SpectralField& SlowPath::at(double t) const {
  if (const auto* c = std::get_if<SpectralField>(&data_)) return *c;
  const Trajectory& path = *std::get<const Trajectory*>(data_);
  if (path.empty()) throw ParameterError("SlowPath: empty trajectory");
  const double tol = 1e-9 * std::max(1.0, std::fabs(t));
  auto it = std::upper_bound(path.times.begin(), path.times.end(), t + tol);
  const std::size_t idx = it == path.times.begin() ? 0 : static_cast<std::size_t>(it - path.times.begin()) - 1;
  return path.u[idx];
}

Trajectory integrate_deviation(const AveragedModel& m, const SlowPath& u_path, double T, double dt,
                               std::uint64_t seed, std::uint64_t replica, std::size_t output_stride) {
  const EigenGrid& grid = m.grid;
  const std::size_t nm = grid.n_modes();
  const std::size_t n = step_count(T, dt);
  const std::size_t stride = std::max<std::size_t>(1, output_stride);
  const bool dense = m.sqrtB_diagonal.empty();
  if (dense && m.sqrtB_dense.size() != nm * nm) throw ParameterError("integrate_deviation: sqrtB has wrong size");
  if (!dense && m.sqrtB_diagonal.size() != nm) throw ParameterError("integrate_deviation: sqrtB has wrong size");

  NoiseStream noise = derive_stream(seed, StreamRole::DeviationNoise, replica);
  std::vector<double> q(nm, 0.0);
  if (!dense)
    for (std::size_t k = 0; k < nm; ++k) q[k] = m.sqrtB_diagonal[k] * m.sqrtB_diagonal[k];
  SlowStepper step(grid, dt, dense ? 0.0 : 1.0, make_custom_covariance(q));

  // Dense factor: cylindrical increments mapped by sqrtB, then each mode
  // scaled to the exact stochastic-convolution variance of its own rate.
  std::vector<double> eta(nm), w(nm), conv(nm);
  const auto lam = grid.eigenvalues();
  for (std::size_t k = 0; k < nm; ++k) conv[k] = std::sqrt(phi1(2.0 * lam[k], dt));

  DriftEvaluator ev(grid);
  std::vector<double> multiplier;
  SpectralField z(nm), drift(nm);
  Trajectory traj;
  traj.record(0.0, z, nullptr, grid);
  for (std::size_t i = 1; i <= n; ++i) {
    const double t_prev = static_cast<double>(i - 1) * dt;
    const double t = static_cast<double>(i) * dt;
    m.fbar_prime(u_path.at(t_prev), multiplier, ev);
    ev.product(multiplier, z, drift, t);
    step.step(z, drift, noise);
    if (dense) {
      noise.fill_normals(eta);
      kernels::active().matvec(m.sqrtB_dense.data(), nm, nm, eta.data(), w.data());
      for (std::size_t k = 0; k < nm; ++k) z[k] += conv[k] * w[k];
    }
    check_field(z, t);
    if (i % stride == 0 || i == n) traj.record(t, z, nullptr, grid);
  }
  return traj;
}

Trajectory empirical_deviation(const Trajectory& eps_path, const Trajectory& avg_path, double epsilon,
                               const EigenGrid& grid) {
  require_positive(epsilon, "epsilon");
  if (eps_path.size() != avg_path.size()) throw ParameterError("empirical_deviation: time grids differ in length");
  const double scale = 1.0 / std::sqrt(epsilon);
  Trajectory z;
  for (std::size_t i = 0; i < eps_path.size(); ++i) {
    const double ta = eps_path.times[i], tb = avg_path.times[i];
    if (std::fabs(ta - tb) > 1e-9 * std::max(1.0, std::fabs(ta)))
      throw ParameterError("empirical_deviation: time grids differ");
    z.record(ta, scale * (eps_path.u[i] - avg_path.u[i]), nullptr, grid);
  }
  return z;
}

}  // namespace avgspde
