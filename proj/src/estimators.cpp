#include "avgspde/estimators.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <optional>

#include "avgspde/errors.hpp"
#include "avgspde/kernels/kernels.hpp"
#include "avgspde/parallel.hpp"

namespace avgspde {

std::string provenance_name(AveragedModel::Provenance p) {
  switch (p) {
    case AveragedModel::Provenance::ClosedFormFhn: return "closed_form_fhn";
    case AveragedModel::Provenance::SlowOnly: return "slow_only";
    case AveragedModel::Provenance::Estimated: return "estimated";
  }
  return "unknown";
}

SpectralField fbar_closed_fhn(const SpectralField& u, const EigenGrid& grid) {
  const SpectralField ru = apply_diagonal(u, multiplier::ResolventPower{1.0}, grid);
  return eval_drift(DriftSpec::fhn_slow(), u, ru, grid);
}

std::vector<double> sqrtB_closed_fhn(const CovarianceSpec& Q, const EigenGrid& grid, double sigma2) {
  const auto lam = grid.eigenvalues();
  if (Q.mode_variances.size() != lam.size()) throw ParameterError("sqrtB_closed_fhn: size mismatch");
  std::vector<double> out(lam.size());
  for (std::size_t k = 0; k < lam.size(); ++k)
    out[k] = std::fabs(sigma2) * std::sqrt(Q.mode_variances[k]) / (1.0 + lam[k]);
  return out;
}

AveragedModel fhn_closed_model(const SlowFastProblem& p) {
  const std::vector<double> resolvent = diagonal_factors(multiplier::ResolventPower{1.0}, p.grid);
  AveragedModel m{p.grid, {}, {}, sqrtB_closed_fhn(p.Q2, p.grid, p.sigma2), {}, p.sigma1, p.Q1,
                  AveragedModel::Provenance::ClosedFormFhn};
  const DriftSpec f = DriftSpec::fhn_slow();
  m.fbar = [resolvent, f](const SpectralField& u, SpectralField& out, DriftEvaluator& ev) {
    SpectralField ru(u.size());
    kernels::active().mul(resolvent.data(), u.data(), ru.data(), u.size());
    ev.eval(f, u, ru, out);
  };
  m.fbar_prime = [](const SpectralField& u, std::vector<double>& padded, DriftEvaluator& ev) {
    const auto x = ev.padded(u);
    padded.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) padded[i] = 1.0 - 3.0 * x[i] * x[i];
  };
  return m;
}

namespace {

// Unit-time-scale fast dynamics with frozen u.
class FastProcess {
 public:
  FastProcess(const DriftSpec& g, const EigenGrid& grid, double dt, double sigma2, const CovarianceSpec& Q2)
      : linear_(g.is_unit_linear_relaxation()) {
    if (linear_)
      exact_.emplace(grid, dt, 1.0, sigma2, Q2);
    else
      general_.emplace(grid, dt, 1.0, sigma2, Q2, g);
  }

  void step(SpectralField& v, const SpectralField& u, NoiseStream& s) {
    if (linear_)
      exact_->step(v, u, s);
    else
      general_->step(v, u, s);
  }

 private:
  bool linear_;
  std::optional<FastExactStepper> exact_;
  std::optional<FastGeneralStepper> general_;
};

constexpr std::size_t kBatches = 16;

}  // namespace

FbarEstimate estimate_fbar(const DriftSpec& f, const DriftSpec& g, const SpectralField& u, double sigma2,
                           const CovarianceSpec& Q2, const EigenGrid& grid, double t_burn, double t_avg, double dt,
                           NoiseStream& s) {
  if (!(t_avg > 0.0)) throw ParameterError("estimate_fbar: t_avg must be positive");
  if (!(t_burn >= 0.0)) throw ParameterError("estimate_fbar: t_burn must be >= 0");
  const std::size_t n = grid.n_modes();
  if (u.size() != n) throw ParameterError("estimate_fbar: size mismatch");
  const std::size_t n_burn = static_cast<std::size_t>(std::llround(t_burn / dt));
  const std::size_t n_avg = step_count(t_avg, dt);
  if (n_avg < kBatches) throw ParameterError("estimate_fbar: t_avg/dt must cover at least 16 steps");
  const std::size_t per_batch = n_avg / kBatches;

  FastProcess fast(g, grid, dt, sigma2, Q2);
  DriftEvaluator ev(grid);
  SpectralField v(n), drift(n);
  for (std::size_t i = 0; i < n_burn; ++i) fast.step(v, u, s);

  std::vector<SpectralField> batch_means(kBatches, SpectralField(n));
  for (std::size_t b = 0; b < kBatches; ++b) {
    SpectralField& acc = batch_means[b];
    for (std::size_t i = 0; i < per_batch; ++i) {
      fast.step(v, u, s);
      ev.eval(f, u, v, drift);
      acc += drift;
    }
    acc *= 1.0 / static_cast<double>(per_batch);
  }

  FbarEstimate est{SpectralField(n), SpectralField(n)};
  for (const auto& m : batch_means) est.mean += m;
  est.mean *= 1.0 / kBatches;
  for (std::size_t k = 0; k < n; ++k) {
    double ss = 0.0;
    for (const auto& m : batch_means) ss += (m[k] - est.mean[k]) * (m[k] - est.mean[k]);
    est.std_error[k] = std::sqrt(ss / (kBatches - 1) / kBatches);
  }
  return est;
}

std::vector<double> psd_sqrt(const std::vector<double>& m, std::size_t n, std::size_t* clipped) {
  if (m.size() != n * n) throw ParameterError("psd_sqrt: size mismatch");
  Eigen::MatrixXd a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (m[i * n + j] + m[j * n + i]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  Eigen::VectorXd w = es.eigenvalues();
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w(i) < 0.0) {
      w(i) = 0.0;
      ++count;
    }
  if (clipped) *clipped = count;
  const Eigen::MatrixXd r = es.eigenvectors() * w.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = r(i, j);
  return out;
}

BEstimate estimate_B(const DriftSpec& f, const DriftSpec& g, const SpectralField& u, double sigma2,
                     const CovarianceSpec& Q2, const EigenGrid& grid, const BEstimateSettings& st,
                     std::uint64_t seed) {
  if (st.lag_max == 0) throw ParameterError("estimate_B: lag_max must be positive");
  if (st.replicas == 0) throw ParameterError("estimate_B: need at least one replica");
  if (!(st.dt > 0.0)) throw ParameterError("estimate_B: dt must be positive");
  const std::size_t n = grid.n_modes();
  if (u.size() != n) throw ParameterError("estimate_B: size mismatch");
  const std::size_t origins = st.record_steps ? st.record_steps : 16 * st.lag_max;
  const std::size_t len = origins + st.lag_max;
  const std::size_t n_burn = static_cast<std::size_t>(std::llround(st.t_burn / st.dt));
  const std::size_t R = st.replicas;
  const auto& kern = kernels::active();

  // History of the drift coefficients, stored mode-major (n x len).
  auto simulate = [&](std::size_t r, std::vector<double>& hist) {
    NoiseStream s = derive_stream(seed, StreamRole::EstimatorNoise, r);
    FastProcess fast(g, grid, st.dt, sigma2, Q2);
    DriftEvaluator ev(grid);
    SpectralField v(n), drift(n);
    if (g.is_unit_linear_relaxation()) v = sample_stationary_linear(u, sigma2, Q2, grid, s);
    for (std::size_t i = 0; i < n_burn; ++i) fast.step(v, u, s);
    hist.assign(n * len, 0.0);
    for (std::size_t t = 0; t < len; ++t) {
      fast.step(v, u, s);
      ev.eval(f, u, v, drift);
      for (std::size_t i = 0; i < n; ++i) hist[i * len + t] = drift[i];
    }
  };

  // Pass 1: grand mean and trace autocorrelation need the full ensemble; the
  // histories are regenerated in pass 2 instead of being kept in memory.
  std::vector<std::vector<double>> sums(R, std::vector<double>(n, 0.0));
  parallel_for(R, [&](std::size_t r) {
    std::vector<double> hist;
    simulate(r, hist);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t t = 0; t < len; ++t) sums[r][i] += hist[i * len + t];
  });
  std::vector<double> mean(n, 0.0);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t i = 0; i < n; ++i) mean[i] += sums[r][i];
  for (double& m : mean) m /= static_cast<double>(R * len);

  const double inv_origins = 1.0 / static_cast<double>(origins);
  std::vector<std::vector<double>> trace(R, std::vector<double>(st.lag_max + 1, 0.0));
  auto centred = [&](std::size_t r, std::vector<double>& hist) {
    simulate(r, hist);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t t = 0; t < len; ++t) hist[i * len + t] -= mean[i];
  };
  parallel_for(R, [&](std::size_t r) {
    std::vector<double> hist;
    centred(r, hist);
    for (std::size_t lag = 0; lag <= st.lag_max; ++lag) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += kern.dot(&hist[i * len + lag], &hist[i * len], origins);
      trace[r][lag] = acc * inv_origins;
    }
  });

  BEstimate out;
  out.n = n;
  std::vector<double> tr(st.lag_max + 1, 0.0);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t l = 0; l <= st.lag_max; ++l) tr[l] += trace[r][l] / static_cast<double>(R);
  out.lags_used = st.lag_max;
  out.converged = false;
  if (tr[0] > 0.0) {
    for (std::size_t l = 1; l <= st.lag_max; ++l)
      if (tr[l] < st.floor * tr[0]) {
        out.lags_used = l;
        out.converged = true;
        break;
      }
  } else {
    // Degenerate (no fluctuations): B = 0 exactly.
    out.lags_used = 0;
    out.converged = true;
  }

  const std::size_t cut = out.lags_used;
  std::vector<std::vector<double>> per_replica(R, std::vector<double>(n * n, 0.0));
  parallel_for(R, [&](std::size_t r) {
    std::vector<double> hist;
    centred(r, hist);
    auto& b = per_replica[r];
    for (std::size_t lag = 0; lag <= cut; ++lag) {
      const double w = (lag == 0 || lag == cut) ? 0.5 : 1.0;
      const double scale = 2.0 * st.dt * w * inv_origins;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b[i * n + j] += scale * kern.dot(&hist[i * len + lag], &hist[j * len], origins);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double s = 0.5 * (b[i * n + j] + b[j * n + i]);
        b[i * n + j] = b[j * n + i] = s;
      }
  });

  out.B.assign(n * n, 0.0);
  out.std_error.assign(n * n, 0.0);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t e = 0; e < n * n; ++e) out.B[e] += per_replica[r][e] / static_cast<double>(R);
  if (R > 1)
    for (std::size_t e = 0; e < n * n; ++e) {
      double ss = 0.0;
      for (std::size_t r = 0; r < R; ++r) ss += (per_replica[r][e] - out.B[e]) * (per_replica[r][e] - out.B[e]);
      out.std_error[e] = std::sqrt(ss / static_cast<double>(R - 1) / static_cast<double>(R));
    }
  out.sqrt_factor = psd_sqrt(out.B, n, &out.clipped_eigenvalues);
  return out;
}

namespace {

bool is_fhn_slow(const DriftSpec& f) { return f.terms() == DriftSpec::fhn_slow().terms(); }

std::uint64_t hash_field(const SpectralField& u) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (double c : u.vector()) {
    std::uint64_t bits;
    std::memcpy(&bits, &c, sizeof bits);
    h = mix64(h ^ bits);
  }
  return h;
}

}  // namespace

AveragedModel averaged_model_for(const SlowFastProblem& p, std::uint64_t seed) {
  p.validate();
  if (is_fhn_slow(p.f) && p.g.is_unit_linear_relaxation()) return fhn_closed_model(p);

  const std::size_t n = p.grid.n_modes();
  AveragedModel m{p.grid, {}, {}, {}, {}, p.sigma1, p.Q1, AveragedModel::Provenance::SlowOnly};
  const DriftSpec f = p.f;
  if (!f.depends_on_y()) {
    const SpectralField zero(n);
    m.fbar = [f, zero](const SpectralField& u, SpectralField& out, DriftEvaluator& ev) { ev.eval(f, u, zero, out); };
    m.fbar_prime = [f](const SpectralField& u, std::vector<double>& padded, DriftEvaluator& ev) {
      const auto x = ev.padded(u);
      padded.resize(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) padded[i] = f.d_dx(x[i], 0.0);
    };
    m.sqrtB_diagonal.assign(n, 0.0);
    return m;
  }

  // General drifts: ergodic estimates, keyed by u so the model stays a pure
  // function of its argument.
  m.provenance = AveragedModel::Provenance::Estimated;
  const DriftSpec g = p.g;
  const double sigma2 = p.sigma2;
  const CovarianceSpec Q2 = p.Q2;
  const EigenGrid grid = p.grid;
  constexpr double kDt = 0.01, kBurn = 5.0, kAvg = 20.0;
  m.fbar = [=](const SpectralField& u, SpectralField& out, DriftEvaluator&) {
    NoiseStream s = derive_stream(seed, StreamRole::EstimatorNoise, hash_field(u));
    out = estimate_fbar(f, g, u, sigma2, Q2, grid, kBurn, kAvg, kDt, s).mean;
  };
  m.fbar_prime = [=](const SpectralField& u, std::vector<double>& padded, DriftEvaluator& ev) {
    NoiseStream s = derive_stream(seed, StreamRole::EstimatorNoise, hash_field(u) ^ 0x1ull);
    FastProcess fast(g, grid, kDt, sigma2, Q2);
    SpectralField v(u.size());
    for (std::size_t i = 0; i < static_cast<std::size_t>(kBurn / kDt); ++i) fast.step(v, u, s);
    const std::vector<double> x(ev.padded(u).begin(), ev.padded(u).end());
    padded.assign(x.size(), 0.0);
    const std::size_t steps = static_cast<std::size_t>(kAvg / kDt);
    for (std::size_t i = 0; i < steps; ++i) {
      fast.step(v, u, s);
      const auto y = ev.padded(v);
      for (std::size_t j = 0; j < x.size(); ++j) padded[j] += f.d_dx(x[j], y[j]);
    }
    for (double& d : padded) d /= static_cast<double>(steps);
  };
  BEstimateSettings st;
  st.replicas = 8;
  m.sqrtB_dense = estimate_B(f, g, p.u0, sigma2, Q2, grid, st, seed).sqrt_factor;
  return m;
}

}  // namespace avgspde
