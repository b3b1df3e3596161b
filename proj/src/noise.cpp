#include "avgspde/noise.hpp"

#include <cmath>
#include <limits>

#include "avgspde/errors.hpp"

namespace avgspde {

std::string_view kind_name(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::ResolventPower: return "resolvent";
    case CovarianceKind::Cylindrical: return "cylindrical";
    case CovarianceKind::Custom: return "custom";
  }
  return "unknown";
}

CovarianceSpec make_covariance(CovarianceKind kind, double p, const EigenGrid& g) {
  CovarianceSpec c;
  c.kind = kind;
  switch (kind) {
    case CovarianceKind::ResolventPower:
      if (!(p >= 0.0) || !std::isfinite(p)) throw ParameterError("resolvent covariance power must be >= 0");
      c.power = p;
      c.mode_variances = diagonal_factors(multiplier::ResolventPower{p}, g);
      break;
    case CovarianceKind::Cylindrical:
      c.mode_variances.assign(g.n_modes(), 1.0);
      break;
    case CovarianceKind::Custom:
      throw ParameterError("custom covariances need explicit mode variances");
  }
  return c;
}

CovarianceSpec make_custom_covariance(std::vector<double> mode_variances) {
  for (double q : mode_variances)
    if (!(q >= 0.0) || !std::isfinite(q)) throw ParameterError("mode variances must be finite and >= 0");
  CovarianceSpec c;
  c.kind = CovarianceKind::Custom;
  c.mode_variances = std::move(mode_variances);
  return c;
}

TraceReport trace_report(const CovarianceSpec& c, const EigenGrid& g) {
  if (c.mode_variances.size() != g.n_modes()) throw ParameterError("trace_report: covariance/grid size mismatch");
  const auto lam = g.eigenvalues();
  const std::size_t n = lam.size();
  TraceReport r;
  std::vector<double> terms(n);
  for (std::size_t k = 0; k < n; ++k) {
    terms[k] = std::sqrt(lam[k]) * c.mode_variances[k];
    r.trace_q += c.mode_variances[k];
    r.trace_sqrt_a_q += terms[k];
  }

  const std::size_t count = std::max<std::size_t>(2, n / 4);
  if (n < 2) {
    r.tail_exponent = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  const std::size_t first = n - std::min(count, n);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  bool vanishing_tail = true;
  for (std::size_t k = first; k < n; ++k) {
    if (terms[k] <= 0.0) continue;
    vanishing_tail = false;
    const double x = std::log(static_cast<double>(k + 1));
    const double y = std::log(terms[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (vanishing_tail) {
    r.tail_exponent = -std::numeric_limits<double>::infinity();
    r.h4_satisfied = true;
    return r;
  }
  if (m < 2) {
    r.tail_exponent = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  const double md = static_cast<double>(m);
  r.tail_exponent = (md * sxy - sx * sy) / (md * sxx - sx * sx);
  r.h4_satisfied = r.tail_exponent < -1.0;
  return r;
}

SpectralField sample_increment(const CovarianceSpec& c, double variance_scale, NoiseStream& s) {
  if (!(variance_scale >= 0.0)) throw ParameterError("sample_increment: variance scale must be >= 0");
  SpectralField out(c.mode_variances.size());
  s.fill_normals(out.coefficients());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= std::sqrt(variance_scale * c.mode_variances[k]);
  return out;
}

}  // namespace avgspde
