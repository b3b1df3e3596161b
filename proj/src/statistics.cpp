#include "avgspde/statistics.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>

#include "avgspde/errors.hpp"

namespace avgspde::stats {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double quantile(std::vector<double> x, double p) {
  if (x.empty()) throw ParameterError("quantile of an empty sample");
  std::sort(x.begin(), x.end());
  const double h = p * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

double correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("correlation: need two equal-length samples");
  const double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("linear_fit: need at least two points");
  LinearFit f;
  f.n = x.size();
  const double mx = mean(x), my = mean(y);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ParameterError("linear_fit: abscissae are all equal");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    const double s2 = rss / static_cast<double>(x.size() - 2);
    f.slope_se = std::sqrt(s2 / sxx);
    f.intercept_se = std::sqrt(s2 * (1.0 / static_cast<double>(x.size()) + mx * mx / sxx));
  }
  return f;
}

double t_critical(double alpha, double dof) {
  if (!(dof > 0.0)) return INFINITY;
  boost::math::students_t dist(dof);
  return boost::math::quantile(boost::math::complement(dist, alpha / 2.0));
}

double normal_cdf(double x, double mean, double variance) {
  return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  if (lambda < 0.3) {
    // Alternative series converges fast for small lambda:
    // 1 - sqrt(2 pi)/lambda sum exp(-(2k-1)^2 pi^2 / (8 lambda^2)).
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double a = (2.0 * k - 1.0) * M_PI;
      s += std::exp(-a * a / (8.0 * lambda * lambda));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * M_PI) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw ParameterError("ks_test: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)};
}

ChiSquareResult chi_square_normal(std::span<const double> samples, double variance, std::size_t bins) {
  if (samples.size() < bins * 5) throw ParameterError("chi_square_normal: too few samples for the bin count");
  boost::math::normal_distribution<double> nd(0.0, std::sqrt(variance));
  std::vector<double> edges(bins - 1);
  for (std::size_t b = 1; b < bins; ++b)
    edges[b - 1] = boost::math::quantile(nd, static_cast<double>(b) / static_cast<double>(bins));
  std::vector<double> counts(bins, 0.0);
  for (double x : samples) {
    const auto it = std::upper_bound(edges.begin(), edges.end(), x);
    counts[static_cast<std::size_t>(it - edges.begin())] += 1.0;
  }
  const double expected = static_cast<double>(samples.size()) / static_cast<double>(bins);
  ChiSquareResult r;
  for (double c : counts) r.statistic += (c - expected) * (c - expected) / expected;
  r.dof = static_cast<double>(bins - 1);
  boost::math::chi_squared_distribution<double> chi(r.dof);
  r.p_value = boost::math::cdf(boost::math::complement(chi, r.statistic));
  return r;
}

}  // namespace avgspde::stats
