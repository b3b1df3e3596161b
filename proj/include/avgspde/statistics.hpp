#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace avgspde::stats {

double mean(std::span<const double> x);
/// Unbiased sample variance (n - 1 denominator); 0 for fewer than 2 values.
double variance(std::span<const double> x);
/// Linear-interpolation quantile (type 7), p in [0, 1].
double quantile(std::vector<double> x, double p);
double median(std::vector<double> x);
double correlation(std::span<const double> x, std::span<const double> y);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  std::size_t n = 0;
};

/// Ordinary least squares y = intercept + slope x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Two-sided Student-t critical value for confidence 1 - alpha.
double t_critical(double alpha, double dof);

double normal_cdf(double x, double mean = 0.0, double variance = 1.0);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against a continuous CDF; p-value from
/// the Kolmogorov limit law with Stephens' finite-n correction.
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

/// Goodness of fit of samples to N(0, variance) on `bins` equiprobable bins.
ChiSquareResult chi_square_normal(std::span<const double> samples, double variance, std::size_t bins = 20);

}  // namespace avgspde::stats
