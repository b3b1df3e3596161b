#pragma once

// Diagonal Q-Wiener / cylindrical noise in the eigenbasis.

#include <cstddef>
#include <string_view>
#include <vector>

#include "avgspde/random.hpp"
#include "avgspde/spectral.hpp"

namespace avgspde {

enum class CovarianceKind { ResolventPower, Cylindrical, Custom };

std::string_view kind_name(CovarianceKind kind);

/// Mode variances q_k of a covariance operator diagonal in the eigenbasis.
struct CovarianceSpec {
  CovarianceKind kind = CovarianceKind::Cylindrical;
  double power = 0.0;  // only meaningful for ResolventPower
  std::vector<double> mode_variances;
};

/// ResolventPower: q_k = (1 + lambda_k)^(-p); Cylindrical: q_k = 1.
/// Custom is rejected here; use make_custom_covariance.
CovarianceSpec make_covariance(CovarianceKind kind, double p, const EigenGrid& g);
CovarianceSpec make_custom_covariance(std::vector<double> mode_variances);

struct TraceReport {
  double trace_q = 0.0;         // sum q_k over represented modes
  double trace_sqrt_a_q = 0.0;  // sum sqrt(lambda_k) q_k
  double tail_exponent = 0.0;   // log-log slope of sqrt(lambda_k) q_k over the last quarter of modes
  bool h4_satisfied = false;    // tail exponent < -1: the full series converges
};

TraceReport trace_report(const CovarianceSpec& c, const EigenGrid& g);

/// Coefficients distributed N(0, variance_scale * q_k), independent across modes.
/// Always advances the stream, even when variance_scale is zero.
SpectralField sample_increment(const CovarianceSpec& c, double variance_scale, NoiseStream& s);

}  // namespace avgspde
