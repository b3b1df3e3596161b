#pragma once

// Reaction terms f, g of the slow-fast system, the problem description, and
// pseudospectral drift evaluation.

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "avgspde/noise.hpp"
#include "avgspde/spectral.hpp"

namespace avgspde {

/// Monomial coef * x^px * y^py.
struct PolyTerm {
  int px = 0;
  int py = 0;
  double coef = 0.0;
  friend bool operator==(const PolyTerm&, const PolyTerm&) = default;
};

/// Pointwise bivariate drift (x, y) -> d(x, y), stored as a polynomial.
/// The FitzHugh-Nagumo built-ins carry a tag so hot loops can use a fused kernel.
class DriftSpec {
 public:
  enum class Form { FhnSlow, FhnFast, Polynomial };

  /// f(u, v) = u - u^3 + v
  static DriftSpec fhn_slow();
  /// g(u, v) = u - v
  static DriftSpec fhn_fast();
  /// Arbitrary polynomial; like terms are merged and zero terms dropped.
  static DriftSpec polynomial(std::string name, std::vector<PolyTerm> terms);

  const std::string& name() const noexcept { return name_; }
  Form form() const noexcept { return form_; }
  const std::vector<PolyTerm>& terms() const noexcept { return terms_; }

  double operator()(double x, double y) const;
  double d_dx(double x, double y) const;
  double d_dy(double x, double y) const;

  bool depends_on_y() const;
  /// True when d(x, y) = x - y exactly, the form the exact OU fast stepper handles.
  bool is_unit_linear_relaxation() const;
  /// Total degree <= 1.
  bool is_affine() const;

  /// out[i] = d(x[i], y[i])
  void eval_nodes(std::span<const double> x, std::span<const double> y, std::span<double> out) const;

  /// "fhn_slow", "fhn_fast" or "poly:px:py:coef,..." (the form parse_drift accepts).
  std::string serialize() const;

 private:
  DriftSpec(std::string name, Form form, std::vector<PolyTerm> terms);

  std::string name_;
  Form form_;
  std::vector<PolyTerm> terms_;
};

/// Inverse of DriftSpec::serialize. Throws ParameterError on malformed input.
DriftSpec parse_drift(const std::string& text);

/// Declared constants of the structural hypotheses (checked, not inferred).
struct HypothesisConstants {
  double C_f = 1.0;
  double C_g = 1.0;
  double a = 1.0;
  double b = 1.0;
  double c = 9.0;
  double d = 1.0;
  double e = 1.0;
};

struct SlowFastProblem {
  EigenGrid grid;
  DriftSpec f;
  DriftSpec g;
  double sigma1 = 0.0;
  double sigma2 = 3.0;
  double epsilon = 0.1;
  CovarianceSpec Q1;
  CovarianceSpec Q2;
  SpectralField u0;
  SpectralField v0;
  HypothesisConstants constants;

  /// Throws ParameterError if epsilon <= 0, sigma2 == 0 or sizes disagree.
  void validate() const;
};

/// FitzHugh-Nagumo problem on (-L, L) with N modes, both covariances
/// (1 - d_xx)^(-p), zero initial data.
SlowFastProblem fhn_problem(double L, std::size_t N, double epsilon, double sigma1 = 0.0, double sigma2 = 3.0,
                            double q_power = 1.0);

/// Values above this (or non-finite) abort a trajectory.
inline constexpr double kBlowUpThreshold = 1.0e6;

/// Scratch-holding evaluator for pseudospectral products on the 2N+1 padded
/// grid. Not thread-safe; give each worker its own.
class DriftEvaluator {
 public:
  explicit DriftEvaluator(const EigenGrid& grid);

  /// N-mode projection of d(u, v). Throws BlowUpError (tagged with `time`)
  /// when a node value exceeds kBlowUpThreshold or is non-finite.
  void eval(const DriftSpec& d, const SpectralField& u, const SpectralField& v, SpectralField& out,
            double time = std::numeric_limits<double>::quiet_NaN());

  /// N-mode projection of m(x) z(x), with m given on the padded nodes.
  void product(std::span<const double> padded_multiplier, const SpectralField& z, SpectralField& out,
               double time = std::numeric_limits<double>::quiet_NaN());

  /// Padded node values of u (valid until the next call).
  std::span<const double> padded(const SpectralField& u);

  const EigenGrid& grid() const noexcept { return grid_; }

 private:
  EigenGrid grid_;
  std::vector<double> x_, y_, out_;
};

/// Functional form of DriftEvaluator::eval.
SpectralField eval_drift(const DriftSpec& d, const SpectralField& u, const SpectralField& v, const EigenGrid& g);

// Hypothesis audit ---------------------------------------------------------

struct AuditItem {
  std::string hypothesis;  // "H1".."H4"
  std::string check;       // short label of the inequality
  bool pass = false;
  std::string detail;
};

struct AuditReport {
  std::vector<AuditItem> items;
  // Smallest lattice c, over a grid of (a, b), making the H1 growth and
  // dissipativity inequalities hold.
  double fitted_a = 0.0;
  double fitted_b = 0.0;
  double fitted_c = 0.0;

  bool all_pass() const;
  /// One line per failed item, e.g. "H3 warn: C_g < lambda_1 fails (...)".
  std::vector<std::string> warnings() const;
};

/// Never throws for a valid problem: violations are reported as warnings.
AuditReport hypothesis_audit(const SlowFastProblem& p);

}  // namespace avgspde
