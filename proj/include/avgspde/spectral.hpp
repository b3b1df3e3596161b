#pragma once

// Dirichlet eigenbasis of d^2/dx^2 on (-L, L) and exact sine transforms
// between N interior nodes and N eigen-coefficients.
//
//   lambda_k = (k pi / 2L)^2,  phi_k(x) = sqrt(1/L) sin(k pi (x + L) / 2L),
//   x_j = -L + j h,  h = 2L / (N + 1),  j = 1..N.
//
// With this node set h * sum_j phi_k(x_j) phi_m(x_j) = delta_km exactly, so
// the node<->coefficient maps are inverse to each other.

#include <cstddef>
#include <memory>
#include <span>
#include <variant>
#include <vector>

namespace avgspde {

/// Coefficients c_1..c_N of a function in the eigenbasis.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(std::size_t n, double fill = 0.0) : c_(n, fill) {}
  explicit SpectralField(std::vector<double> coefficients) : c_(std::move(coefficients)) {}

  std::size_t size() const noexcept { return c_.size(); }
  double& operator[](std::size_t k) { return c_[k]; }
  double operator[](std::size_t k) const { return c_[k]; }
  double* data() noexcept { return c_.data(); }
  const double* data() const noexcept { return c_.data(); }
  std::span<double> coefficients() noexcept { return c_; }
  std::span<const double> coefficients() const noexcept { return c_; }
  const std::vector<double>& vector() const noexcept { return c_; }

  bool all_finite() const noexcept;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double s);

  friend bool operator==(const SpectralField&, const SpectralField&) = default;

 private:
  std::vector<double> c_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

class EigenGrid {
 public:
  /// Throws ParameterError unless L > 0 and N >= 1.
  EigenGrid(double half_length, std::size_t n_modes);

  double half_length() const noexcept { return L_; }
  std::size_t n_modes() const noexcept { return n_; }
  double spacing() const noexcept { return h_; }
  std::span<const double> eigenvalues() const noexcept { return tables_->eigenvalues; }
  std::span<const double> nodes() const noexcept { return tables_->nodes; }
  double lambda1() const noexcept { return tables_->eigenvalues.front(); }

  /// phi_k(x_j), zero-based j and k.
  double basis(std::size_t node, std::size_t mode) const { return tables_->synthesis[node * n_ + mode]; }

  /// phi_k(x) at an arbitrary point of [-L, L].
  double eigenfunction(std::size_t mode, double x) const;

  /// phi_k(0) for every mode; mid-values are dot products with this.
  std::span<const double> mid_weights() const noexcept { return tables_->mid_weights; }

  // Row-major tables used by the transforms.
  //   synthesis:        N  x N   (node, mode)
  //   analysis:         N  x N   (mode, node), pre-scaled by h
  //   padded_synthesis: M  x N   on the M = 2N+1 node grid
  //   padded_analysis:  N  x M   pre-scaled by h' = 2L/(M+1)
  std::span<const double> synthesis_table() const noexcept { return tables_->synthesis; }
  std::span<const double> analysis_table() const noexcept { return tables_->analysis; }
  std::span<const double> padded_synthesis_table() const noexcept { return tables_->padded_synthesis; }
  std::span<const double> padded_analysis_table() const noexcept { return tables_->padded_analysis; }
  std::size_t padded_nodes() const noexcept { return 2 * n_ + 1; }

  SpectralField zeros() const { return SpectralField(n_); }

  /// Coefficient vector of amplitude * phi_k (k is one-based).
  SpectralField mode(std::size_t k, double amplitude = 1.0) const;

 private:
  struct Tables {
    std::vector<double> eigenvalues, nodes, synthesis, analysis, padded_synthesis, padded_analysis, mid_weights;
  };

  double L_;
  std::size_t n_;
  double h_;
  std::shared_ptr<const Tables> tables_;
};

/// Node values sum_k c_k phi_k(x_j). Throws ParameterError on length mismatch.
std::vector<double> to_physical(const SpectralField& f, const EigenGrid& g);

/// c_k = h sum_j values_j phi_k(x_j). Throws ParameterError on length mismatch.
SpectralField from_physical(std::span<const double> values, const EigenGrid& g);

/// Values on the 2N+1 padded node grid of a field with N coefficients.
std::vector<double> to_padded_physical(const SpectralField& f, const EigenGrid& g);

/// Projection of padded-grid values back to the first N modes.
SpectralField from_padded_physical(std::span<const double> values, const EigenGrid& g);

namespace multiplier {
/// (1 + lambda_k)^(-p)
struct ResolventPower {
  double power;
};
/// exp(-lambda_k t)
struct Semigroup {
  double time;
};
/// Explicit per-mode factors.
struct Custom {
  std::vector<double> factors;
};
}  // namespace multiplier

using DiagonalRule = std::variant<multiplier::ResolventPower, multiplier::Semigroup, multiplier::Custom>;

/// Per-mode factors rule(lambda_k).
std::vector<double> diagonal_factors(const DiagonalRule& rule, const EigenGrid& g);

/// c_k <- rule(lambda_k) c_k
SpectralField apply_diagonal(const SpectralField& f, const DiagonalRule& rule, const EigenGrid& g);

/// (sum_k lambda_k^alpha c_k^2)^(1/2); alpha = 0 is the L2 norm.
double sobolev_norm(const SpectralField& f, const EigenGrid& g, double alpha);

/// L2 norm (orthonormal basis, so no grid needed).
double h_norm(const SpectralField& f);

/// u(0) = sum_k c_k phi_k(0)
double mid_value(const SpectralField& f, const EigenGrid& g);

}  // namespace avgspde
