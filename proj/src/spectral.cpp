#include "avgspde/spectral.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "avgspde/errors.hpp"
#include "avgspde/kernels/kernels.hpp"

namespace avgspde {

bool SpectralField::all_finite() const noexcept {
  for (double c : c_)
    if (!std::isfinite(c)) return false;
  return true;
}

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw ParameterError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
}

// sin(k pi j / (n + 1)), the node value of the k-th sine mode up to the 1/sqrt(L) factor.
double sine_node(std::size_t k, std::size_t j, std::size_t n) {
  return std::sin(std::numbers::pi * static_cast<double>(k) * static_cast<double>(j) / static_cast<double>(n + 1));
}

}  // namespace

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  require_same_size(size(), other.size(), "SpectralField +=");
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += other.c_[k];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  require_same_size(size(), other.size(), "SpectralField -=");
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= other.c_[k];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (double& c : c_) c *= s;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

EigenGrid::EigenGrid(double half_length, std::size_t n_modes) : L_(half_length), n_(n_modes) {
  if (!(half_length > 0.0) || !std::isfinite(half_length))
    throw ParameterError("EigenGrid: half-length L must be positive, got " + std::to_string(half_length));
  if (n_modes < 1) throw ParameterError("EigenGrid: number of modes N must be at least 1");

  h_ = 2.0 * L_ / static_cast<double>(n_ + 1);
  const double norm = std::sqrt(1.0 / L_);
  const std::size_t m = 2 * n_ + 1;
  const double hp = 2.0 * L_ / static_cast<double>(m + 1);

  auto t = std::make_shared<Tables>();
  t->eigenvalues.resize(n_);
  t->nodes.resize(n_);
  t->mid_weights.resize(n_);
  for (std::size_t k = 1; k <= n_; ++k) {
    const double wave = static_cast<double>(k) * std::numbers::pi / (2.0 * L_);
    t->eigenvalues[k - 1] = wave * wave;
    t->mid_weights[k - 1] = (k % 2 == 0) ? 0.0 : ((k % 4 == 1) ? norm : -norm);
  }
  for (std::size_t j = 1; j <= n_; ++j) t->nodes[j - 1] = -L_ + static_cast<double>(j) * h_;

  t->synthesis.resize(n_ * n_);
  t->analysis.resize(n_ * n_);
  for (std::size_t j = 1; j <= n_; ++j)
    for (std::size_t k = 1; k <= n_; ++k) {
      const double phi = norm * sine_node(k, j, n_);
      t->synthesis[(j - 1) * n_ + (k - 1)] = phi;
      t->analysis[(k - 1) * n_ + (j - 1)] = h_ * phi;
    }

  t->padded_synthesis.resize(m * n_);
  t->padded_analysis.resize(n_ * m);
  for (std::size_t j = 1; j <= m; ++j)
    for (std::size_t k = 1; k <= n_; ++k) {
      const double phi = norm * sine_node(k, j, m);
      t->padded_synthesis[(j - 1) * n_ + (k - 1)] = phi;
      t->padded_analysis[(k - 1) * m + (j - 1)] = hp * phi;
    }

  tables_ = std::move(t);
}

double EigenGrid::eigenfunction(std::size_t mode, double x) const {
  const double k = static_cast<double>(mode + 1);
  return std::sqrt(1.0 / L_) * std::sin(k * std::numbers::pi * (x + L_) / (2.0 * L_));
}

SpectralField EigenGrid::mode(std::size_t k, double amplitude) const {
  if (k < 1 || k > n_) throw ParameterError("EigenGrid::mode: index out of range");
  SpectralField f(n_);
  f[k - 1] = amplitude;
  return f;
}

std::vector<double> to_physical(const SpectralField& f, const EigenGrid& g) {
  require_same_size(f.size(), g.n_modes(), "to_physical");
  std::vector<double> out(g.n_modes());
  kernels::active().matvec(g.synthesis_table().data(), g.n_modes(), g.n_modes(), f.data(), out.data());
  return out;
}

SpectralField from_physical(std::span<const double> values, const EigenGrid& g) {
  require_same_size(values.size(), g.n_modes(), "from_physical");
  SpectralField out(g.n_modes());
  kernels::active().matvec(g.analysis_table().data(), g.n_modes(), g.n_modes(), values.data(), out.data());
  return out;
}

std::vector<double> to_padded_physical(const SpectralField& f, const EigenGrid& g) {
  require_same_size(f.size(), g.n_modes(), "to_padded_physical");
  std::vector<double> out(g.padded_nodes());
  kernels::active().matvec(g.padded_synthesis_table().data(), g.padded_nodes(), g.n_modes(), f.data(),
                           out.data());
  return out;
}

SpectralField from_padded_physical(std::span<const double> values, const EigenGrid& g) {
  require_same_size(values.size(), g.padded_nodes(), "from_padded_physical");
  SpectralField out(g.n_modes());
  kernels::active().matvec(g.padded_analysis_table().data(), g.n_modes(), g.padded_nodes(), values.data(),
                           out.data());
  return out;
}

std::vector<double> diagonal_factors(const DiagonalRule& rule, const EigenGrid& g) {
  const auto lam = g.eigenvalues();
  std::vector<double> out(lam.size());
  if (const auto* r = std::get_if<multiplier::ResolventPower>(&rule)) {
    if (!(r->power >= 0.0)) throw ParameterError("resolvent power must be non-negative");
    for (std::size_t k = 0; k < lam.size(); ++k) out[k] = std::pow(1.0 + lam[k], -r->power);
  } else if (const auto* s = std::get_if<multiplier::Semigroup>(&rule)) {
    if (!(s->time >= 0.0)) throw ParameterError("semigroup time must be non-negative");
    for (std::size_t k = 0; k < lam.size(); ++k) out[k] = std::exp(-lam[k] * s->time);
  } else {
    const auto& c = std::get<multiplier::Custom>(rule);
    require_same_size(c.factors.size(), lam.size(), "custom multiplier");
    out = c.factors;
  }
  return out;
}

SpectralField apply_diagonal(const SpectralField& f, const DiagonalRule& rule, const EigenGrid& g) {
  require_same_size(f.size(), g.n_modes(), "apply_diagonal");
  const auto factors = diagonal_factors(rule, g);
  SpectralField out(f.size());
  kernels::active().mul(factors.data(), f.data(), out.data(), f.size());
  return out;
}

double sobolev_norm(const SpectralField& f, const EigenGrid& g, double alpha) {
  require_same_size(f.size(), g.n_modes(), "sobolev_norm");
  const auto lam = g.eigenvalues();
  double acc = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) acc += std::pow(lam[k], alpha) * f[k] * f[k];
  return std::sqrt(acc);
}

double h_norm(const SpectralField& f) {
  return std::sqrt(kernels::active().dot(f.data(), f.data(), f.size()));
}

double mid_value(const SpectralField& f, const EigenGrid& g) {
  require_same_size(f.size(), g.n_modes(), "mid_value");
  return kernels::active().dot(f.data(), g.mid_weights().data(), f.size());
}

}  // namespace avgspde
