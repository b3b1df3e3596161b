#include "avgspde/dynamics.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "avgspde/errors.hpp"
#include "avgspde/kernels/kernels.hpp"

namespace avgspde {

namespace {

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

std::vector<PolyTerm> canonical(std::vector<PolyTerm> terms) {
  for (const auto& t : terms)
    if (t.px < 0 || t.py < 0) throw ParameterError("polynomial drift: negative exponent");
  std::sort(terms.begin(), terms.end(),
            [](const PolyTerm& a, const PolyTerm& b) { return a.px != b.px ? a.px < b.px : a.py < b.py; });
  std::vector<PolyTerm> merged;
  for (const auto& t : terms) {
    if (!merged.empty() && merged.back().px == t.px && merged.back().py == t.py)
      merged.back().coef += t.coef;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const PolyTerm& t) { return t.coef == 0.0; });
  return merged;
}

std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

DriftSpec::DriftSpec(std::string name, Form form, std::vector<PolyTerm> terms)
    : name_(std::move(name)), form_(form), terms_(canonical(std::move(terms))) {}

DriftSpec DriftSpec::fhn_slow() { return DriftSpec("fhn_slow", Form::FhnSlow, {{1, 0, 1.0}, {3, 0, -1.0}, {0, 1, 1.0}}); }

DriftSpec DriftSpec::fhn_fast() { return DriftSpec("fhn_fast", Form::FhnFast, {{1, 0, 1.0}, {0, 1, -1.0}}); }

DriftSpec DriftSpec::polynomial(std::string name, std::vector<PolyTerm> terms) {
  return DriftSpec(std::move(name), Form::Polynomial, std::move(terms));
}

double DriftSpec::operator()(double x, double y) const {
  double acc = 0.0;
  for (const auto& t : terms_) acc += t.coef * ipow(x, t.px) * ipow(y, t.py);
  return acc;
}

double DriftSpec::d_dx(double x, double y) const {
  double acc = 0.0;
  for (const auto& t : terms_)
    if (t.px > 0) acc += t.coef * t.px * ipow(x, t.px - 1) * ipow(y, t.py);
  return acc;
}

double DriftSpec::d_dy(double x, double y) const {
  double acc = 0.0;
  for (const auto& t : terms_)
    if (t.py > 0) acc += t.coef * t.py * ipow(x, t.px) * ipow(y, t.py - 1);
  return acc;
}

bool DriftSpec::depends_on_y() const {
  return std::any_of(terms_.begin(), terms_.end(), [](const PolyTerm& t) { return t.py > 0; });
}

bool DriftSpec::is_unit_linear_relaxation() const {
  return terms_ == canonical({{1, 0, 1.0}, {0, 1, -1.0}});
}

bool DriftSpec::is_affine() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const PolyTerm& t) { return t.px + t.py <= 1; });
}

void DriftSpec::eval_nodes(std::span<const double> x, std::span<const double> y, std::span<double> out) const {
  if (form_ == Form::FhnSlow) {
    kernels::active().fhn_slow(x.data(), y.data(), out.data(), out.size());
    return;
  }
  if (form_ == Form::FhnFast) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
    return;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)(x[i], y[i]);
}

std::string DriftSpec::serialize() const {
  if (form_ == Form::FhnSlow) return "fhn_slow";
  if (form_ == Form::FhnFast) return "fhn_fast";
  std::string s = "poly:";
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(terms_[i].px) + ':' + std::to_string(terms_[i].py) + ':' + format_double(terms_[i].coef);
  }
  return s;
}

DriftSpec parse_drift(const std::string& text) {
  if (text == "fhn_slow") return DriftSpec::fhn_slow();
  if (text == "fhn_fast") return DriftSpec::fhn_fast();
  if (text.rfind("poly:", 0) != 0)
    throw ParameterError("unknown drift '" + text + "' (expected fhn_slow, fhn_fast or poly:px:py:coef,...)");
  std::vector<PolyTerm> terms;
  std::stringstream ss(text.substr(5));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    PolyTerm t;
    const auto a = item.find(':');
    const auto b = a == std::string::npos ? a : item.find(':', a + 1);
    if (b == std::string::npos) throw ParameterError("malformed polynomial term '" + item + "'");
    try {
      std::size_t used = 0;
      t.px = std::stoi(item.substr(0, a));
      t.py = std::stoi(item.substr(a + 1, b - a - 1));
      const std::string c = item.substr(b + 1);
      t.coef = std::stod(c, &used);
      if (used != c.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParameterError("malformed polynomial term '" + item + "'");
    }
    terms.push_back(t);
  }
  return DriftSpec::polynomial("poly", std::move(terms));
}

void SlowFastProblem::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ParameterError("epsilon must be positive");
  if (sigma2 == 0.0 || !std::isfinite(sigma2)) throw ParameterError("sigma2 must be non-zero");
  if (!std::isfinite(sigma1)) throw ParameterError("sigma1 must be finite");
  const std::size_t n = grid.n_modes();
  if (Q1.mode_variances.size() != n || Q2.mode_variances.size() != n)
    throw ParameterError("covariance size does not match the grid");
  if (u0.size() != n || v0.size() != n) throw ParameterError("initial data size does not match the grid");
  if (!u0.all_finite() || !v0.all_finite()) throw ParameterError("initial data must be finite");
}

SlowFastProblem fhn_problem(double L, std::size_t N, double epsilon, double sigma1, double sigma2, double q_power) {
  EigenGrid grid(L, N);
  SlowFastProblem p{grid,
                    DriftSpec::fhn_slow(),
                    DriftSpec::fhn_fast(),
                    sigma1,
                    sigma2,
                    epsilon,
                    make_covariance(CovarianceKind::ResolventPower, q_power, grid),
                    make_covariance(CovarianceKind::ResolventPower, q_power, grid),
                    grid.zeros(),
                    grid.zeros(),
                    HypothesisConstants{}};
  p.validate();
  return p;
}

DriftEvaluator::DriftEvaluator(const EigenGrid& grid)
    : grid_(grid), x_(grid.padded_nodes()), y_(grid.padded_nodes()), out_(grid.padded_nodes()) {}

namespace {

void check_nodes(std::span<const double> v, double time) {
  if (kernels::active().max_abs(v.data(), v.size()) > kBlowUpThreshold) throw BlowUpError(time);
}

}  // namespace

void DriftEvaluator::eval(const DriftSpec& d, const SpectralField& u, const SpectralField& v, SpectralField& out,
                          double time) {
  const std::size_t n = grid_.n_modes();
  const std::size_t m = grid_.padded_nodes();
  if (u.size() != n || v.size() != n) throw ParameterError("eval_drift: field/grid size mismatch");
  const auto& k = kernels::active();
  k.matvec(grid_.padded_synthesis_table().data(), m, n, u.data(), x_.data());
  k.matvec(grid_.padded_synthesis_table().data(), m, n, v.data(), y_.data());
  check_nodes(x_, time);
  check_nodes(y_, time);
  d.eval_nodes(x_, y_, out_);
  check_nodes(out_, time);
  if (out.size() != n) out = SpectralField(n);
  k.matvec(grid_.padded_analysis_table().data(), n, m, out_.data(), out.data());
}

void DriftEvaluator::product(std::span<const double> padded_multiplier, const SpectralField& z, SpectralField& out,
                             double time) {
  const std::size_t n = grid_.n_modes();
  const std::size_t m = grid_.padded_nodes();
  if (padded_multiplier.size() != m || z.size() != n) throw ParameterError("product: size mismatch");
  const auto& k = kernels::active();
  k.matvec(grid_.padded_synthesis_table().data(), m, n, z.data(), x_.data());
  k.mul(padded_multiplier.data(), x_.data(), out_.data(), m);
  check_nodes(out_, time);
  if (out.size() != n) out = SpectralField(n);
  k.matvec(grid_.padded_analysis_table().data(), n, m, out_.data(), out.data());
}

std::span<const double> DriftEvaluator::padded(const SpectralField& u) {
  if (u.size() != grid_.n_modes()) throw ParameterError("padded: size mismatch");
  kernels::active().matvec(grid_.padded_synthesis_table().data(), grid_.padded_nodes(), grid_.n_modes(), u.data(),
                           x_.data());
  return x_;
}

SpectralField eval_drift(const DriftSpec& d, const SpectralField& u, const SpectralField& v, const EigenGrid& g) {
  DriftEvaluator ev(g);
  SpectralField out(g.n_modes());
  ev.eval(d, u, v, out);
  return out;
}

}  // namespace avgspde
