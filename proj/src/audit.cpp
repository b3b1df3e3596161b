#include <algorithm>
#include <cmath>
#include <sstream>

#include "avgspde/dynamics.hpp"

namespace avgspde {

namespace {

constexpr int kLattice = 101;
constexpr double kLo = -3.0;
constexpr double kHi = 3.0;

double lattice(int i) { return kLo + (kHi - kLo) * i / (kLattice - 1); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct GrowthMaxima {
  // Smallest c for which each H1 inequality holds on the lattice.
  double c_growth;
  double c_dissipative;
  double c_monotone;
};

GrowthMaxima required_c(const DriftSpec& f, double a, double b, const std::vector<double>& fv) {
  GrowthMaxima m{-INFINITY, -INFINITY, -INFINITY};
  for (int i = 0; i < kLattice; ++i) {
    const double x = lattice(i);
    for (int j = 0; j < kLattice; ++j) {
      const double y = lattice(j);
      const double v = fv[i * kLattice + j];
      m.c_growth = std::max(m.c_growth, v * v - a * std::pow(x, 6) - b * y * y);
      m.c_dissipative = std::max(m.c_dissipative, v * x + a * x * x + b * x * y);
    }
  }
  for (int j = 0; j < kLattice; ++j)
    for (int i1 = 0; i1 < kLattice; ++i1)
      for (int i2 = 0; i2 < i1; ++i2) {
        const double dx = lattice(i1) - lattice(i2);
        const double df = fv[i1 * kLattice + j] - fv[i2 * kLattice + j];
        m.c_monotone = std::max(m.c_monotone, df * dx - a * dx * dx);
      }
  (void)f;
  return m;
}

}  // namespace

bool AuditReport::all_pass() const {
  return std::all_of(items.begin(), items.end(), [](const AuditItem& i) { return i.pass; });
}

std::vector<std::string> AuditReport::warnings() const {
  std::vector<std::string> out;
  for (const auto& i : items)
    if (!i.pass) out.push_back(i.hypothesis + " warn: " + i.check + " fails (" + i.detail + ")");
  return out;
}

AuditReport hypothesis_audit(const SlowFastProblem& p) {
  AuditReport r;
  const auto& k = p.constants;
  const DriftSpec& f = p.f;
  const DriftSpec& g = p.g;

  std::vector<double> fv(kLattice * kLattice);
  double max_fx = -INFINITY, max_fy = 0.0, max_gx = 0.0, max_gy = 0.0, c_g_ineq = -INFINITY;
  for (int i = 0; i < kLattice; ++i)
    for (int j = 0; j < kLattice; ++j) {
      const double x = lattice(i), y = lattice(j);
      fv[i * kLattice + j] = f(x, y);
      max_fx = std::max(max_fx, f.d_dx(x, y));
      max_fy = std::max(max_fy, std::fabs(f.d_dy(x, y)));
      max_gx = std::max(max_gx, std::fabs(g.d_dx(x, y)));
      max_gy = std::max(max_gy, std::fabs(g.d_dy(x, y)));
      c_g_ineq = std::max(c_g_ineq, g(x, y) * y + k.d * y * y - k.e * x * y);
    }

  auto add = [&](const char* h, const char* check, bool pass, std::string detail) {
    r.items.push_back({h, check, pass, std::move(detail)});
  };

  add("H1", "f'_x <= C_f", max_fx <= k.C_f, "lattice max " + fmt(max_fx) + ", C_f=" + fmt(k.C_f));
  add("H1", "|f'_y| <= C_f", max_fy <= k.C_f, "lattice max " + fmt(max_fy) + ", C_f=" + fmt(k.C_f));
  const auto declared = required_c(f, k.a, k.b, fv);
  add("H1", "|f|^2 <= a x^6 + b y^2 + c", declared.c_growth <= k.c,
      "needs c >= " + fmt(declared.c_growth) + ", declared " + fmt(k.c));
  add("H1", "f x <= -a x^2 - b x y + c", declared.c_dissipative <= k.c,
      "needs c >= " + fmt(declared.c_dissipative) + ", declared " + fmt(k.c));
  add("H1", "(f(x1,y)-f(x2,y))(x1-x2) <= a (x1-x2)^2 + c", declared.c_monotone <= k.c,
      "needs c >= " + fmt(declared.c_monotone) + ", declared " + fmt(k.c));

  const double lip = std::max(max_gx, max_gy);
  add("H2", "g Lipschitz with C_g", lip <= k.C_g, "lattice max slope " + fmt(lip) + ", C_g=" + fmt(k.C_g));
  add("H2", "g y <= -d y^2 + e x y", c_g_ineq <= 1e-12, "lattice max excess " + fmt(c_g_ineq));

  const double lambda1 = p.grid.lambda1();
  add("H3", "C_g < lambda_1", k.C_g < lambda1, "C_g=" + fmt(k.C_g) + ", lambda_1=" + fmt(lambda1));
  add("H3", "b >= e", k.b >= k.e, "b=" + fmt(k.b) + ", e=" + fmt(k.e));

  const auto t1 = trace_report(p.Q1, p.grid);
  const auto t2 = trace_report(p.Q2, p.grid);
  add("H4", "tr[A^1/2 Q1] < inf", t1.h4_satisfied,
      "partial sum " + fmt(t1.trace_sqrt_a_q) + ", tail exponent " + fmt(t1.tail_exponent));
  add("H4", "tr[A^1/2 Q2] < inf", t2.h4_satisfied,
      "partial sum " + fmt(t2.trace_sqrt_a_q) + ", tail exponent " + fmt(t2.tail_exponent));

  // Best (a, b) on a coarse grid for the H1 growth inequalities.
  double best = INFINITY;
  for (int ia = 1; ia <= 16; ++ia)
    for (int ib = 1; ib <= 16; ++ib) {
      const double a = 0.25 * ia, b = 0.25 * ib;
      double c = -INFINITY;
      for (int i = 0; i < kLattice; ++i) {
        const double x = lattice(i);
        for (int j = 0; j < kLattice; ++j) {
          const double y = lattice(j);
          const double v = fv[i * kLattice + j];
          c = std::max({c, v * v - a * std::pow(x, 6) - b * y * y, v * x + a * x * x + b * x * y});
        }
      }
      if (c < best) {
        best = c;
        r.fitted_a = a;
        r.fitted_b = b;
      }
    }
  r.fitted_c = std::max(best, required_c(f, r.fitted_a, r.fitted_b, fv).c_monotone);
  return r;
}

}  // namespace avgspde
