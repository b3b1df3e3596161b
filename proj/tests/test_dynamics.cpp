#include <doctest.h>

#include <cmath>

#include "avgspde/dynamics.hpp"
#include "avgspde/errors.hpp"

using namespace avgspde;

TEST_CASE("built-in drifts match their closed forms") {
  const auto f = DriftSpec::fhn_slow();
  const auto g = DriftSpec::fhn_fast();
  for (double x : {-2.0, -0.3, 0.0, 0.7, 1.9})
    for (double y : {-1.0, 0.0, 0.4}) {
      CHECK(f(x, y) == doctest::Approx(x - x * x * x + y));
      CHECK(f.d_dx(x, y) == doctest::Approx(1.0 - 3.0 * x * x));
      CHECK(f.d_dy(x, y) == doctest::Approx(1.0));
      CHECK(g(x, y) == doctest::Approx(x - y));
    }
  CHECK(g.is_unit_linear_relaxation());
  CHECK_FALSE(f.is_unit_linear_relaxation());
  CHECK(g.is_affine());
  CHECK_FALSE(f.is_affine());
  CHECK(f.depends_on_y());
  const auto slow_only = DriftSpec::polynomial("cubic", {{1, 0, 1.0}, {3, 0, -1.0}});
  CHECK_FALSE(slow_only.depends_on_y());
}

TEST_CASE("polynomial canonical form and serialization") {
  const auto p = DriftSpec::polynomial("p", {{1, 0, 1.0}, {1, 0, 0.5}, {0, 1, 0.0}, {0, 1, -1.0}});
  CHECK(p.terms().size() == 2);
  CHECK(p(2.0, 3.0) == doctest::Approx(1.5 * 2.0 - 3.0));
  // built-in tags survive a round trip; polynomials come back equal
  CHECK(parse_drift(DriftSpec::fhn_slow().serialize()).form() == DriftSpec::Form::FhnSlow);
  CHECK(parse_drift("fhn_fast").is_unit_linear_relaxation());
  const auto q = parse_drift(p.serialize());
  CHECK(q.terms() == p.terms());
  CHECK(parse_drift("poly:1:0:1,0:1:-1").is_unit_linear_relaxation());
  CHECK_THROWS_AS(parse_drift("poly:1:x:1"), ParameterError);
  CHECK_THROWS_AS(parse_drift("sine"), ParameterError);
  CHECK(parse_drift("poly:")(1.3, 2.0) == 0.0);  // zero drift
}

TEST_CASE("eval_drift examples") {
  const EigenGrid g(1.0, 16);
  const auto f = DriftSpec::fhn_slow();
  const auto zero = g.zeros();
  CHECK(eval_drift(f, zero, zero, g) == zero);

  const auto lin = eval_drift(f, zero, g.mode(1), g);
  for (std::size_t k = 0; k < 16; ++k) CHECK(std::fabs(lin[k] - (k == 0 ? 1.0 : 0.0)) <= 1e-12);

  // u = 0.5 phi_1: cube splits into the first and third modes
  const auto r = eval_drift(f, g.mode(1, 0.5), zero, g);
  CHECK(r[0] == doctest::Approx(0.40625).epsilon(1e-12));
  CHECK(r[2] == doctest::Approx(0.03125).epsilon(1e-12));
  for (std::size_t k : {1u, 3u, 4u, 5u, 10u}) CHECK(std::fabs(r[k]) <= 1e-12);
}

TEST_CASE("pseudospectral linear drift equals spectral evaluation") {
  const EigenGrid g(1.3, 20);
  const auto d = DriftSpec::polynomial("lin", {{1, 0, 0.7}, {0, 1, -2.5}});
  SpectralField u(20), v(20);
  for (std::size_t k = 0; k < 20; ++k) {
    u[k] = std::sin(1.0 + static_cast<double>(k));
    v[k] = std::cos(2.0 * static_cast<double>(k)) / (1.0 + static_cast<double>(k));
  }
  const auto r = eval_drift(d, u, v, g);
  for (std::size_t k = 0; k < 20; ++k) CHECK(std::fabs(r[k] - (0.7 * u[k] - 2.5 * v[k])) <= 1e-10);
}

TEST_CASE("cubic of a low-mode field is alias free") {
  // u = a phi_1 + b phi_3 at L = 1; phi_k = sin(k pi (x+1)/2) so the cube
  // expands in sin(m pi (x+1)/2), m odd <= 9. Compare with quadrature.
  const std::size_t N = 30;
  const EigenGrid g(1.0, N);
  const auto d = DriftSpec::polynomial("cube", {{3, 0, 1.0}});
  SpectralField u(N);
  u[0] = 0.8;
  u[2] = -0.3;
  u[4] = 0.2;  // modes <= N/3
  const auto r = eval_drift(d, u, g.zeros(), g);
  // reference: fine midpoint quadrature of u^3 phi_k
  const int M = 20000;
  for (std::size_t k = 0; k < 12; ++k) {
    double s = 0.0;
    for (int i = 0; i < M; ++i) {
      const double x = -1.0 + (i + 0.5) * 2.0 / M;
      double ux = 0.0;
      for (std::size_t m = 0; m < N; ++m)
        if (u[m] != 0.0) ux += u[m] * g.eigenfunction(m, x);
      s += ux * ux * ux * g.eigenfunction(k, x);
    }
    CHECK(std::fabs(r[k] - s * 2.0 / M) <= 1e-8);
  }
}

TEST_CASE("blow-up detection carries the time") {
  const EigenGrid g(1.0, 4);
  DriftEvaluator ev(g);
  SpectralField out(4);
  try {
    ev.eval(DriftSpec::fhn_slow(), g.mode(1, 1e3), g.zeros(), out, 2.5);
    FAIL("expected BlowUpError");
  } catch (const BlowUpError& e) {
    CHECK(e.time() == 2.5);
  }
  SpectralField bad = g.zeros();
  bad[1] = NAN;
  CHECK_THROWS_AS(ev.eval(DriftSpec::fhn_fast(), bad, g.zeros(), out, 0.0), BlowUpError);
}

TEST_CASE("problem validation") {
  auto p = fhn_problem(1.0, 8, 0.1);
  CHECK_NOTHROW(p.validate());
  p.epsilon = 0.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p = fhn_problem(1.0, 8, 0.1);
  p.sigma2 = 0.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p = fhn_problem(1.0, 8, 0.1);
  p.u0 = SpectralField(7);
  CHECK_THROWS_AS(p.validate(), ParameterError);
}

TEST_CASE("hypothesis audit") {
  SUBCASE("FHN at L=1: H3 holds, H4 fails for p=1") {
    const auto r = hypothesis_audit(fhn_problem(1.0, 16, 0.1));
    bool h3 = true, h4 = true;
    for (const auto& i : r.items) {
      if (i.hypothesis == "H3") h3 = h3 && i.pass;
      if (i.hypothesis == "H4") h4 = h4 && i.pass;
    }
    CHECK(h3);
    CHECK_FALSE(h4);
    for (const auto& w : r.warnings()) CHECK(w.rfind("H4 warn: ", 0) == 0);
    CHECK(r.fitted_c > 0.0);
  }
  SUBCASE("L=1.8 warns on H3") {
    const auto w = hypothesis_audit(fhn_problem(1.8, 16, 0.1)).warnings();
    bool found = false;
    for (const auto& s : w) found = found || s.rfind("H3 warn: C_g < lambda_1 fails", 0) == 0;
    CHECK(found);
  }
  SUBCASE("p=2 covariances satisfy H4 and everything passes at L=1") {
    const auto r = hypothesis_audit(fhn_problem(1.0, 16, 0.1, 0.0, 3.0, 2.0));
    CHECK(r.all_pass());
    CHECK(r.warnings().empty());
  }
}
