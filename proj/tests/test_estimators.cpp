#include <doctest.h>

#include <cmath>

#include "avgspde/errors.hpp"
#include "avgspde/estimators.hpp"

using namespace avgspde;

TEST_CASE("closed-form FitzHugh-Nagumo averaged drift") {
  const EigenGrid g(1.0, 16);
  const auto fb = fbar_closed_fhn(g.mode(1, 0.5), g);
  CHECK(fb[0] == doctest::Approx(0.55045).epsilon(1e-5));
  CHECK(fb[2] == doctest::Approx(0.03125).epsilon(1e-10));
  CHECK(std::fabs(fb[1]) <= 1e-12);
}

TEST_CASE("closed-form deviation noise factor") {
  const EigenGrid g(1.0, 8);
  const auto q = make_covariance(CovarianceKind::ResolventPower, 1.0, g);
  const auto sb = sqrtB_closed_fhn(q, g);
  CHECK(sb[0] * sb[0] == doctest::Approx(0.21589).epsilon(1e-4));
  for (std::size_t k = 0; k < 8; ++k) CHECK(sb[k] >= 0.0);
  const auto half = sqrtB_closed_fhn(q, g, -1.5);
  CHECK(half[0] == doctest::Approx(0.5 * sb[0]));
}

TEST_CASE("averaged model selection") {
  auto p = fhn_problem(1.0, 8, 0.1);
  CHECK(averaged_model_for(p, 1).provenance == AveragedModel::Provenance::ClosedFormFhn);
  CHECK(provenance_name(AveragedModel::Provenance::Estimated) == "estimated");

  // closed-form derivative 1 - 3u^2 on the padded nodes
  const auto m = fhn_closed_model(p);
  DriftEvaluator ev(p.grid);
  std::vector<double> mult;
  const auto u = p.grid.mode(1, 0.5);
  m.fbar_prime(u, mult, ev);
  const auto x = ev.padded(u);
  REQUIRE(mult.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(mult[i] == doctest::Approx(1.0 - 3.0 * x[i] * x[i]));
}

TEST_CASE("ergodic fbar estimate agrees with the closed form") {
  const EigenGrid g(1.0, 8);
  const auto q = make_covariance(CovarianceKind::ResolventPower, 1.0, g);
  const auto u = g.mode(1, 0.5);
  NoiseStream s(21, StreamRole::EstimatorNoise, 0);
  const auto est = estimate_fbar(DriftSpec::fhn_slow(), DriftSpec::fhn_fast(), u, 3.0, q, g, 5.0, 400.0, 0.01, s);
  const auto exact = fbar_closed_fhn(u, g);
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK(est.std_error[k] > 0.0);
    CHECK(std::fabs(est.mean[k] - exact[k]) <= 3.0 * est.std_error[k] + 1e-12);
  }
}

TEST_CASE("psd square root") {
  // eigenvalues 3 and -1
  const std::vector<double> m{1.0, 2.0, 2.0, 1.0};
  std::size_t clipped = 0;
  const auto s = psd_sqrt(m, 2, &clipped);
  CHECK(clipped == 1);
  // s^2 = projection onto the positive eigenspace: 1.5 * [[1,1],[1,1]]
  const double a = s[0] * s[0] + s[1] * s[2];
  const double b = s[0] * s[1] + s[1] * s[3];
  CHECK(a == doctest::Approx(1.5));
  CHECK(b == doctest::Approx(1.5));
  CHECK(s[1] == doctest::Approx(s[2]));

  const auto d = psd_sqrt({4.0, 0.0, 0.0, 9.0}, 2, &clipped);
  CHECK(clipped == 0);
  CHECK(d[0] == doctest::Approx(2.0));
  CHECK(d[3] == doctest::Approx(3.0));
  CHECK_THROWS_AS(psd_sqrt({1.0, 2.0, 3.0}, 2), ParameterError);
}

TEST_CASE("Green-Kubo B estimate on a small grid") {
  const EigenGrid g(1.0, 3);
  const auto q = make_covariance(CovarianceKind::ResolventPower, 1.0, g);
  BEstimateSettings st;
  st.replicas = 16;
  const auto b = estimate_B(DriftSpec::fhn_slow(), DriftSpec::fhn_fast(), g.zeros(), 3.0, q, g, st, 5);
  const auto exact = sqrtB_closed_fhn(q, g);
  REQUIRE(b.n == 3);
  CHECK(b.converged);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(b.at(i, j) == doctest::Approx(b.at(j, i)));
      const double want = i == j ? exact[i] * exact[i] : 0.0;
      CHECK(std::fabs(b.at(i, j) - want) <= 4.0 * b.se(i, j));
    }
}
