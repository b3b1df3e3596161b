#include <doctest.h>

#include <cmath>
#include <vector>

#include "avgspde/errors.hpp"
#include "avgspde/noise.hpp"
#include "avgspde/random.hpp"

using namespace avgspde;

TEST_CASE("philox4x32-10 known answers") {
  using A = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are pure functions of their identity") {
  std::vector<double> a(9), b(9), c(9), d(9);
  NoiseStream s1(42, StreamRole::FastNoise, 3), s2(42, StreamRole::FastNoise, 3);
  s1.fill_normals(a);
  s2.fill_normals(b);
  CHECK(a == b);
  CHECK(s1.counter() == 5);
  NoiseStream other_role(42, StreamRole::SlowNoise, 3), other_rep(42, StreamRole::FastNoise, 4);
  other_role.fill_normals(c);
  other_rep.fill_normals(d);
  CHECK(a != c);
  CHECK(a != d);

  // resuming from a saved counter reproduces the tail
  NoiseStream s3(42, StreamRole::FastNoise, 3);
  s3.set_counter(5);
  std::vector<double> tail1(4), tail2(4);
  s1.fill_normals(tail1);
  s3.fill_normals(tail2);
  CHECK(tail1 == tail2);
  CHECK(role_name(StreamRole::DeviationNoise) == "deviation-noise");
}

TEST_CASE("normal draws have unit moments") {
  NoiseStream s(1, StreamRole::EstimatorNoise, 0);
  std::vector<double> x(400000);
  s.fill_normals(x);
  double m = 0, v = 0, k4 = 0;
  for (double z : x) m += z;
  m /= static_cast<double>(x.size());
  for (double z : x) {
    v += (z - m) * (z - m);
    k4 += std::pow(z - m, 4);
  }
  v /= static_cast<double>(x.size() - 1);
  k4 /= static_cast<double>(x.size());
  CHECK(std::fabs(m) < 5.0 / std::sqrt(4e5));
  CHECK(v == doctest::Approx(1.0).epsilon(0.01));
  CHECK(k4 == doctest::Approx(3.0).epsilon(0.03));
  const double u = s.uniform();
  CHECK((u > 0.0 && u < 1.0));
}

TEST_CASE("covariance mode variances") {
  const EigenGrid g(1.0, 8);
  const auto q1 = make_covariance(CovarianceKind::ResolventPower, 1.0, g);
  CHECK(q1.mode_variances[0] == doctest::Approx(1.0 / 3.4674011002723395));
  const auto cyl = make_covariance(CovarianceKind::Cylindrical, 0.0, g);
  for (double q : cyl.mode_variances) CHECK(q == 1.0);
  CHECK_THROWS_AS(make_covariance(CovarianceKind::Custom, 0.0, g), ParameterError);
  CHECK_THROWS_AS(make_custom_covariance({1.0, -1.0}), ParameterError);
  CHECK(kind_name(CovarianceKind::ResolventPower) == "resolvent");
}

TEST_CASE("H4 flag on p=1, p=2 and cylindrical covariances") {
  const EigenGrid g(1.0, 64);
  const auto p1 = trace_report(make_covariance(CovarianceKind::ResolventPower, 1.0, g), g);
  const auto p2 = trace_report(make_covariance(CovarianceKind::ResolventPower, 2.0, g), g);
  const auto cyl = trace_report(make_covariance(CovarianceKind::Cylindrical, 0.0, g), g);
  CHECK_FALSE(p1.h4_satisfied);
  CHECK(p2.h4_satisfied);
  CHECK_FALSE(cyl.h4_satisfied);
  CHECK(p1.tail_exponent == doctest::Approx(-1.0).epsilon(0.05));
  CHECK(p2.tail_exponent == doctest::Approx(-3.0).epsilon(0.05));
  CHECK(cyl.tail_exponent == doctest::Approx(1.0).epsilon(0.05));
  CHECK(cyl.trace_q == doctest::Approx(64.0));
}

TEST_CASE("sample_increment variances and stream advance") {
  const EigenGrid g(1.0, 4);
  const auto q = make_covariance(CovarianceKind::ResolventPower, 1.0, g);
  NoiseStream s(9, StreamRole::SlowNoise, 0);
  const std::size_t n = 100000;
  std::vector<double> acc(4, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = sample_increment(q, 0.5, s);
    for (std::size_t k = 0; k < 4; ++k) acc[k] += x[k] * x[k];
  }
  for (std::size_t k = 0; k < 4; ++k)
    CHECK(acc[k] / static_cast<double>(n) == doctest::Approx(0.5 * q.mode_variances[k]).epsilon(0.02));
  const auto before = s.counter();
  const auto zero = sample_increment(q, 0.0, s);
  CHECK(s.counter() == before + 2);
  CHECK(zero == g.zeros());
}
