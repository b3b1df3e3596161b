#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "avgspde/kernels/kernels.hpp"

using namespace avgspde::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

double rel_err(double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); }

}  // namespace

TEST_CASE("active kernel table is complete") {
  const auto& k = active();
  CHECK((k.name == "scalar" || k.name == "avx2"));
  CHECK(k.matvec != nullptr);
  CHECK(k.max_abs != nullptr);
}

TEST_CASE("scalar reference kernels") {
  const auto& s = scalar_table();
  const double a[6] = {1, 2, 3, 4, 5, 6}, x[3] = {1, 0, -1};
  double y[2];
  s.matvec(a, 2, 3, x, y);
  CHECK(y[0] == -2.0);
  CHECK(y[1] == -2.0);
  CHECK(s.dot(a, a, 3) == 14.0);
  const double u[2] = {2.0, -1.0}, v[2] = {1.0, 1.0};
  double out[2];
  s.fhn_slow(u, v, out, 2);
  CHECK(out[0] == -5.0);
  CHECK(out[1] == 1.0);
  const double bad[3] = {1.0, std::numeric_limits<double>::quiet_NaN(), 2.0};
  CHECK(std::isinf(s.max_abs(bad, 3)));
  CHECK(s.max_abs(a, 0) == 0.0);
}

TEST_CASE("AVX2 kernels match the scalar reference") {
  const KernelTable* v = avx2_table();
  if (!v) {
    MESSAGE("AVX2 not available; equivalence test skipped");
    return;
  }
  const auto& s = scalar_table();
  std::mt19937_64 rng(99);
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 33u, 64u, 67u, 129u}) {
    CAPTURE(n);
    const auto a = random_vec(rng, n), b = random_vec(rng, n), c = random_vec(rng, n), d = random_vec(rng, n);
    const auto e = random_vec(rng, n), f = random_vec(rng, n);
    CHECK(rel_err(v->dot(a.data(), b.data(), n), s.dot(a.data(), b.data(), n)) <= 1e-13);

    std::vector<double> o1(n), o2(n);
    v->exp_update(a.data(), b.data(), c.data(), d.data(), e.data(), f.data(), o1.data(), n);
    s.exp_update(a.data(), b.data(), c.data(), d.data(), e.data(), f.data(), o2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(rel_err(o1[i], o2[i]) <= 1e-14);

    const auto big = random_vec(rng, n, 3.0);
    v->fhn_slow(big.data(), a.data(), o1.data(), n);
    s.fhn_slow(big.data(), a.data(), o2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(rel_err(o1[i], o2[i]) <= 1e-14);

    v->mul(a.data(), b.data(), o1.data(), n);
    s.mul(a.data(), b.data(), o2.data(), n);
    CHECK(o1 == o2);

    CHECK(v->max_abs(big.data(), n) == s.max_abs(big.data(), n));
    if (n > 0) {
      auto poisoned = big;
      poisoned[n / 2] = std::numeric_limits<double>::quiet_NaN();
      CHECK(std::isinf(v->max_abs(poisoned.data(), n)));
      poisoned[n / 2] = -std::numeric_limits<double>::infinity();
      CHECK(std::isinf(v->max_abs(poisoned.data(), n)));
    }

    // matvec shapes around the 4-row blocking
    for (std::size_t rows : {1u, 3u, 4u, 5u, 9u}) {
      const auto m = random_vec(rng, rows * n);
      std::vector<double> y1(rows), y2(rows);
      v->matvec(m.data(), rows, n, a.data(), y1.data());
      s.matvec(m.data(), rows, n, a.data(), y2.data());
      for (std::size_t r = 0; r < rows; ++r) CHECK(rel_err(y1[r], y2[r]) <= 1e-13);
    }
  }
}
