// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include "avgspde/kernels/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <limits>

namespace avgspde::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void matvec(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  std::size_t r = 0;
  // Four rows at a time share each load of x.
  for (; r + 4 <= rows; r += 4) {
    const double* r0 = a + r * cols;
    const double* r1 = r0 + cols;
    const double* r2 = r1 + cols;
    const double* r3 = r2 + cols;
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d xv = _mm256_loadu_pd(x + c);
      s0 = _mm256_fmadd_pd(_mm256_loadu_pd(r0 + c), xv, s0);
      s1 = _mm256_fmadd_pd(_mm256_loadu_pd(r1 + c), xv, s1);
      s2 = _mm256_fmadd_pd(_mm256_loadu_pd(r2 + c), xv, s2);
      s3 = _mm256_fmadd_pd(_mm256_loadu_pd(r3 + c), xv, s3);
    }
    double t0 = hsum(s0), t1 = hsum(s1), t2 = hsum(s2), t3 = hsum(s3);
    for (; c < cols; ++c) {
      t0 += r0[c] * x[c];
      t1 += r1[c] * x[c];
      t2 += r2[c] * x[c];
      t3 += r3[c] * x[c];
    }
    y[r] = t0;
    y[r + 1] = t1;
    y[r + 2] = t2;
    y[r + 3] = t3;
  }
  for (; r < rows; ++r) y[r] = dot(a + r * cols, x, cols);
}

void exp_update(const double* decay, const double* state, const double* gain, const double* drive,
                const double* scale, const double* xi, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_mul_pd(_mm256_loadu_pd(decay + i), _mm256_loadu_pd(state + i));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(gain + i), _mm256_loadu_pd(drive + i), acc);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(scale + i), _mm256_loadu_pd(xi + i), acc);
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i < n; ++i) out[i] = decay[i] * state[i] + gain[i] * drive[i] + scale[i] * xi[i];
}

void fhn_slow(const double* u, const double* v, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d uu = _mm256_loadu_pd(u + i);
    const __m256d cube = _mm256_mul_pd(_mm256_mul_pd(uu, uu), uu);
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_sub_pd(uu, cube), _mm256_loadu_pd(v + i)));
  }
  for (; i < n; ++i) out[i] = u[i] - u[i] * u[i] * u[i] + v[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

double max_abs(const double* x, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  // NaN compares unordered; track it separately instead of relying on max semantics.
  __m256d bad = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i));
    bad = _mm256_or_pd(bad, _mm256_cmp_pd(v, v, _CMP_UNORD_Q));
    m = _mm256_max_pd(m, v);
  }
  if (_mm256_movemask_pd(bad) != 0) return std::numeric_limits<double>::infinity();
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
  for (; i < n; ++i) {
    if (!std::isfinite(x[i])) return std::numeric_limits<double>::infinity();
    r = std::fmax(r, std::fabs(x[i]));
  }
  return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{"avx2", matvec, dot, exp_update, fhn_slow, mul, max_abs};
  return t;
}

}  // namespace avgspde::kernels::avx2
