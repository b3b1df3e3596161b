#include "avgspde/kernels/kernels.hpp"

#include <cmath>
#include <limits>

namespace avgspde::kernels {
namespace {

void matvec(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = a + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void exp_update(const double* decay, const double* state, const double* gain, const double* drive,
                const double* scale, const double* xi, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = decay[i] * state[i] + gain[i] * drive[i] + scale[i] * xi[i];
}

void fhn_slow(const double* u, const double* v, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = u[i] - u[i] * u[i] * u[i] + v[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

double max_abs(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) return std::numeric_limits<double>::infinity();
    m = std::fmax(m, std::fabs(x[i]));
  }
  return m;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", matvec, dot, exp_update, fhn_slow, mul, max_abs};
  return table;
}

}  // namespace avgspde::kernels
