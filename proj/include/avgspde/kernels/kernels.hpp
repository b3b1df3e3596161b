#pragma once

// Data-parallel inner loops used by the transforms, steppers and estimators.
// Each kernel has a portable scalar reference and, where the target supports
// it, an AVX2+FMA variant. One table is chosen at startup (see active()).

#include <cstddef>
#include <string_view>

namespace avgspde::kernels {

struct KernelTable {
  std::string_view name;

  // y[r] = sum_c a[r*cols + c] * x[c]   (row-major a)
  void (*matvec)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // out[i] = decay[i]*state[i] + gain[i]*drive[i] + scale[i]*xi[i]
  void (*exp_update)(const double* decay, const double* state, const double* gain, const double* drive,
                     const double* scale, const double* xi, double* out, std::size_t n);

  // out[i] = u[i] - u[i]^3 + v[i]
  void (*fhn_slow)(const double* u, const double* v, double* out, std::size_t n);

  // out[i] = a[i] * b[i]
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);

  // max_i |x[i]|; returns +inf if any entry is non-finite
  double (*max_abs)(const double* x, std::size_t n);
};

const KernelTable& scalar_table();

// Null when the build or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

// Selected once: AVG_SPDE_KERNELS=scalar|avx2 forces a variant, otherwise the
// widest one the CPU supports.
const KernelTable& active();

}  // namespace avgspde::kernels
