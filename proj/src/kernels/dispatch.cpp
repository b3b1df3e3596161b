#include "avgspde/kernels/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace avgspde::kernels {

#if defined(AVGSPDE_HAVE_AVX2)
namespace avx2 {
const KernelTable& table();
}
#endif

const KernelTable* avx2_table() {
#if defined(AVGSPDE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  if (supported) return &avx2::table();
#endif
  return nullptr;
}

namespace {

const KernelTable& select() {
  const char* forced = std::getenv("AVG_SPDE_KERNELS");
  if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_table();
  if (const KernelTable* t = avx2_table()) return *t;
  return scalar_table();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& chosen = select();
  return chosen;
}

}  // namespace avgspde::kernels
