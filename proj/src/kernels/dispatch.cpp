#include "pam1d/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace pam1d::kernels {
namespace {

const KernelTable* initial_table() {
  const char* env = std::getenv("PAM1D_SIMD");
  if (env != nullptr && std::string_view(env) == "scalar") return &scalar_table();
#if defined(PAM1D_HAVE_AVX2_KERNELS)
  if (avx2_supported()) return &avx2_table();
#endif
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

bool avx2_supported() {
#if defined(PAM1D_HAVE_AVX2_KERNELS)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

Isa select(Isa isa) {
#if defined(PAM1D_HAVE_AVX2_KERNELS)
  if (isa == Isa::Avx2 && avx2_supported()) {
    current().store(&avx2_table());
    return Isa::Avx2;
  }
#endif
  (void)isa;
  current().store(&scalar_table());
  return Isa::Scalar;
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void sturm_count4(std::span<const double> diag, std::span<const double> off_sq,
                  const double (&shifts)[kSturmLanes], double pivmin,
                  int (&counts)[kSturmLanes]) {
  active().sturm_count4(diag.data(), off_sq.data(), diag.size(), shifts, pivmin, counts);
}

void tridiag_matvec(std::span<const double> diag, std::span<const double> off,
                    std::span<const double> x, std::span<double> y) {
  active().tridiag_matvec(diag.data(), off.data(), x.data(), y.data(), diag.size());
}

double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

}  // namespace pam1d::kernels
