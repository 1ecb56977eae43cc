#pragma once

// Data-parallel inner loops used by the tridiagonal eigensolvers.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The variant is chosen once at startup from the CPU features and
// the PAM1D_SIMD environment variable ("scalar" forces the reference path).
// Sturm counts and the matrix-vector product are bitwise identical between
// the two paths; dot products agree to rounding only.

#include <cstddef>
#include <span>

namespace pam1d::kernels {

enum class Isa { Scalar, Avx2 };

/// Number of shifts processed per Sturm sweep.
inline constexpr std::size_t kSturmLanes = 4;

struct KernelTable {
  Isa isa;
  /// For each shift s, counts the eigenvalues of the symmetric tridiagonal
  /// matrix (diag, off) that are strictly less than s. off_sq holds off[i]^2.
  void (*sturm_count4)(const double* diag, const double* off_sq, std::size_t n,
                       const double* shifts, double pivmin, int* counts);
  /// y = T x for the symmetric tridiagonal T = (diag, off).
  void (*tridiag_matvec)(const double* diag, const double* off, const double* x,
                         double* y, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_table();
#if defined(PAM1D_HAVE_AVX2_KERNELS)
const KernelTable& avx2_table();
#endif

/// True when the running CPU can execute the AVX2 table.
bool avx2_supported();

/// The table selected for this process.
const KernelTable& active();

/// Overrides the selection (tests and benchmarks). Falls back to scalar when
/// the requested ISA is unavailable; returns the ISA actually installed.
Isa select(Isa isa);

const char* isa_name(Isa isa);

// Convenience wrappers over the active table.
void sturm_count4(std::span<const double> diag, std::span<const double> off_sq,
                  const double (&shifts)[kSturmLanes], double pivmin,
                  int (&counts)[kSturmLanes]);
void tridiag_matvec(std::span<const double> diag, std::span<const double> off,
                    std::span<const double> x, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace pam1d::kernels
