#include "pam1d/kernels.hpp"

#include <cmath>

namespace pam1d::kernels {
namespace {

void sturm_count4_scalar(const double* diag, const double* off_sq, std::size_t n,
                         const double* shifts, double pivmin, int* counts) {
  for (std::size_t lane = 0; lane < kSturmLanes; ++lane) {
    const double s = shifts[lane];
    int count = 0;
    double q = diag[0] - s;
    if (std::fabs(q) < pivmin) q = -pivmin;
    count += q < 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      q = (diag[i] - s) - off_sq[i - 1] / q;
      if (std::fabs(q) < pivmin) q = -pivmin;
      count += q < 0.0;
    }
    counts[lane] = count;
  }
}

void tridiag_matvec_scalar(const double* diag, const double* off, const double* x,
                           double* y, std::size_t n) {
  if (n == 0) return;
  if (n == 1) {
    y[0] = diag[0] * x[0];
    return;
  }
  y[0] = diag[0] * x[0] + off[0] * x[1];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    y[i] = (diag[i] * x[i] + off[i - 1] * x[i - 1]) + off[i] * x[i + 1];
  }
  y[n - 1] = diag[n - 1] * x[n - 1] + off[n - 2] * x[n - 2];
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::Scalar, &sturm_count4_scalar,
                                 &tridiag_matvec_scalar, &dot_scalar};
  return table;
}

}  // namespace pam1d::kernels
