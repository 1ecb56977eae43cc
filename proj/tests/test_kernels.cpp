#include <algorithm>
#include <cstring>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "pam1d/kernels.hpp"

using namespace pam1d;

namespace {

struct Tri {
  std::vector<double> diag, off, off_sq;
};

Tri random_tri(std::mt19937_64& rng, std::size_t n, bool with_clamps) {
  std::uniform_real_distribution<double> u(-3.0, 0.0);
  std::bernoulli_distribution clamp(0.1);
  Tri t;
  for (std::size_t i = 0; i < n; ++i) {
    double d = u(rng) - 2.0;
    if (with_clamps && clamp(rng)) d = -1e12;
    t.diag.push_back(d);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    t.off.push_back(1.0);
    t.off_sq.push_back(1.0);
  }
  return t;
}

}  // namespace

TEST_CASE("sturm counts agree with a dense eigensolver") {
  std::mt19937_64 rng(7);
  kernels::select(kernels::Isa::Scalar);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + trial * 3;
    const Tri t = random_tri(rng, n, false);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = t.diag[i];
    for (std::size_t i = 0; i + 1 < n; ++i) m(i, i + 1) = m(i + 1, i) = t.off[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const auto& ev = es.eigenvalues();
    const double shifts[4] = {-6.0, -3.3, -1.7, 0.1};
    int counts[4];
    kernels::sturm_count4(t.diag, t.off_sq, shifts, 1e-300, counts);
    for (int k = 0; k < 4; ++k) {
      const auto expected = std::count_if(ev.data(), ev.data() + n,
                                          [&](double l) { return l < shifts[k]; });
      CHECK(counts[k] == expected);
    }
  }
}

TEST_CASE("simd kernels match the scalar reference") {
  if (!kernels::avx2_supported()) {
    MESSAGE("AVX2 not available; equivalence test skipped");
    return;
  }
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto& scalar = kernels::scalar_table();
#if defined(PAM1D_HAVE_AVX2_KERNELS)
  const auto& simd = kernels::avx2_table();
#else
  const auto& simd = scalar;
#endif
  for (std::size_t n : {1u, 2u, 3u, 5u, 6u, 7u, 8u, 9u, 31u, 64u, 257u, 1001u}) {
    const Tri t = random_tri(rng, n, true);
    for (int rep = 0; rep < 10; ++rep) {
      double shifts[4];
      for (double& s : shifts) s = -4.0 * std::abs(u(rng)) - 0.5 * u(rng);
      if (rep == 0) std::copy_n(t.diag.begin(), std::min<std::size_t>(4, n), shifts);
      int a[4], b[4];
      scalar.sturm_count4(t.diag.data(), t.off_sq.data(), n, shifts, 1e-290, a);
      simd.sturm_count4(t.diag.data(), t.off_sq.data(), n, shifts, 1e-290, b);
      for (int k = 0; k < 4; ++k) CHECK(a[k] == b[k]);
    }
    std::vector<double> x(n), y1(n), y2(n);
    for (double& v : x) v = u(rng);
    std::vector<double> off = t.off;
    for (double& v : off) v = u(rng);
    scalar.tridiag_matvec(t.diag.data(), off.data(), x.data(), y1.data(), n);
    simd.tridiag_matvec(t.diag.data(), off.data(), x.data(), y2.data(), n);
    CHECK(std::memcmp(y1.data(), y2.data(), n * sizeof(double)) == 0);

    std::vector<double> z(n);
    for (double& v : z) v = u(rng);
    const double d1 = scalar.dot(x.data(), z.data(), n);
    const double d2 = simd.dot(x.data(), z.data(), n);
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(x[i] * z[i]);
    CHECK(std::abs(d1 - d2) <= 1e-14 * mag);
  }
}

TEST_CASE("selection falls back and reports the installed table") {
  CHECK(kernels::select(kernels::Isa::Scalar) == kernels::Isa::Scalar);
  CHECK(kernels::active().isa == kernels::Isa::Scalar);
  const auto got = kernels::select(kernels::Isa::Avx2);
  CHECK((got == kernels::Isa::Avx2) == kernels::avx2_supported());
  CHECK(std::string(kernels::isa_name(got)).size() > 0);
}
