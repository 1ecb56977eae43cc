// Built as C++17: the ublas headers shipped with this Boost predate C++20
// allocator changes.
#include "stiff_oracle.hpp"

#include <boost/numeric/odeint.hpp>

std::vector<double> stiff_reference(const std::vector<double>& diag, double kappa, double t) {
  namespace ublas = boost::numeric::ublas;
  namespace odeint = boost::numeric::odeint;
  const std::size_t n = diag.size();
  ublas::matrix<double> h(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    h(i, i) = diag[i];
    if (i + 1 < n) h(i, i + 1) = h(i + 1, i) = kappa;
  }
  ublas::vector<double> u(n, 1.0);
  auto rhs = [&](const ublas::vector<double>& x, ublas::vector<double>& dx, double) {
    dx = ublas::prod(h, x);
  };
  auto jac = [&](const ublas::vector<double>&, ublas::matrix<double>& j, double,
                 ublas::vector<double>& dfdt) {
    j = h;
    dfdt.clear();
  };
  odeint::integrate_adaptive(odeint::make_dense_output<odeint::rosenbrock4<double>>(1e-13, 1e-11),
                             std::make_pair(rhs, jac), u, 0.0, t, 1e-3);
  return {u.begin(), u.end()};
}

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace {

using Big = boost::multiprecision::cpp_bin_float_100;
using BigMatrix = std::vector<std::vector<Big>>;

BigMatrix multiply(const BigMatrix& a, const BigMatrix& b) {
  const std::size_t n = a.size();
  BigMatrix c(n, std::vector<Big>(n, Big(0)));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (a[i][k] == 0) continue;
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    }
  }
  return c;
}

}  // namespace

double log_u_center_multiprecision(const std::vector<double>& diag, double kappa, double t) {
  const std::size_t n = diag.size();
  const int squarings = 60;
  const Big scale = boost::multiprecision::ldexp(Big(t), -squarings);
  BigMatrix h(n, std::vector<Big>(n, Big(0)));
  for (std::size_t i = 0; i < n; ++i) {
    h[i][i] = Big(diag[i]) * scale;
    if (i + 1 < n) h[i][i + 1] = h[i + 1][i] = Big(kappa) * scale;
  }
  BigMatrix e(n, std::vector<Big>(n, Big(0)));
  BigMatrix term = e;
  for (std::size_t i = 0; i < n; ++i) e[i][i] = term[i][i] = 1;
  for (int k = 1; k < 30; ++k) {
    term = multiply(term, h);
    for (auto& row : term) {
      for (auto& x : row) x /= k;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) e[i][j] += term[i][j];
    }
  }
  for (int k = 0; k < squarings; ++k) e = multiply(e, e);
  Big u = 0;
  for (std::size_t j = 0; j < n; ++j) u += e[n / 2][j];
  return static_cast<double>(log(u));
}
