#include "pam1d/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <array>
#include <cstdio>
#include <queue>
#include <vector>

#include "pam1d/errors.hpp"

namespace pam1d::quad {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDropCutoff = 80.0;

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  double a, b, value, error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

Piece gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double k = kKronrod[7] * fc;
  double g = kGauss[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double f1 = f(c - h * kNodes[i]);
    const double f2 = f(c + h * kNodes[i]);
    k += kKronrod[i] * (f1 + f2);
    if (i % 2 == 1) g += kGauss[i / 2] * (f1 + f2);
  }
  return {a, b, k * h, std::fabs((k - g) * h)};
}

// Globally adaptive bisection until the summed error estimate is below
// rel_tol * |integral| (or abs_floor).
double adaptive_gk(const std::function<double(double)>& f, double a, double b, double rel_tol,
                   double abs_floor) {
  std::priority_queue<Piece> heap;
  Piece first = gk15(f, a, b);
  double total = first.value;
  double err = first.error;
  heap.push(first);
  for (int it = 0; it < 400; ++it) {
    if (err <= std::max(rel_tol * std::fabs(total), abs_floor)) return total;
    Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;
    }
    const Piece left = gk15(f, worst.a, mid);
    const Piece right = gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Integrand noise from cancellation in g - gmax caps attainable accuracy.
  if (err <= std::max(1e-6 * std::fabs(total), abs_floor)) return total;
  char buf[160];
  std::snprintf(buf, sizeof buf, "[%.17g, %.17g] total %.3g err %.3g", a, b, total, err);
  throw NumericalError(std::string("adaptive quadrature on ") + buf +
                       " did not reach tolerance");
}

struct Mode {
  double at;
  double value;
};

// Golden-section refinement of a bracket [a, c] known to contain the maximum.
Mode golden_max(const std::function<double(double)>& g, double a, double c) {
  constexpr double invphi = 0.6180339887498949;
  double x1 = c - invphi * (c - a);
  double x2 = a + invphi * (c - a);
  double g1 = g(x1);
  double g2 = g(x2);
  for (int it = 0; it < 400; ++it) {
    if (c - a <= 1e-15 * (1.0 + std::fabs(a) + std::fabs(c))) break;
    if (g1 < g2) {
      a = x1;
      x1 = x2;
      g1 = g2;
      x2 = a + invphi * (c - a);
      g2 = g(x2);
    } else {
      c = x2;
      x2 = x1;
      g2 = g1;
      x1 = c - invphi * (c - a);
      g1 = g(x1);
    }
  }
  Mode best{x1, g1};
  if (g2 > best.value) best = {x2, g2};
  for (double e : {a, c}) {
    const double ge = g(e);
    if (ge > best.value) best = {e, ge};
  }
  return best;
}

// Walks from the hint towards increasing g with doubling steps until the
// function turns down or a bound is hit, then refines.
Mode find_mode(const std::function<double(double)>& g, double lo, double hi, double hint) {
  double step = 1e-3 * (1.0 + std::fabs(hint));
  const double g0 = g(hint);
  const double right = std::min(hint + step, hi);
  const double left = std::max(hint - step, lo);
  const double gr = g(right);
  const double gl = g(left);
  if (!(gr > g0) && !(gl > g0)) {
    // Unimodality puts the maximum inside [left, right].
    return golden_max(g, left, right);
  }
  const double dir = (gr >= gl) ? 1.0 : -1.0;
  double prev = hint;
  double cur = dir > 0 ? right : left;
  double gcur = dir > 0 ? gr : gl;
  for (int it = 0; it < 2000; ++it) {
    step *= 2.0;
    double next = cur + dir * step;
    if (dir > 0 && next >= hi) next = hi;
    if (dir < 0 && next <= lo) next = lo;
    if (!std::isfinite(next)) {
      throw NumericalError("log_integrate_exp: integrand increases towards an infinite bound");
    }
    const double gnext = g(next);
    if (gnext < gcur) {
      return dir > 0 ? golden_max(g, prev, next) : golden_max(g, next, prev);
    }
    if (next == hi || next == lo) {
      return dir > 0 ? golden_max(g, cur, next) : golden_max(g, next, cur);
    }
    prev = cur;
    cur = next;
    gcur = gnext;
  }
  throw NumericalError("log_integrate_exp: mode search did not terminate");
}

// Smallest distance (doubling search) at which g drops one unit below gmax.
double drop_width(const std::function<double(double)>& g, const Mode& m, double bound,
                  double dir) {
  double w = 1e-14 * (1.0 + std::fabs(m.at));
  for (int it = 0; it < 1100; ++it) {
    double x = m.at + dir * w;
    if ((dir > 0 && x >= bound) || (dir < 0 && x <= bound)) return std::fabs(bound - m.at);
    if (g(x) < m.value - 1.0) return w;
    w *= 2.0;
  }
  return w;
}

double integrate_side(const std::function<double(double)>& g, const Mode& m, double bound,
                      double dir) {
  if (m.at == bound) return 0.0;
  const double width = drop_width(g, m, bound, dir);
  auto f = [&](double x) {
    const double v = g(x) - m.value;
    return v < -745.0 ? 0.0 : std::exp(v);
  };
  double total = 0.0;
  double a = m.at;
  double w = width;
  for (int seg = 0; seg < 4000; ++seg) {
    double b = a + dir * w;
    bool last = false;
    if ((dir > 0 && b >= bound) || (dir < 0 && b <= bound)) {
      b = bound;
      last = true;
    }
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    // Segments far from the mode only need accuracy relative to the running total.
    total += adaptive_gk(f, lo, hi, 0.1 * kRelTol, 0.1 * kRelTol * total);
    if (last) break;
    if (g(b) < m.value - kDropCutoff) break;
    a = b;
    w *= 2.0;
  }
  return total;
}

}  // namespace

double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

double log_integrate_exp(const std::function<double(double)>& g, double lo, double hi,
                         double hint) {
  if (!(lo < hi)) return -kInf;
  hint = std::clamp(hint, lo, hi);
  const Mode m = find_mode(g, lo, hi, hint);
  if (m.value == -kInf) return -kInf;
  if (!std::isfinite(m.value)) throw NumericalError("log_integrate_exp: non-finite integrand");
  const double total = integrate_side(g, m, hi, 1.0) + integrate_side(g, m, lo, -1.0);
  if (!(total > 0.0)) return -kInf;
  return m.value + std::log(total);
}

}  // namespace pam1d::quad
