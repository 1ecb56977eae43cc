#include "pam1d/lattice.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pam1d/errors.hpp"
#include "pam1d/kernels.hpp"

namespace pam1d {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
// Boxes up to this size are diagonalized in one call.
constexpr std::size_t kFullSolveLimit = 1500;
// Eigenvalues separated by more than this get twisted-factorization vectors.
constexpr double kIsolatedGap = 1e-7;
constexpr double kInf = std::numeric_limits<double>::infinity();
double pivmin_for(double kappa) {
  return std::numeric_limits<double>::min() * std::max(1.0, kappa * kappa);
}

// Eigenvector of the tridiagonal operator at an (accurate, isolated)
// eigenvalue from a twisted factorization: pivots from both ends, twist where
// |gamma_k| is smallest, entries built as products of pivot ratios. Entries
// come out accurate relative to their own size, also deep in decay regions
// where LAPACK vectors only carry absolute accuracy.
struct TwistedVector {
  std::vector<double> log_abs;  // normalized
  std::vector<signed char> sign;
};

TwistedVector twisted_vector(const TridiagonalOperator& op, double lambda) {
  const std::size_t n = op.size();
  const double k2 = op.kappa * op.kappa;
  const double pivmin = pivmin_for(op.kappa);
  std::vector<double> dp(n), dm(n);
  auto guard = [pivmin](double v) { return std::fabs(v) < pivmin ? -pivmin : v; };
  dp[0] = guard(op.diag[0] - lambda);
  for (std::size_t i = 1; i < n; ++i) dp[i] = guard((op.diag[i] - lambda) - k2 / dp[i - 1]);
  dm[n - 1] = guard(op.diag[n - 1] - lambda);
  for (std::size_t i = n - 1; i-- > 0;) dm[i] = guard((op.diag[i] - lambda) - k2 / dm[i + 1]);
  std::size_t twist = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double g = std::fabs(dp[i] + dm[i] - (op.diag[i] - lambda));
    if (g < best) {
      best = g;
      twist = i;
    }
  }
  TwistedVector tv;
  tv.log_abs.assign(n, 0.0);
  tv.sign.assign(n, 1);
  const double log_kappa = std::log(op.kappa);
  // v_i = -kappa v_{i+1} / dp_i left of the twist, -kappa v_{i-1} / dm_i right of it.
  for (std::size_t i = twist; i-- > 0;) {
    tv.log_abs[i] = tv.log_abs[i + 1] + log_kappa - std::log(std::fabs(dp[i]));
    tv.sign[i] = static_cast<signed char>(dp[i] < 0.0 ? tv.sign[i + 1] : -tv.sign[i + 1]);
  }
  for (std::size_t i = twist + 1; i < n; ++i) {
    tv.log_abs[i] = tv.log_abs[i - 1] + log_kappa - std::log(std::fabs(dm[i]));
    tv.sign[i] = static_cast<signed char>(dm[i] < 0.0 ? tv.sign[i - 1] : -tv.sign[i - 1]);
  }
  const double top = *std::max_element(tv.log_abs.begin(), tv.log_abs.end());
  double sum = 0.0;
  for (double l : tv.log_abs) sum += std::exp(2.0 * (l - top));
  const double log_norm = top + 0.5 * std::log(sum);
  for (double& l : tv.log_abs) l -= log_norm;
  return tv;
}

double residual_norm(const TridiagonalOperator& op, double lambda, const std::vector<double>& v) {
  const std::size_t n = op.size();
  std::vector<double> hv(n);
  const auto off = op.offdiag();
  kernels::tridiag_matvec(op.diag, off, v, hv);
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = hv[i] - lambda * v[i];
    res += r * r;
  }
  return std::sqrt(res);
}


// Eigenpairs with ascending indices il..iu (1-based).
void selected_eigenpairs(const TridiagonalOperator& op, lapack_int il, lapack_int iu,
                         std::vector<double>& w, std::vector<double>& z) {
  const auto n = static_cast<lapack_int>(op.size());
  std::vector<double> d = op.diag;
  std::vector<double> e = op.offdiag();
  e.push_back(0.0);
  const lapack_int m_max = iu - il + 1;
  w.assign(static_cast<std::size_t>(n), 0.0);
  z.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(m_max), 0.0);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(m_max));
  lapack_int m = 0;
  lapack_logical tryrac = 1;
  const lapack_int info =
      LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', m_max == n ? 'A' : 'I', n, d.data(), e.data(), 0.0,
                     0.0, il, iu, &m, w.data(), z.data(), n, m_max, isuppz.data(), &tryrac);
  if (info == 0 && m == m_max) {
    w.resize(static_cast<std::size_t>(m));
    return;
  }
  // MRRR occasionally gives up on boxes with clamped sites; bisection plus
  // inverse iteration is slower but robust.
  d = op.diag;
  e = op.offdiag();
  e.push_back(0.0);
  std::vector<lapack_int> ifail(static_cast<std::size_t>(n));
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  const lapack_int info2 = LAPACKE_dstevx(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0,
                                          0.0, il, iu, abstol, &m, w.data(), z.data(), n,
                                          ifail.data());
  if (info2 != 0 || m != m_max) {
    throw NumericalError("tridiagonal eigensolver failed (dstemr " + std::to_string(info) +
                         ", dstevx " + std::to_string(info2) + ")");
  }
  w.resize(static_cast<std::size_t>(m));
}

}  // namespace

std::vector<double> TridiagonalOperator::offdiag() const {
  return std::vector<double>(diag.empty() ? 0 : diag.size() - 1, kappa);
}

TridiagonalOperator TridiagonalOperator::shifted(double c) const {
  TridiagonalOperator out = *this;
  for (double& d : out.diag) d += c;
  return out;
}

TridiagonalOperator hamiltonian(const Field& field, std::int64_t z, std::int64_t R, double kappa) {
  if (R < 0) throw ConfigError("box radius must be nonnegative");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (!field.covers(z - R, z + R)) {
    throw ConfigError("box [" + std::to_string(z - R) + ", " + std::to_string(z + R) +
                      "] lies outside the sampled field");
  }
  TridiagonalOperator op;
  op.z = z;
  op.R = R;
  op.kappa = kappa;
  op.diag.reserve(static_cast<std::size_t>(2 * R + 1));
  for (std::int64_t x = -R; x <= R; ++x) {
    bool clamped = false;
    const double xi = field.at(z + x).xi_clamped(kXiMax, clamped);
    if (clamped) op.clamped.push_back(x);
    op.diag.push_back(xi - 2.0 * kappa);
  }
  return op;
}

TridiagonalOperator hamiltonian_from_xi(const std::vector<double>& xi, double kappa) {
  if (xi.empty() || xi.size() % 2 == 0) throw ConfigError("need 2R+1 potential values");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  TridiagonalOperator op;
  op.R = static_cast<std::int64_t>(xi.size() / 2);
  op.kappa = kappa;
  for (double v : xi) op.diag.push_back(v - 2.0 * kappa);
  return op;
}

double quadratic_form(const TridiagonalOperator& op, const std::vector<double>& g) {
  if (g.size() != op.size()) throw ConfigError("vector length does not match the box");
  std::vector<double> y(g.size());
  const auto off = op.offdiag();
  kernels::tridiag_matvec(op.diag, off, g, y);
  return kernels::dot(g, y);
}

SpectralData principal_eigpair(const TridiagonalOperator& op) {
  const std::size_t n = op.size();
  if (n == 0) throw ConfigError("empty operator");
  const double kappa = op.kappa;
  const double dmax = *std::max_element(op.diag.begin(), op.diag.end());
  const double pivmin = pivmin_for(kappa);
  const std::vector<double> off_sq(n - 1, kappa * kappa);

  // The top eigenvalue lies in [max d, max d + 2 kappa] (Rayleigh quotient at
  // a unit vector, Gershgorin).
  double lo = dmax;
  double hi = n == 1 ? dmax : dmax + 2.0 * kappa;
  const auto nn = static_cast<int>(n);
  for (int pass = 0; pass < 200; ++pass) {
    const double tol = std::max(1e-13, 4.0 * kEps * std::max(std::fabs(lo), std::fabs(hi)));
    if (hi - lo <= tol) break;
    double shifts[kernels::kSturmLanes];
    int counts[kernels::kSturmLanes];
    for (std::size_t k = 0; k < kernels::kSturmLanes; ++k) {
      shifts[k] = lo + (hi - lo) * static_cast<double>(k + 1) / (kernels::kSturmLanes + 1);
    }
    kernels::sturm_count4(op.diag, off_sq, shifts, pivmin, counts);
    double new_lo = lo;
    double new_hi = hi;
    for (std::size_t k = 0; k < kernels::kSturmLanes; ++k) {
      if (counts[k] < nn) {
        new_lo = std::max(new_lo, shifts[k]);
      } else {
        new_hi = std::min(new_hi, shifts[k]);
      }
    }
    if (new_lo == lo && new_hi == hi) break;
    lo = new_lo;
    hi = new_hi;
  }
  const double lambda = 0.5 * (lo + hi);

  // Perron-Frobenius: the principal vector is positive.
  const TwistedVector tv = twisted_vector(op, lambda);

  SpectralData out;
  out.n = n;
  out.principal = lambda;
  out.eigenvalues = {lambda};
  out.log_principal_vec.resize(n);
  out.principal_vec.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.log_principal_vec[i] = tv.log_abs[i];
    out.principal_vec[i] = std::exp(out.log_principal_vec[i]);
  }
  out.eigenvectors = out.principal_vec;

  out.residual = residual_norm(op, lambda, out.principal_vec);
  if (!(out.residual <= 1e-8 * (1.0 + std::fabs(lambda)))) {
    throw NumericalError("principal eigenvector residual " + std::to_string(out.residual) +
                         " above tolerance");
  }
  return out;
}

SpectralData full_spectrum(const TridiagonalOperator& op, std::size_t dense_limit) {
  const std::size_t n = op.size();
  if (n > dense_limit) {
    throw ConfigError("box of " + std::to_string(n) + " sites exceeds the dense limit " +
                      std::to_string(dense_limit));
  }
  SpectralData out = principal_eigpair(op);
  selected_eigenpairs(op, 1, static_cast<lapack_int>(n), out.eigenvalues, out.eigenvectors);
  return out;
}

BoxSolution solve_box(const TridiagonalOperator& op, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("t must be finite and nonnegative");
  const std::size_t n = op.size();
  const std::size_t center = n / 2;
  const SpectralData top = principal_eigpair(op);
  BoxSolution sol;
  sol.lambda = top.principal;
  sol.log_e_center = top.log_principal_vec[center];
  sol.clamped_sites = op.clamped.size();
  if (t == 0.0) {
    sol.u.assign(n, 1.0);
    sol.log_u.assign(n, 0.0);
    return sol;
  }

  // Per-site sums are kept as e^{scale} * (signed, absolute) so that terms
  // far below the principal weight do not underflow at large t.
  const double ref = top.principal;
  std::vector<double> scale(n, -kInf), sum(n, 0.0), mag(n, 0.0), proj(n, 0.0);
  auto add = [&](std::size_t i, double log_term, double sign) {
    if (log_term > scale[i]) {
      const double r = std::exp(scale[i] - log_term);
      sum[i] *= r;
      mag[i] *= r;
      scale[i] = log_term;
    }
    const double e = std::exp(log_term - scale[i]);
    sum[i] += sign * e;
    mag[i] += e;
  };
  auto log_sum = [&](std::size_t i) { return sum[i] > 0.0 ? scale[i] + std::log(sum[i]) : -kInf; };

  double proj_one = 0.0;
  std::size_t used = 0;
  std::size_t chunk = n <= kFullSolveLimit ? n : 64;
  std::vector<double> w, z, log_abs(n), sign(n), lin(n);
  double above = kInf;
  while (used < n) {
    const std::size_t take = std::min(chunk, n - used);
    const auto iu = static_cast<lapack_int>(n - used);
    const auto il = static_cast<lapack_int>(n - used - take + 1);
    selected_eigenpairs(op, il, iu, w, z);
    for (std::size_t j = 0; j < take; ++j) {
      // The top pair comes from the twisted factorization, whose entries are
      // accurate relative to their size even deep in the decay region.
      const bool is_top = used == 0 && j + 1 == take;
      bool have = false;
      if (is_top) {
        log_abs = top.log_principal_vec;
        std::fill(sign.begin(), sign.end(), 1.0);
        have = true;
      } else {
        const double gap = std::min(j + 1 < take ? w[j + 1] - w[j] : above - w[j],
                                    j > 0 ? w[j] - w[j - 1] : kInf);
        if (gap > kIsolatedGap * std::max(1.0, op.kappa)) {
          TwistedVector tv = twisted_vector(op, w[j]);
          for (std::size_t i = 0; i < n; ++i) lin[i] = tv.sign[i] * std::exp(tv.log_abs[i]);
          if (residual_norm(op, w[j], lin) <= 1e-10 * (1.0 + std::fabs(w[j]))) {
            log_abs = std::move(tv.log_abs);
            for (std::size_t i = 0; i < n; ++i) sign[i] = tv.sign[i];
            have = true;
          }
        }
      }
      if (!have) {
        for (std::size_t i = 0; i < n; ++i) {
          const double v = z[j * n + i];
          log_abs[i] = std::log(std::fabs(v));
          sign[i] = v < 0.0 ? -1.0 : 1.0;
        }
      }
      double c = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        lin[i] = sign[i] * std::exp(log_abs[i]);
        c += lin[i];
      }
      proj_one += c * c;
      if (c == 0.0) continue;
      const double log_w = t * (std::min(w[j], ref) - ref) + std::log(std::fabs(c));
      const double c_sign = c < 0.0 ? -1.0 : 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        proj[i] += lin[i] * lin[i];
        if (log_abs[i] > -kInf) add(i, log_w + log_abs[i], c_sign * sign[i]);
      }
    }
    used += take;
    above = w.front();
    if (used >= n) break;
    // Remainder bounded through the unused spectral projections.
    const double log_decay = t * (w.front() - ref);
    const double log_rest = 0.5 * std::log(std::max(0.0, static_cast<double>(n) - proj_one));
    double log_smax = -kInf;
    for (std::size_t i = 0; i < n; ++i) log_smax = std::max(log_smax, log_sum(i));
    bool done = true;
    for (std::size_t i = 0; i < n && done; ++i) {
      const double log_tail = log_decay + 0.5 * std::log(std::max(0.0, 1.0 - proj[i])) + log_rest;
      const double target = i == center ? std::min(log_sum(i), log_smax) : log_smax;
      if (!(log_tail <= std::log(1e-12) + target)) done = false;
    }
    if (done) break;
    chunk *= 2;
  }
  sol.eigenpairs_used = used;

  // u(t, x) >= e^{t lambda} e(x) / max e because 1 >= e / max e pointwise.
  const double log_emax =
      *std::max_element(top.log_principal_vec.begin(), top.log_principal_vec.end());
  bool nonpositive = true;
  for (double d : op.diag) nonpositive = nonpositive && d + 2.0 * op.kappa <= 0.0;
  sol.u.resize(n);
  sol.log_u.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lower = t * ref + top.log_principal_vec[i] - log_emax;
    double lu = lower;
    if (sum[i] > 1e3 * kEps * mag[i]) lu = std::max(lower, t * ref + log_sum(i));
    if (nonpositive) lu = std::min(lu, 0.0);
    sol.log_u[i] = lu;
  }
  for (std::size_t i = 0; i < n; ++i) sol.u[i] = std::exp(sol.log_u[i]);
  return sol;
}

BoxSolution solve_box(const Field& field, std::int64_t z, std::int64_t R, double kappa, double t) {
  return solve_box(hamiltonian(field, z, R, kappa), t);
}

AdaptiveSolution solve_adaptive(const std::function<Field(std::int64_t, std::int64_t)>& sampler,
                                double t, double rtol, const AdaptiveOptions& opt) {
  if (!(rtol > 0.0)) throw ConfigError("rtol must be positive");
  if (opt.R0 < 1 || opt.R_cap < opt.R0) throw ConfigError("need 1 <= R0 <= R_cap");
  AdaptiveSolution out;
  Field field;
  int calm = 0;
  double prev = 0.0;
  for (std::int64_t R = opt.R0;; R = std::min(2 * R, opt.R_cap)) {
    if (!field.covers(-R, R)) field = sampler(-R, R);
    const BoxSolution sol = solve_box(field, 0, R, opt.kappa, t);
    const double lu = sol.log_u_center();
    out.history.emplace_back(R, lu);
    if (out.history.size() > 1) {
      calm = std::fabs(std::expm1(lu - prev)) < rtol ? calm + 1 : 0;
    }
    prev = lu;
    out.R = R;
    out.log_u = lu;
    out.u = std::exp(lu);
    out.lambda = sol.lambda;
    out.clamped_sites = sol.clamped_sites;
    if (calm >= 2) return out;
    if (R == opt.R_cap) break;
  }
  throw NumericalError("solve_adaptive: u_R(t,0) not stable within rtol before R_cap = " +
                       std::to_string(opt.R_cap));
}

AdaptiveSolution solve_adaptive(const PotentialSpec& spec, std::uint64_t seed, double t,
                                double rtol, const AdaptiveOptions& opt) {
  spec.validate();
  return solve_adaptive(
      [&](std::int64_t lo, std::int64_t hi) { return sample_field(spec, lo, hi, seed); }, t, rtol,
      opt);
}

TruncationProduct truncation_product(const Field& field, double b, std::int64_t R, double kappa) {
  if (!(b > 2.0 * kappa)) throw ConfigError("truncation product requires b > 2 kappa");
  if (R < 0 || !field.covers(-R, R)) throw ConfigError("field does not cover [-R, R]");
  const double log_b = std::log(b);
  TruncationProduct out;
  for (std::int64_t x = 0; x <= R; ++x) {
    out.right += log_b - field.at(x).log_neg_xi_or(log_b);
    out.left += log_b - field.at(-x).log_neg_xi_or(log_b);
  }
  return out;
}

}  // namespace pam1d
