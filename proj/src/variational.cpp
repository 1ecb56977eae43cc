#include "pam1d/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pam1d/errors.hpp"
#include "pam1d/lattice.hpp"
#include "pam1d/parallel.hpp"
#include "pam1d/quadrature.hpp"

namespace pam1d {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

// int_0^h |linear from -a to -b|^{-p} ds for a, b >= 0.
double cell_power_integral(double a, double b, double p, double h) {
  if (a > b) std::swap(a, b);
  if (b == 0.0) return kInf;
  if (a == 0.0) return p >= 1.0 ? kInf : h * std::pow(b, -p) / (1.0 - p);
  const double d = (b - a) / b;
  if (d < 1e-6) {
    // expansion around the midpoint, error O(d^4)
    const double m = 0.5 * (a + b);
    const double e = 0.5 * (b - a) / m;
    return h * std::pow(m, -p) * (1.0 + p * (p + 1.0) * e * e / 6.0);
  }
  if (p == 1.0) return h * (std::log(b) - std::log(a)) / (b - a);
  return h * (std::pow(b, 1.0 - p) - std::pow(a, 1.0 - p)) / ((1.0 - p) * (b - a));
}

double legendre_prefactor(double gamma, double A) {
  return (1.0 / gamma - 1.0) * std::pow(A * gamma, 1.0 / (1.0 - gamma));
}

// Integral of |psi|^{-p} over the support cells.
double power_integral(const ShapeFunction& psi, double p) {
  const auto supp = psi.support_cells();
  const double h = psi.h();
  double total = 0.0;
  for (std::size_t i = 0; i < supp.size(); ++i) {
    if (!supp[i]) continue;
    total += cell_power_integral(-psi.values[i], -psi.values[i + 1], p, h);
    if (std::isinf(total)) return kInf;
  }
  return total;
}

// Maximizes phi over [lo, hi] in log f; phi must be unimodal there.
template <class F>
double golden_max_log(F phi, double lo, double hi) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = std::log(lo), b = std::log(hi);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = phi(std::exp(c)), fd = phi(std::exp(d));
  for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, std::fabs(a)); ++it) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = phi(std::exp(d));
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = phi(std::exp(c));
    }
  }
  return std::max({fc, fd, phi(lo), phi(hi)});
}

struct ComponentEigen {
  double lambda = 0.0;
  /// log g on the interior points, step h / m.
  std::vector<double> log_g;
};

// Dirichlet principal pair of kappa d^2/dx^2 + psi on [x_{i0}, x_{i1+1}]
// with step h / m.
ComponentEigen component_eigen(const ShapeFunction& psi, std::size_t i0, std::size_t i1,
                               double kappa, int m) {
  const double he = psi.h() / m;
  const std::size_t interior = (i1 - i0 + 1) * static_cast<std::size_t>(m) - 1;
  TridiagonalOperator op;
  op.kappa = kappa;
  op.diag.resize(interior);
  for (std::size_t k = 1; k <= interior; ++k) {
    const std::size_t cell = i0 + k / m;
    const double s = static_cast<double>(k % m) / m;
    const double v = (1.0 - s) * psi.values[cell] + (s > 0.0 ? s * psi.values[cell + 1] : 0.0);
    op.diag[k - 1] = he * he * v - 2.0 * kappa;
  }
  auto sd = principal_eigpair(op);
  return {sd.principal / (he * he), std::move(sd.log_principal_vec)};
}

// Support components as inclusive cell ranges.
std::vector<std::pair<std::size_t, std::size_t>> components(const ShapeFunction& psi) {
  const auto supp = psi.support_cells();
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t i = 0;
  while (i < supp.size()) {
    if (!supp[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < supp.size() && supp[j + 1]) ++j;
    out.emplace_back(i, j);
    i = j + 1;
  }
  return out;
}

double eigenvalue_at(const ShapeFunction& psi, double kappa, int m) {
  double best = -kInf;
  for (const auto& [i, j] : components(psi)) {
    if ((j - i + 1) * static_cast<std::size_t>(m) < 2) continue;
    best = std::max(best, component_eigen(psi, i, j, kappa, m).lambda);
  }
  return best;
}

struct NodeEigen {
  double lambda = -kInf;
  /// log g at every node; -inf off the interior of the best component.
  std::vector<double> log_g;
};

NodeEigen node_eigen(const ShapeFunction& psi, double kappa) {
  NodeEigen out;
  out.log_g.assign(psi.values.size(), -kInf);
  for (const auto& [i, j] : components(psi)) {
    if (j == i) continue;
    auto ce = component_eigen(psi, i, j, kappa, 1);
    if (ce.lambda <= out.lambda) continue;
    out.lambda = ce.lambda;
    std::fill(out.log_g.begin(), out.log_g.end(), -kInf);
    for (std::size_t k = 0; k < ce.log_g.size(); ++k) out.log_g[i + 1 + k] = ce.log_g[k];
  }
  return out;
}

// psi = -K g^{-2(1-gamma)} with K saturating L(psi) = 1. Where g is tiny
// |psi| would exceed 1e10 times its minimum: for gamma < 1/2 such points
// leave the support (psi = 0 costs a finite amount next to it), otherwise
// |psi| is capped there since a zero would make L infinite.
ShapeFunction profile_from_log_g(double R, const std::vector<double>& log_g, double gamma,
                                 double A, bool cut) {
  const double top = *std::max_element(log_g.begin(), log_g.end());
  const double e = 2.0 * (1.0 - gamma);
  const double floor = top - std::log(1e10) / e;
  const double p = gamma / (1.0 - gamma);
  ShapeFunction s;
  s.R = R;
  s.values.resize(log_g.size());
  for (std::size_t i = 0; i < log_g.size(); ++i) {
    if (cut && log_g[i] < floor && p < 1.0) {
      s.values[i] = 0.0;
    } else {
      s.values[i] = -std::exp(e * (top - std::max(log_g[i], floor)));
    }
  }
  const double K = std::pow(legendre_L(s, gamma, A), 1.0 / p);
  for (double& v : s.values) v *= K;
  return s;
}

struct StartResult {
  double lambda = -kInf;
  ShapeFunction psi;
  bool converged = false;
};

StartResult ascend(ShapeFunction psi, const VariationalConfig& cfg, bool cut) {
  StartResult out;
  double prev = -kInf;
  int stale = 0;
  for (int it = 0; it < cfg.max_iter; ++it) {
    const auto ne = node_eigen(psi, cfg.kappa);
    // the ascent is monotone up to eigen-solve rounding, so a long run
    // without a new best also counts as converged
    stale = ne.lambda > out.lambda + 1e-13 * std::fabs(ne.lambda) ? 0 : stale + 1;
    if (ne.lambda > out.lambda) {
      out.lambda = ne.lambda;
      out.psi = psi;
    }
    if (std::fabs(ne.lambda - prev) <= 1e-10 * std::fabs(ne.lambda) || stale >= 50) {
      out.converged = true;
      break;
    }
    prev = ne.lambda;
    psi = profile_from_log_g(psi.R, ne.log_g, cfg.gamma, cfg.A, cut);
  }
  return out;
}

ShapeFunction start_profile(const VariationalConfig& cfg, double R, std::size_t cells, int k) {
  std::vector<double> log_g(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) {
    const double x = -R + 2.0 * R * static_cast<double>(i) / static_cast<double>(cells);
    double g;
    if (k == 0) {
      // |psi| ~ (1 - (x/R)^2), floored away from zero
      g = std::pow(std::max(1.0 - (x / R) * (x / R), 1e-3), -1.0 / (2.0 * (1.0 - cfg.gamma)));
    } else {
      const double w = R * k / std::max(1, cfg.restarts - 1);
      g = std::fabs(x) < w ? std::cos(0.5 * kPi * x / w) : 0.0;
      g = std::max(g, 1e-6);
    }
    log_g[i] = std::log(g);
  }
  return profile_from_log_g(R, log_g, cfg.gamma, cfg.A, false);
}

ChiResult chi_flat(const VariationalConfig& cfg) {
  // gamma = 0: L = A |supp psi|, and lambda only grows as psi increases to 0,
  // so the search runs over supports of psi = -delta.
  const double delta = 1e-10 * cfg.kappa;
  const double R = 0.5 / cfg.A;
  const std::size_t n = cfg.cells;
  const int starts = std::max(2, cfg.restarts);
  std::vector<ShapeFunction> cand;
  for (int k = 1; k <= starts; ++k) {
    const std::size_t len = std::max<std::size_t>(2, n * static_cast<std::size_t>(k) / starts);
    ShapeFunction one{R, std::vector<double>(n + 1, 0.0)};
    for (std::size_t i = 1; i < len; ++i) one.values[i] = -delta;
    if (len == n) one.values[0] = one.values[n] = -delta;
    cand.push_back(one);
    if (len >= 8) {
      // same measure split into two separated intervals
      ShapeFunction two{R, std::vector<double>(n + 1, 0.0)};
      const std::size_t half = len / 2;
      for (std::size_t i = 1; i < half; ++i) two.values[i] = -delta;
      for (std::size_t i = n - (len - half) + 1; i < n; ++i) two.values[i] = -delta;
      cand.push_back(two);
    }
  }
  std::vector<ContinuumEigen> eig(cand.size());
  parallel_for(cand.size(), [&](std::size_t i) { eig[i] = eig_continuum(cand[i], cfg.kappa, cfg.refine); });
  std::size_t best = 0;
  for (std::size_t i = 1; i < cand.size(); ++i) {
    if (eig[i].lambda > eig[best].lambda) best = i;
  }
  ChiResult out;
  out.chi_tilde = -eig[best].lambda;
  out.lambda_error = eig[best].error;
  out.psi = cand[best];
  out.R_star = R;
  out.constraint_value = legendre_L(cand[best], 0.0, cfg.A);
  out.local_optima = {out.chi_tilde};
  return out;
}

ChiResult chi_at(const VariationalConfig& cfg, double R, std::size_t cells) {
  const int starts = std::max(1, cfg.restarts);
  std::vector<StartResult> res(static_cast<std::size_t>(starts));
  parallel_for(res.size(), [&](std::size_t k) {
    const auto start = start_profile(cfg, R, cells, static_cast<int>(k));
    res[k] = ascend(start, cfg, false);
    if (cfg.gamma < 0.5) {
      // once cut, the support cannot grow back, so cut both from the start
      // and after the capped ascent
      auto late = ascend(res[k].psi, cfg, true);
      auto early = ascend(start, cfg, true);
      if (late.lambda > res[k].lambda) res[k] = std::move(late);
      if (early.lambda > res[k].lambda) res[k] = std::move(early);
    }
  });
  std::size_t best = 0;
  for (std::size_t k = 1; k < res.size(); ++k) {
    if (res[k].lambda > res[best].lambda) best = k;
  }
  ChiResult out;
  const auto eig = eig_continuum(res[best].psi, cfg.kappa, cfg.refine);
  out.chi_tilde = -eig.lambda;
  out.lambda_error = eig.error;
  out.psi = res[best].psi;
  out.R_star = R;
  out.constraint_value = legendre_L(out.psi, cfg.gamma, cfg.A);
  out.stagnated = !res[best].converged;
  for (const auto& r : res) {
    const double v = -r.lambda;
    const bool seen = std::any_of(out.local_optima.begin(), out.local_optima.end(),
                                  [&](double u) { return std::fabs(u - v) <= 1e-6 * std::fabs(v); });
    if (!seen) out.local_optima.push_back(v);
  }
  std::sort(out.local_optima.begin(), out.local_optima.end());
  return out;
}

}  // namespace

ShapeFunction ShapeFunction::from_function(double R, std::size_t cells,
                                           const std::function<double(double)>& fn) {
  if (!(R > 0.0) || cells < 1) throw ConfigError("shape grid needs R > 0 and at least one cell");
  ShapeFunction s;
  s.R = R;
  s.values.resize(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) s.values[i] = fn(s.node(i));
  s.validate();
  return s;
}

std::vector<bool> ShapeFunction::support_cells() const {
  std::vector<bool> out(cells(), false);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values[i] < 0.0 || values[i + 1] < 0.0;
  return out;
}

double ShapeFunction::support_length() const {
  const auto s = support_cells();
  return h() * static_cast<double>(std::count(s.begin(), s.end(), true));
}

bool ShapeFunction::is_zero() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

double ShapeFunction::value_at(double x) const {
  if (!(x >= -R && x <= R)) return 0.0;
  const double pos = (x + R) / h();
  const std::size_t i = std::min(static_cast<std::size_t>(pos), cells() - 1);
  const double s = pos - static_cast<double>(i);
  return (1.0 - s) * values[i] + s * values[i + 1];
}

void ShapeFunction::validate() const {
  if (!(R > 0.0)) throw ConfigError("shape function needs R > 0");
  if (values.size() < 2) throw ConfigError("shape function needs at least two nodes");
  for (double v : values) {
    if (!(v <= 0.0) || !std::isfinite(v)) throw ConfigError("shape function values must be finite and <= 0");
  }
}

double functional_H(const std::vector<double>& f, double R, double gamma, double A) {
  if (f.size() < 2) throw ConfigError("grid function needs at least two nodes");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  for (double v : f) {
    if (!(v >= 0.0)) throw ConfigError("functional_H needs f >= 0");
  }
  const double h = 2.0 * R / static_cast<double>(f.size() - 1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) {
    if (gamma == 0.0) {
      total += (f[i] > 0.0 || f[i + 1] > 0.0) ? h : 0.0;
    } else {
      const double a = f[i] > 0.0 ? std::pow(f[i], gamma) : 0.0;
      const double b = f[i + 1] > 0.0 ? std::pow(f[i + 1], gamma) : 0.0;
      total += 0.5 * h * (a + b);
    }
  }
  return -A * total;
}

double legendre_L(const ShapeFunction& psi, double gamma, double A) {
  psi.validate();
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  if (!(A > 0.0)) throw ConfigError("A must be positive");
  if (psi.is_zero()) return kInf;
  if (gamma == 0.0) return A * psi.support_length();
  const double integral = power_integral(psi, gamma / (1.0 - gamma));
  if (std::isinf(integral)) return kInf;
  return legendre_prefactor(gamma, A) * integral;
}

double brute_legendre(const ShapeFunction& psi, double gamma, double A, double f_max) {
  psi.validate();
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  if (!(f_max > 0.0)) throw ConfigError("brute_legendre needs f_max > 0");
  if (psi.is_zero()) return kInf;
  const auto supp = psi.support_cells();
  const double h = psi.h();
  auto sup_at = [&](std::size_t i, double s, double f_lo) {
    const double v = (1.0 - s) * psi.values[i] + s * psi.values[i + 1];
    auto phi = [&](double f) { return f * v + A * (gamma == 0.0 ? 1.0 : std::pow(f, gamma)); };
    return golden_max_log(phi, f_lo, f_max);
  };

  std::vector<double> parts;
  if (gamma > 0.0) {
    // the supremum is monotone along a cell, so its log is unimodal
    for (std::size_t i = 0; i < supp.size(); ++i) {
      if (!supp[i]) continue;
      auto g = [&](double s) { return std::log(sup_at(i, s, 1e-300)); };
      parts.push_back(h * std::exp(quad::log_integrate_exp(g, 0.0, 1.0, 0.5)));
    }
    return pairwise_sum(parts);
  }
  // gamma = 0: the supremum over f >= eps is A + eps psi, linear on a cell,
  // and affine in eps
  auto sum_at = [&](double eps) {
    parts.clear();
    for (std::size_t i = 0; i < supp.size(); ++i) {
      if (supp[i]) parts.push_back(h * sup_at(i, 0.5, eps));
    }
    return pairwise_sum(parts);
  };
  const double eps = 1e-3;
  return 2.0 * sum_at(0.5 * eps) - sum_at(eps);
}

ContinuumEigen eig_continuum(const ShapeFunction& psi, double kappa, int refine) {
  psi.validate();
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (refine < 1) throw ConfigError("refine must be >= 1");
  ContinuumEigen out;
  if (psi.is_zero()) {
    out.lambda = out.lambda_h = out.lambda_h2 = -kInf;
    return out;
  }
  out.lambda_h = eigenvalue_at(psi, kappa, refine);
  out.lambda_h2 = eigenvalue_at(psi, kappa, 2 * refine);
  out.lambda = (4.0 * out.lambda_h2 - out.lambda_h) / 3.0;
  out.error = std::fabs(out.lambda_h2 - out.lambda_h) / 3.0;
  return out;
}

void VariationalConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  if (!(A > 0.0)) throw ConfigError("A must be positive");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (cells < 8) throw ConfigError("need at least 8 cells");
  if (!(R0 > 0.0) || !(R_max >= R0)) throw ConfigError("need 0 < R0 <= R_max");
  if (restarts < 1 || max_iter < 1 || refine < 1) throw ConfigError("restarts, max_iter and refine must be >= 1");
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
}

ChiResult chi_tilde(const VariationalConfig& config) {
  config.validate();
  if (config.gamma == 0.0) return chi_flat(config);
  ChiResult best;
  bool have = false;
  double R = config.R0;
  std::size_t cells = config.cells;
  for (;;) {
    ChiResult cur = chi_at(config, R, cells);
    if (!std::isfinite(cur.chi_tilde) || cur.chi_tilde <= 0.0) {
      throw NumericalError("chi_tilde optimizer produced " + std::to_string(cur.chi_tilde));
    }
    const double gain = have ? (best.chi_tilde - cur.chi_tilde) / best.chi_tilde : 1.0;
    if (gain >= config.tol) best = std::move(cur);
    have = true;
    if (gain < config.tol) break;
    if (2.0 * R > config.R_max) {
      best.stagnated = true;
      break;
    }
    R *= 2.0;
    cells *= 2;
  }
  return best;
}

}  // namespace pam1d
