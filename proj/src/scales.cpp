#include "pam1d/scales.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pam1d/errors.hpp"

namespace pam1d {

namespace {

constexpr double kInvE = 0.36787944117144233;

void require_t(const ScaleParams& params, double t) {
  if (!(t >= params.tmin) || !std::isfinite(t)) {
    throw ConfigError("t = " + std::to_string(t) + " is below tmin = " +
                      std::to_string(params.tmin));
  }
}

}  // namespace

ScaleParams exponents_for(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0,1)");
  ScaleParams p;
  p.gamma = gamma;
  p.nu = (1.0 - gamma) / (3.0 - gamma);
  p.beta = 2.0 * p.nu / (1.0 - 2.0 * p.nu);
  return p;
}

ScaleParams make_scale_params(const PotentialSpec& spec) {
  spec.validate();
  ScaleParams p = exponents_for(spec.gamma);
  // Pure heavy-branch specs (q = 1) have no upper-tail constant.
  p.A = spec.mix_q < 1.0 ? canonical_A(spec) : std::numeric_limits<double>::quiet_NaN();
  double t = 1.0;
  for (int k = 0; k < 1000; ++k, t *= 2.0) {
    const double g = cumulant_G(spec, t);
    if (g < kInvE) {
      p.tmin = t;
      return p;
    }
  }
  throw NumericalError("no t with G(t) < 1/e up to 2^1000");
}

double alpha(const ScaleParams& params, double t) {
  if (!(t > 0.0)) throw ConfigError("alpha requires t > 0");
  return std::pow(t, params.nu);
}

double b_from_neg_log_g(const ScaleParams& params, double neg_log_g) {
  if (!(neg_log_g > 0.0)) throw ConfigError("-log G must be positive");
  return std::pow(neg_log_g, 1.0 / (1.0 - 2.0 * params.nu));
}

double b_from_neg_log_g_bisect(const std::function<double(double)>& alpha_fn, double neg_log_g) {
  if (!(neg_log_g > 0.0)) throw ConfigError("-log G must be positive");
  auto h = [&](double b) { return std::log(b) - 2.0 * std::log(alpha_fn(b)) - std::log(neg_log_g); };
  double lo = 1.0;
  double hi = 2.0;
  while (h(lo) > 0.0) {
    lo *= 0.5;
    if (lo < 1e-300) throw NumericalError("b bisection: no lower bracket");
  }
  while (h(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e300) throw NumericalError("b bisection: no upper bracket");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (h(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi / lo - 1.0 < 1e-15) break;
  }
  return std::sqrt(lo * hi);
}

double b_scale(const PotentialSpec& spec, const ScaleParams& params, double t) {
  require_t(params, t);
  const double g = cumulant_G(spec, t);
  if (!(g > 0.0 && g < 1.0)) throw NumericalError("b_scale: G(t) outside (0,1)");
  return b_from_neg_log_g(params, -std::log(g));
}

double b_star(const ScaleParams& params, double t) {
  if (!(t > std::exp(1.0))) throw ConfigError("b_star requires t > e");
  return b_from_neg_log_g(params, std::log(t));
}

long long r_from_g(double g) {
  if (!(g > 0.0 && g < 1.0)) throw ConfigError("r(t) requires G(t) in (0,1)");
  const double r = std::ceil(-3.0 * std::log(g) / g);
  if (!(r < 9.2e18)) throw NumericalError("r(t) overflows a 64-bit integer");
  return static_cast<long long>(r);
}

long long r_box(const PotentialSpec& spec, const ScaleParams& params, double t) {
  require_t(params, t);
  return r_from_g(cumulant_G(spec, t));
}

double gamma_box_at(const PotentialSpec& spec, double eta, double rho, double ell,
                    double theta_prime) {
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");
  return rho / g_tilde(spec, eta, ell, theta_prime);
}

double gamma_box(const PotentialSpec& spec, const ScaleParams& params, double eta, double rho,
                 double t, double theta_prime) {
  const double b = b_scale(spec, params, t);
  const double ell = t * std::pow(alpha(params, b), -3.0);
  return gamma_box_at(spec, eta, rho, ell, theta_prime);
}

std::vector<double> gamma_box_curve(const PotentialSpec& spec, const ScaleParams& params,
                                    double eta, double rho, const std::vector<double>& ts,
                                    double theta_prime) {
  std::vector<double> out;
  out.reserve(ts.size());
  double running = 0.0;
  for (double t : ts) {
    running = std::max(running, gamma_box(spec, params, eta, rho, t, theta_prime));
    out.push_back(running);
  }
  return out;
}

double invert_G(const PotentialSpec& spec, double y) {
  if (!(y > 0.0)) throw ConfigError("invert_G requires y > 0");
  double lo = 1.0;
  double hi = 1.0;
  double g_lo = cumulant_G(spec, lo);
  for (int k = 0; g_lo <= y; ++k) {
    if (k > 2000) throw ConfigError("invert_G: y above the range of G");
    lo *= 0.5;
    g_lo = cumulant_G(spec, lo);
  }
  double g_hi = cumulant_G(spec, hi);
  for (int k = 0; g_hi > y; ++k) {
    if (k > 2000) throw ConfigError("invert_G: y below the range of G");
    hi *= 2.0;
    g_hi = cumulant_G(spec, hi);
  }
  if (lo == hi) lo = 0.5 * hi;
  // G(lo) > y >= G(hi); bisect in log ell.
  for (int it = 0; it < 300; ++it) {
    const double mid = std::sqrt(lo * hi);
    const double g = cumulant_G(spec, mid);
    if (std::fabs(g - y) <= 1e-12 * y) return mid;
    if (g > y) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi / lo - 1.0 < 1e-15) break;
  }
  const double mid = std::sqrt(lo * hi);
  if (!(std::fabs(cumulant_G(spec, mid) - y) <= 1e-10 * y)) {
    throw NumericalError("invert_G: G too flat to reach relative 1e-10");
  }
  return mid;
}

}  // namespace pam1d
