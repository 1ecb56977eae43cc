#pragma once

// Deterministic scale functions: alpha_t, b_t, b*_t, r(t), gamma_t and the
// inverse of G.

#include <functional>
#include <vector>

#include "pam1d/potential.hpp"

namespace pam1d {

struct ScaleParams {
  double gamma = 0.0;
  double nu = 1.0 / 3.0;
  double beta = 2.0;
  /// NaN when mix_q = 1.
  double A = 0.0;
  /// Smallest power of two with G(t) < 1/e.
  double tmin = 0.0;
};

/// nu and beta from gamma only; A and tmin left at zero.
ScaleParams exponents_for(double gamma);
/// Full canonicalization (evaluates A and scans for tmin).
ScaleParams make_scale_params(const PotentialSpec& spec);

double alpha(const ScaleParams& params, double t);

/// b with b / alpha(b)^2 = neg_log_g under the canonical alpha.
double b_from_neg_log_g(const ScaleParams& params, double neg_log_g);
/// Same identity for an arbitrary increasing alpha, solved by bisection.
double b_from_neg_log_g_bisect(const std::function<double(double)>& alpha_fn, double neg_log_g);

double b_scale(const PotentialSpec& spec, const ScaleParams& params, double t);
double b_star(const ScaleParams& params, double t);

/// ceil(-3 log g / g) for a value g = G(t) in (0, 1).
long long r_from_g(double g);
long long r_box(const PotentialSpec& spec, const ScaleParams& params, double t);

/// rho / G~_eta(ell) with ell = t alpha(b_t)^-3 supplied directly.
double gamma_box_at(const PotentialSpec& spec, double eta, double rho, double ell,
                    double theta_prime = 0.5);
double gamma_box(const PotentialSpec& spec, const ScaleParams& params, double eta, double rho,
                 double t, double theta_prime = 0.5);
/// gamma_t along an increasing grid, made nondecreasing by a running maximum.
std::vector<double> gamma_box_curve(const PotentialSpec& spec, const ScaleParams& params,
                                    double eta, double rho, const std::vector<double>& ts,
                                    double theta_prime = 0.5);

/// ell with G(ell) = y, |G(ell) - y| <= 1e-10 y.
double invert_G(const PotentialSpec& spec, double y);

}  // namespace pam1d
