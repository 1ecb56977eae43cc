#pragma once

// Continuum shape functional, its Legendre transform, the principal
// eigenvalue of kappa d^2/dx^2 + psi and the rate constant chi~.

#include <cstddef>
#include <functional>
#include <vector>

namespace pam1d {

/// Piecewise-linear psi <= 0 on nodes x_i = -R + i h, h = 2R / cells.
struct ShapeFunction {
  double R = 0.5;
  std::vector<double> values;

  static ShapeFunction from_function(double R, std::size_t cells,
                                     const std::function<double(double)>& fn);

  std::size_t cells() const { return values.empty() ? 0 : values.size() - 1; }
  double h() const { return 2.0 * R / static_cast<double>(cells()); }
  double node(std::size_t i) const { return -R + static_cast<double>(i) * h(); }
  /// Cell i = [x_i, x_{i+1}] belongs to the support when psi < 0 at one of
  /// its endpoints (closure of {psi < 0}).
  std::vector<bool> support_cells() const;
  double support_length() const;
  bool is_zero() const;
  /// Linear interpolation; 0 outside [-R, R].
  double value_at(double x) const;
  /// Throws ConfigError on positive or non-finite values, or fewer than 2 nodes.
  void validate() const;
};

/// -A int f^gamma 1{f > 0} over [-R, R] for f >= 0 sampled on cells+1 nodes.
/// Trapezoid rule for gamma > 0; for gamma = 0 the measure of {f > 0} under
/// linear interpolation.
double functional_H(const std::vector<double>& f, double R, double gamma, double A);

/// Closed-form Legendre transform; +inf for psi == 0 or a divergent integral.
double legendre_L(const ShapeFunction& psi, double gamma, double A);

/// Direct maximization of (f, psi) - H(f) with f supported in supp psi:
/// pointwise golden-section search over f in (0, f_max], integrated
/// adaptively over each cell. For gamma = 0 the supremum sits at f -> 0 and
/// is extrapolated from f = eps, eps / 2.
double brute_legendre(const ShapeFunction& psi, double gamma, double A, double f_max = 1e8);

struct ContinuumEigen {
  double lambda = 0.0;
  /// |lambda_{h/2} - lambda_h| / 3.
  double error = 0.0;
  double lambda_h = 0.0;
  double lambda_h2 = 0.0;
};

/// Dirichlet principal eigenvalue on supp psi by second-order differences
/// with step h / refine and h / (2 refine), Richardson-extrapolated.
/// psi == 0 gives lambda = -inf.
ContinuumEigen eig_continuum(const ShapeFunction& psi, double kappa, int refine = 4);

struct VariationalConfig {
  double gamma = 0.0;
  double A = 1.0;
  double kappa = 1.0;
  /// Cells of the psi grid at R0; the mesh width is kept as R doubles.
  std::size_t cells = 256;
  double R0 = 1.0;
  double R_max = 64.0;
  int restarts = 8;
  int max_iter = 3000;
  /// Relative improvement below which R doubling stops.
  double tol = 1e-4;
  int refine = 4;

  void validate() const;
};

struct ChiResult {
  double chi_tilde = 0.0;
  double R_star = 0.0;
  ShapeFunction psi;
  double constraint_value = 0.0;
  double lambda_error = 0.0;
  /// R schedule hit R_max or a start ran out of iterations.
  bool stagnated = false;
  /// Distinct -lambda values reached by the starts at R_star (ascending).
  std::vector<double> local_optima;
};

ChiResult chi_tilde(const VariationalConfig& config);

}  // namespace pam1d
