#pragma once

// Dirichlet boxes for kappa Laplacian + xi on Z: operator assembly, principal
// and full eigenpairs, exact solution of the lattice PDE and the truncation
// diagnostic.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "pam1d/potential.hpp"

namespace pam1d {

/// Heavy sites with -xi above this enter the linear algebra as -kXiMax.
inline constexpr double kXiMax = 1e12;

struct TridiagonalOperator {
  std::int64_t z = 0;
  std::int64_t R = 0;
  double kappa = 1.0;
  /// xi(z+x) - 2 kappa for x = -R..R.
  std::vector<double> diag;
  /// Offsets x in [-R, R] whose xi was clamped to -kXiMax.
  std::vector<std::int64_t> clamped;

  std::size_t size() const { return diag.size(); }
  /// Off-diagonal vector (constant kappa), length size() - 1.
  std::vector<double> offdiag() const;
  /// Same operator with every diagonal entry shifted by c.
  TridiagonalOperator shifted(double c) const;
};

TridiagonalOperator hamiltonian(const Field& field, std::int64_t z, std::int64_t R, double kappa);
/// Operator on 2R+1 sites with given potential values (no clamping).
TridiagonalOperator hamiltonian_from_xi(const std::vector<double>& xi, double kappa);

/// <g, H g> for a vector on the box.
double quadratic_form(const TridiagonalOperator& op, const std::vector<double>& g);

struct SpectralData {
  std::size_t n = 0;
  /// Ascending; only the principal value when produced by principal_eigpair.
  std::vector<double> eigenvalues;
  /// Column-major n x eigenvalues.size(), matching eigenvalues.
  std::vector<double> eigenvectors;
  double principal = 0.0;
  /// l2-normalized principal eigenvector with positive entries.
  std::vector<double> principal_vec;
  /// log of principal_vec; finite even where principal_vec underflows.
  std::vector<double> log_principal_vec;
  /// ||H e - lambda e||_2.
  double residual = 0.0;

  double vec(std::size_t i, std::size_t col) const { return eigenvectors[col * n + i]; }
};

/// Largest eigenvalue by Sturm multisection, eigenvector by a twisted
/// factorization (no division of tiny entries, so log entries stay exact).
SpectralData principal_eigpair(const TridiagonalOperator& op);

/// Default dimension cap for full_spectrum.
inline constexpr std::size_t kDenseLimit = 20000;

SpectralData full_spectrum(const TridiagonalOperator& op, std::size_t dense_limit = kDenseLimit);

struct BoxSolution {
  /// u_R(t, z + x), x = -R..R (may underflow to 0; see log_u).
  std::vector<double> u;
  std::vector<double> log_u;
  double lambda = 0.0;
  /// log e_R(z) of the principal eigenvector at the center.
  double log_e_center = 0.0;
  std::size_t eigenpairs_used = 0;
  std::size_t clamped_sites = 0;

  double log_u_center() const { return log_u[log_u.size() / 2]; }
};

/// Spectral solution of the Dirichlet problem on z + [-R, R] with u(0) = 1.
BoxSolution solve_box(const TridiagonalOperator& op, double t);
BoxSolution solve_box(const Field& field, std::int64_t z, std::int64_t R, double kappa, double t);

struct AdaptiveOptions {
  double kappa = 1.0;
  std::int64_t R0 = 8;
  std::int64_t R_cap = 10000;
};

struct AdaptiveSolution {
  double u = 0.0;
  double log_u = 0.0;
  std::int64_t R = 0;
  double lambda = 0.0;
  std::size_t clamped_sites = 0;
  /// log u_R(t, 0) for every R tried.
  std::vector<std::pair<std::int64_t, double>> history;
};

/// Doubles R until u_R(t, 0) changes by less than rtol twice in a row. The
/// result is a lower bound for u(t, 0).
AdaptiveSolution solve_adaptive(const std::function<Field(std::int64_t, std::int64_t)>& sampler,
                                double t, double rtol, const AdaptiveOptions& opt = {});
AdaptiveSolution solve_adaptive(const PotentialSpec& spec, std::uint64_t seed, double t,
                                double rtol, const AdaptiveOptions& opt = {});

struct TruncationProduct {
  /// Sum over x = -R..0 of log(b / (-xi(x) v b)).
  double left = 0.0;
  /// Sum over x = 0..R.
  double right = 0.0;
};

TruncationProduct truncation_product(const Field& field, double b, std::int64_t R,
                                     double kappa = 1.0);

}  // namespace pam1d
