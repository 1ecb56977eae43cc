#pragma once

#include <functional>

namespace pam1d::quad {

/// Relative tolerance used by every quadrature in the library.
inline constexpr double kRelTol = 1e-10;

/// Logarithm of the integral of exp(g) over [lo, hi]; either bound may be
/// infinite. g must be unimodal on the interval (values of -inf allowed) and,
/// on infinite ends, decay at least linearly. `hint` is a finite point inside
/// the interval where the search for the mode starts.
///
/// The integrand is normalized by its maximum, split into segments whose
/// widths grow geometrically away from the mode, and each segment is
/// integrated by adaptive Gauss-Kronrod. Integration stops once g falls 80
/// below its peak. Returns -inf for an identically vanishing integrand.
/// Throws NumericalError when a segment misses the tolerance.
double log_integrate_exp(const std::function<double(double)>& g, double lo, double hi,
                         double hint);

/// log(exp(a) + exp(b)) without overflow.
double log_add_exp(double a, double b);

}  // namespace pam1d::quad
