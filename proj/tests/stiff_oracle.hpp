#pragma once

#include <vector>

// u' = H u, u(0) = 1 for the symmetric tridiagonal H = (diag, kappa),
// integrated with adaptive Rosenbrock steps. Returns u(t).
std::vector<double> stiff_reference(const std::vector<double>& diag, double kappa, double t);

// log of (exp(tH) 1) at the middle site, by scaling and squaring a Taylor
// polynomial in 100-digit arithmetic.
double log_u_center_multiprecision(const std::vector<double>& diag, double kappa, double t);
