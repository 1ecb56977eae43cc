#pragma once

// Desk-scale checks of the asymptotic statements: rate curves, the upper
// tail collapse, the two laws for sums of log(-xi v 1), and the microbox
// scan.

#include <cstdint>
#include <vector>

#include "pam1d/potential.hpp"
#include "pam1d/variational.hpp"

namespace pam1d {

struct ExperimentConfig {
  PotentialSpec spec;
  std::vector<std::uint64_t> seeds;
  std::vector<double> t_grid;
  double rtol = 1e-6;
  double kappa = 1.0;
  std::int64_t R_cap = 1 << 20;

  /// Nonempty seeds, increasing t grid above tmin.
  void validate() const;
};

/// t with 1/G(t) = e^n for n = n_lo..n_hi.
std::vector<double> g_level_grid(const PotentialSpec& spec, int n_lo, int n_hi);
/// Geometric grid from "lo:hi:geometric:count".
std::vector<double> parse_t_grid(const std::string& text);

struct RateRow {
  double t = 0.0;
  std::uint64_t seed = 0;
  std::int64_t R_used = 0;
  double log_u = 0.0;
  double b_t = 0.0;
  double alpha_bt_sq = 0.0;
  /// alpha(b_t)^2 / t * log u(t, 0).
  double rho = 0.0;
  double b_star = 0.0;
  /// Same rate under b*_t.
  double rho_star = 0.0;
  /// Solver cap exceeded; numeric columns are NaN.
  bool flagged = false;
};

/// Rows ordered by (seed, t).
std::vector<RateRow> rate_curve(const ExperimentConfig& config);

/// Median over seeds of rho at each t of the grid (flagged rows skipped).
std::vector<double> median_rho(const std::vector<RateRow>& rows, const std::vector<double>& ts);

struct CollapseRow {
  double t = 0.0;
  double y = 0.0;
  double scaled = 0.0;
  double target = 0.0;
  double error = 0.0;
};

struct CollapseReport {
  std::vector<CollapseRow> rows;
  /// max_y |scaled + A y^gamma| for each t.
  std::vector<double> max_error;
};

/// alpha_t^3 / t H(y t / alpha_t) against -A y^gamma.
CollapseReport check_assumption_H(const PotentialSpec& spec, const std::vector<double>& ts,
                                  const std::vector<double>& ys);

struct StatRow {
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  double statistic = 0.0;
};

struct LlnReport {
  std::vector<StatRow> rows;
  /// Per n: seed median, fraction above 1 and above 10.
  std::vector<double> median, frac_above_1, frac_above_10;
};

/// sum_{x=1}^{floor(2 n log n)} log((-xi(x) v b) / b) / G^{-1}(1/n).
LlnReport check_lln(const PotentialSpec& spec, double b, const std::vector<std::int64_t>& ns,
                    const std::vector<std::uint64_t>& seeds);

struct LastReport {
  std::vector<StatRow> rows;
  double rho = 0.0;
  /// Per n: seed median and fraction at most 1.2.
  std::vector<double> median, frac_below;
};

/// rho = 2 <1 / G^_eta(Y_a(0))> by Monte Carlo (rho_samples draws).
double estimate_rho(const PotentialSpec& spec, double eta, double theta_prime = 0.5,
                    std::int64_t rho_samples = 1000000, std::uint64_t rho_seed = 0x5eed);
/// Inverse of the decreasing function G~_eta.
double invert_g_tilde(const PotentialSpec& spec, double eta, double y, double theta_prime = 0.5);

/// sum_{x=1}^n log(-xi(x) v 1) / G~_eta^{-1}(rho / n).
LastReport check_last(const PotentialSpec& spec, double eta, const std::vector<std::int64_t>& ns,
                      const std::vector<std::uint64_t>& seeds, double theta_prime = 0.5,
                      std::int64_t rho_samples = 1000000);

struct MicroboxRow {
  double t = 0.0;
  double alpha_bt = 0.0;
  std::int64_t gamma_t = 0;
  std::int64_t box_sites = 0;
  /// Fraction of seeds with a centre y_t in [-gamma_t, gamma_t].
  double frequency = 0.0;
  /// Centre found per seed (INT64_MIN when none).
  std::vector<std::int64_t> centers;
};

struct MicroboxOptions {
  double eps = 0.1;
  double eta = 0.5;
  double theta_prime = 0.5;
  /// rho of gamma_t; estimated with estimate_rho when <= 0.
  double rho = 0.0;
  /// Scan at most this many centres on each side.
  std::int64_t scan_cap = 50000000;
};

/// Scans for y with xi(z + y) >= psi_t(z) - eps alpha_{b_t}^{-2} on the
/// rescaled support of psi, psi_t(z) = psi(z / alpha_{b_t}) / alpha_{b_t}^2.
std::vector<MicroboxRow> check_microbox(const PotentialSpec& spec, const ShapeFunction& psi,
                                        const std::vector<double>& ts,
                                        const std::vector<std::uint64_t>& seeds,
                                        const MicroboxOptions& opt = {});

}  // namespace pam1d
