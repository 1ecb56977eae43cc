#pragma once

// Continuous-time random walk, Feynman-Kac estimation of u(t, 0) and the
// screening-strategy lower bound.

#include <cstdint>
#include <optional>
#include <vector>

#include "pam1d/potential.hpp"

namespace pam1d {

/// Nearest-neighbour walk on Z started at 0; jump k happens at jump_times[k]
/// and lands on positions[k + 1].
struct WalkPath {
  double kappa = 1.0;
  double t = 0.0;
  std::vector<double> jump_times;
  std::vector<std::int64_t> positions{0};

  std::int64_t final_position() const { return positions.back(); }
};

/// Holding times Exp(2 kappa), steps +-1 with probability 1/2. Sample `index`
/// of a given seed is reproducible on its own.
WalkPath simulate_walk(double kappa, double t, std::uint64_t seed, std::uint64_t index = 0);

struct FkEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  /// Fraction of paths that left the sampled interval (unbounded mode) or the
  /// box (box mode). Such paths are scored 0.
  double exit_fraction = 0.0;
  std::size_t samples = 0;
};

/// Estimates u(t, 0) (box_R empty) or u_R(t, 0). In unbounded mode paths that
/// leave the field are scored 0, so the mean estimates a lower bound of u.
FkEstimate fk_estimate(const Field& field, double kappa, double t, std::size_t nsamples,
                       std::uint64_t seed, std::optional<std::int64_t> box_R = std::nullopt);

struct ScreeningBound {
  double log_lb = 0.0;
  std::int64_t y = 0;
  /// Sum of the per-site travel budgets r_x on the way to y.
  double travel_budget = 0.0;
  double split = 0.0;
  double lambda = 0.0;
  double log_e_center = 0.0;
};

/// Rigorous lower bound on log u(t, 0) from the strategy: run straight to y,
/// holding at most r_x = (-xi(x) v 1)^-1 at each site on the way, wait at y
/// until time s, then stay in y + [-Rmicro, Rmicro]. s defaults to
/// min(sum r_x, t / 2). Throws ConfigError when sum r_x > s.
ScreeningBound screening_lower_bound(const Field& field, double kappa, double t, std::int64_t y,
                                     std::int64_t Rmicro, std::optional<double> s = std::nullopt);

/// Best screening bound over y in {0, +-Rmicro, +-2 Rmicro, ...} with |y| <= radius.
ScreeningBound best_screening_bound(const Field& field, double kappa, double t,
                                    std::int64_t radius, std::int64_t Rmicro);

}  // namespace pam1d
