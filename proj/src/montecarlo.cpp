#include "pam1d/montecarlo.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pam1d/errors.hpp"
#include "pam1d/lattice.hpp"
#include "pam1d/parallel.hpp"
#include "pam1d/rng.hpp"

namespace pam1d {

namespace {

// One walk step: holding time and direction drawn in this order from the
// sample's own stream.
struct Stepper {
  StreamRng rng;
  double rate;

  double hold() { return -std::log(rng.uniform()) / rate; }
  int direction() { return rng.uniform() < 0.5 ? -1 : 1; }
};

void require_kappa_t(double kappa, double t) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa must be positive");
  if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("t must be finite and nonnegative");
}

}  // namespace

WalkPath simulate_walk(double kappa, double t, std::uint64_t seed, std::uint64_t index) {
  require_kappa_t(kappa, t);
  WalkPath path;
  path.kappa = kappa;
  path.t = t;
  Stepper step{StreamRng(seed, index), 2.0 * kappa};
  double time = step.hold();
  while (time <= t) {
    path.jump_times.push_back(time);
    path.positions.push_back(path.positions.back() + step.direction());
    time += step.hold();
  }
  return path;
}

FkEstimate fk_estimate(const Field& field, double kappa, double t, std::size_t nsamples,
                       std::uint64_t seed, std::optional<std::int64_t> box_R) {
  require_kappa_t(kappa, t);
  if (nsamples == 0) throw ConfigError("fk_estimate needs at least one sample");
  if (!field.covers(0, 0)) throw ConfigError("field must contain the origin");
  if (box_R && (*box_R < 0 || !field.covers(-*box_R, *box_R))) {
    throw ConfigError("field does not cover the box");
  }
  std::vector<double> xi(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) xi[i] = field.sites()[i].xi();
  const std::int64_t lo = box_R ? -*box_R : field.lo();
  const std::int64_t hi = box_R ? *box_R : field.hi();

  std::vector<double> value(nsamples), exited(nsamples);
  parallel_for(nsamples, [&](std::size_t i) {
    Stepper step{StreamRng(seed, i), 2.0 * kappa};
    std::int64_t pos = 0;
    double time = 0.0;
    double integral = 0.0;
    bool out = false;
    for (;;) {
      const double h = step.hold();
      const double v = xi[static_cast<std::size_t>(pos - field.lo())];
      const double dt = std::min(h, t - time);
      if (dt > 0.0) integral += v * dt;
      time += h;
      if (time >= t || integral == -std::numeric_limits<double>::infinity()) break;
      pos += step.direction();
      if (pos < lo || pos > hi) {
        out = true;
        break;
      }
    }
    value[i] = out ? 0.0 : std::exp(integral);
    exited[i] = out ? 1.0 : 0.0;
  });

  const double n = static_cast<double>(nsamples);
  FkEstimate est;
  est.samples = nsamples;
  est.mean = pairwise_sum(value) / n;
  std::vector<double> dev(nsamples);
  for (std::size_t i = 0; i < nsamples; ++i) dev[i] = (value[i] - est.mean) * (value[i] - est.mean);
  est.std_error = nsamples > 1 ? std::sqrt(pairwise_sum(dev) / (n - 1.0) / n) : 0.0;
  est.exit_fraction = pairwise_sum(exited) / n;
  return est;
}

ScreeningBound screening_lower_bound(const Field& field, double kappa, double t, std::int64_t y,
                                     std::int64_t Rmicro, std::optional<double> s) {
  require_kappa_t(kappa, t);
  if (Rmicro < 0) throw ConfigError("Rmicro must be nonnegative");
  const std::int64_t a = std::min<std::int64_t>(0, y - Rmicro);
  const std::int64_t b = std::max<std::int64_t>(0, y + Rmicro);
  if (!field.covers(a, b)) throw ConfigError("field does not cover the path and the microbox");

  // Travel: at each site x before y, the holding time is at most r_x and the
  // jump goes towards y. Both events are independent across sites.
  const int dir = y >= 0 ? 1 : -1;
  double log_travel = 0.0;
  double budget = 0.0;
  for (std::int64_t x = 0; x != y; x += dir) {
    const SiteValue& site = field.at(x);
    const double log_w = site.log_neg_xi_or_one();  // log(-xi v 1)
    const double r = std::exp(-log_w);
    budget += r;
    // xi r_x = -1 when -xi >= 1, else xi itself (r_x = 1).
    const double xi_r = log_w > 0.0 ? -1.0 : site.xi();
    log_travel += std::log(0.5 * -std::expm1(-2.0 * kappa * r)) + xi_r;
  }
  const double split = s.value_or(std::min(budget, 0.5 * t));
  if (!(split >= 0.0 && split <= t)) throw ConfigError("split time must lie in [0, t]");
  if (budget > split) {
    throw ConfigError("strategy infeasible: travel budget " + std::to_string(budget) +
                      " exceeds split time " + std::to_string(split));
  }
  ScreeningBound out;
  out.y = y;
  out.travel_budget = budget;
  out.split = split;

  // Clamping raises xi, so clamped sites of the microbox are treated as
  // killing sites instead: the microbox shrinks to the unclamped stretch
  // around y, which keeps the bound rigorous.
  bool clamped = false;
  const double xi_y = field.at(y).xi_clamped(kXiMax, clamped);
  if (clamped) {
    out.log_lb = -std::numeric_limits<double>::infinity();
    out.lambda = -std::numeric_limits<double>::infinity();
    out.log_e_center = 0.0;
    return out;
  }
  auto unclamped = [&](std::int64_t x) {
    bool c = false;
    field.at(x).xi_clamped(kXiMax, c);
    return !c;
  };
  std::int64_t lo = y;
  std::int64_t hi = y;
  while (lo > y - Rmicro && unclamped(lo - 1)) --lo;
  while (hi < y + Rmicro && unclamped(hi + 1)) ++hi;
  TridiagonalOperator op;
  op.z = y;
  op.kappa = kappa;
  for (std::int64_t x = lo; x <= hi; ++x) op.diag.push_back(field.at(x).xi() - 2.0 * kappa);
  const auto sd = principal_eigpair(op);

  // Waiting at y until time s: no jump and potential cost, bounded by the
  // full length s.
  const double log_wait = split > 0.0 ? (xi_y - 2.0 * kappa) * split : 0.0;
  out.lambda = sd.principal;
  out.log_e_center = sd.log_principal_vec[static_cast<std::size_t>(y - lo)];
  out.log_lb = log_travel + log_wait + 2.0 * out.log_e_center + (t - split) * sd.principal;
  return out;
}

ScreeningBound best_screening_bound(const Field& field, double kappa, double t,
                                    std::int64_t radius, std::int64_t Rmicro) {
  if (radius < 0) throw ConfigError("search radius must be nonnegative");
  const std::int64_t step = std::max<std::int64_t>(1, Rmicro);
  std::optional<ScreeningBound> best;
  for (std::int64_t k = 0; k * step <= radius; ++k) {
    for (int sign : {1, -1}) {
      if (k == 0 && sign < 0) continue;
      const std::int64_t y = sign * k * step;
      ScreeningBound cand;
      try {
        cand = screening_lower_bound(field, kappa, t, y, Rmicro);
      } catch (const ConfigError&) {
        continue;  // infeasible at the default split
      }
      if (!best || cand.log_lb > best->log_lb) best = cand;
    }
  }
  if (!best) throw NumericalError("no feasible screening candidate");
  return *best;
}

}  // namespace pam1d
