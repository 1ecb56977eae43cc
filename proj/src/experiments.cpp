#include "pam1d/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "pam1d/errors.hpp"
#include "pam1d/lattice.hpp"
#include "pam1d/parallel.hpp"
#include "pam1d/scales.hpp"

namespace pam1d {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median_of(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double fraction_if(const std::vector<double>& v, bool (*pred)(double, double), double c) {
  if (v.empty()) return kNaN;
  std::size_t k = 0;
  for (double x : v) k += pred(x, c);
  return static_cast<double>(k) / static_cast<double>(v.size());
}

void require_heavy_lower_tail(const PotentialSpec& spec, const char* what) {
  spec.validate();
  if (spec.finite_log_moment()) {
    throw ConfigError(std::string(what) +
                      ": the lower tail has finite logarithmic moments (BoundedLog); the law "
                      "needs <log(-xi(0) v 1)> = inf");
  }
}

// 1/G^_eta: linear below x0, 1/G~_eta shifted to stay continuous above.
struct InverseGHat {
  double x0 = 1.0;
  double d0 = 0.0;
  double shift = 0.0;
  const PotentialSpec* spec = nullptr;
  double eta = 0.5;
  double theta_prime = 0.5;

  double operator()(double x) const {
    if (x <= x0) return d0 * x;
    return 1.0 / g_tilde(*spec, eta, x, theta_prime) + shift;
  }
};

InverseGHat make_inverse_g_hat(const PotentialSpec& spec, double eta, double theta_prime) {
  InverseGHat f;
  f.spec = &spec;
  f.eta = eta;
  f.theta_prime = theta_prime;
  f.x0 = g_tilde_concavity_threshold(spec, eta, theta_prime);
  auto inv = [&](double x) { return 1.0 / g_tilde(spec, eta, x, theta_prime); };
  if (const auto* p = std::get_if<ParetoLog>(&spec.lower)) {
    const double k = eta * p->zeta;
    f.d0 = k * std::pow(f.x0, k - 1.0);
  } else {
    const double dx = 1e-6 * f.x0;
    f.d0 = (inv(f.x0 + dx) - inv(f.x0)) / dx;
  }
  f.shift = f.d0 * f.x0 - inv(f.x0);
  return f;
}

}  // namespace

void ExperimentConfig::validate() const {
  spec.validate();
  if (seeds.empty()) throw ConfigError("experiment needs at least one seed");
  if (t_grid.empty()) throw ConfigError("experiment needs a nonempty t grid");
  if (!(rtol > 0.0) || !(kappa > 0.0)) throw ConfigError("rtol and kappa must be positive");
  const double tmin = make_scale_params(spec).tmin;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= tmin)) {
      throw ConfigError("t grid value " + std::to_string(t_grid[i]) + " below tmin " +
                        std::to_string(tmin));
    }
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw ConfigError("t grid must be increasing");
  }
}

std::vector<double> g_level_grid(const PotentialSpec& spec, int n_lo, int n_hi) {
  if (n_lo < 1 || n_hi < n_lo) throw ConfigError("g level grid needs 1 <= n_lo <= n_hi");
  std::vector<double> out;
  for (int n = n_lo; n <= n_hi; ++n) out.push_back(invert_G(spec, std::exp(-static_cast<double>(n))));
  return out;
}

std::vector<double> parse_t_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 4 || parts[2] != "geometric") {
    throw ConfigError("t grid must look like lo:hi:geometric:count, got '" + text + "'");
  }
  double lo, hi;
  long count;
  try {
    std::size_t used = 0;
    lo = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("lo");
    hi = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("hi");
    count = std::stol(parts[3], &used);
    if (used != parts[3].size()) throw std::invalid_argument("count");
  } catch (const std::exception&) {
    throw ConfigError("cannot parse t grid '" + text + "'");
  }
  if (!(lo > 0.0) || !(hi >= lo) || count < 1 || (count == 1 && hi != lo)) {
    throw ConfigError("t grid needs 0 < lo <= hi and count >= 1");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    const double s = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, s);
  }
  out.back() = hi;
  return out;
}

std::vector<RateRow> rate_curve(const ExperimentConfig& config) {
  config.validate();
  const auto params = make_scale_params(config.spec);
  const std::size_t nt = config.t_grid.size();
  std::vector<RateRow> rows(config.seeds.size() * nt);
  AdaptiveOptions opt;
  opt.kappa = config.kappa;
  opt.R_cap = config.R_cap;
  parallel_for(rows.size(), [&](std::size_t k) {
    RateRow& row = rows[k];
    row.seed = config.seeds[k / nt];
    row.t = config.t_grid[k % nt];
    row.b_t = b_scale(config.spec, params, row.t);
    row.alpha_bt_sq = std::pow(alpha(params, row.b_t), 2.0);
    row.b_star = row.t > std::exp(1.0) ? b_star(params, row.t) : kNaN;
    try {
      const auto sol = solve_adaptive(config.spec, row.seed, row.t, config.rtol, opt);
      row.R_used = sol.R;
      row.log_u = sol.log_u;
      row.rho = row.alpha_bt_sq / row.t * row.log_u;
      row.rho_star = std::pow(alpha(params, row.b_star), 2.0) / row.t * row.log_u;
    } catch (const NumericalError&) {
      row.flagged = true;
      row.log_u = row.rho = row.rho_star = kNaN;
    }
  });
  return rows;
}

std::vector<double> median_rho(const std::vector<RateRow>& rows, const std::vector<double>& ts) {
  std::vector<double> out;
  for (double t : ts) {
    std::vector<double> v;
    for (const auto& r : rows) {
      if (r.t == t && !r.flagged) v.push_back(r.rho);
    }
    out.push_back(median_of(v));
  }
  return out;
}

CollapseReport check_assumption_H(const PotentialSpec& spec, const std::vector<double>& ts,
                                  const std::vector<double>& ys) {
  const auto params = make_scale_params(spec);
  if (!std::isfinite(params.A)) throw ConfigError("assumption (H) needs mix_q < 1");
  for (double y : ys) {
    if (!(y > 0.0)) throw ConfigError("y grid must lie in (0, inf)");
  }
  CollapseReport rep;
  rep.rows.resize(ts.size() * ys.size());
  parallel_for(rep.rows.size(), [&](std::size_t k) {
    auto& row = rep.rows[k];
    row.t = ts[k / ys.size()];
    row.y = ys[k % ys.size()];
    const double a = alpha(params, row.t);
    row.scaled = a * a * a / row.t * cumulant_H(spec, row.y * row.t / a);
    row.target = -params.A * std::pow(row.y, params.gamma);
    row.error = std::fabs(row.scaled - row.target);
  });
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double m = 0.0;
    for (std::size_t j = 0; j < ys.size(); ++j) m = std::max(m, rep.rows[i * ys.size() + j].error);
    rep.max_error.push_back(m);
  }
  return rep;
}

LlnReport check_lln(const PotentialSpec& spec, double b, const std::vector<std::int64_t>& ns,
                    const std::vector<std::uint64_t>& seeds) {
  require_heavy_lower_tail(spec, "check_lln");
  if (!(b >= 1.0)) throw ConfigError("check_lln needs b >= 1");
  if (seeds.empty()) throw ConfigError("check_lln needs seeds");
  for (auto n : ns) {
    if (n < 2) throw ConfigError("check_lln needs n >= 2");
  }
  const double log_b = std::log(b);
  std::vector<double> norm(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) norm[i] = invert_G(spec, 1.0 / static_cast<double>(ns[i]));

  LlnReport rep;
  rep.rows.resize(ns.size() * seeds.size());
  parallel_for(rep.rows.size(), [&](std::size_t k) {
    const std::size_t i = k / seeds.size();
    auto& row = rep.rows[k];
    row.n = ns[i];
    row.seed = seeds[k % seeds.size()];
    const double nn = static_cast<double>(row.n);
    const auto N = static_cast<std::int64_t>(std::floor(2.0 * nn * std::log(nn)));
    std::vector<double> terms(static_cast<std::size_t>(N));
    for (std::int64_t x = 1; x <= N; ++x) {
      terms[static_cast<std::size_t>(x - 1)] = sample_site(spec, row.seed, x).log_neg_xi_or(log_b) - log_b;
    }
    row.statistic = pairwise_sum(terms) / norm[i];
  });
  for (std::size_t i = 0; i < ns.size(); ++i) {
    std::vector<double> v;
    for (std::size_t s = 0; s < seeds.size(); ++s) v.push_back(rep.rows[i * seeds.size() + s].statistic);
    rep.median.push_back(median_of(v));
    rep.frac_above_1.push_back(fraction_if(v, [](double x, double c) { return x > c; }, 1.0));
    rep.frac_above_10.push_back(fraction_if(v, [](double x, double c) { return x > c; }, 10.0));
  }
  return rep;
}

double estimate_rho(const PotentialSpec& spec, double eta, double theta_prime,
                    std::int64_t rho_samples, std::uint64_t rho_seed) {
  require_heavy_lower_tail(spec, "estimate_rho");
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("eta must lie in (0, 1)");
  if (rho_samples < 1) throw ConfigError("rho needs at least one sample");
  const auto inv_hat = make_inverse_g_hat(spec, eta, theta_prime);
  std::vector<double> vals(static_cast<std::size_t>(rho_samples));
  // Y_a with a = e^{x0}
  parallel_for(vals.size(), [&](std::size_t i) {
    const double y = std::max(sample_site(spec, rho_seed, static_cast<std::int64_t>(i)).log_neg_xi_or_one(),
                              inv_hat.x0);
    vals[i] = inv_hat(y);
  });
  return 2.0 * pairwise_sum(vals) / static_cast<double>(rho_samples);
}

double invert_g_tilde(const PotentialSpec& spec, double eta, double y, double theta_prime) {
  if (!(y > 0.0)) throw ConfigError("invert_g_tilde needs y > 0");
  if (const auto* p = std::get_if<ParetoLog>(&spec.lower)) return std::pow(y, -1.0 / (eta * p->zeta));
  // G~ decreases; bracket in log ell, then bisect
  double lo = 1.0, hi = 1.0;
  while (g_tilde(spec, eta, lo, theta_prime) < y) {
    lo *= 0.5;
    if (lo < 1e-300) throw ConfigError("invert_g_tilde: y above the range");
  }
  while (g_tilde(spec, eta, hi, theta_prime) > y) {
    hi *= 2.0;
    if (hi > 1e300) throw NumericalError("invert_g_tilde: y below the range");
  }
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-13; ++it) {
    const double mid = std::sqrt(lo * hi);
    (g_tilde(spec, eta, mid, theta_prime) > y ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

LastReport check_last(const PotentialSpec& spec, double eta, const std::vector<std::int64_t>& ns,
                      const std::vector<std::uint64_t>& seeds, double theta_prime,
                      std::int64_t rho_samples) {
  require_heavy_lower_tail(spec, "check_last");
  if (seeds.empty()) throw ConfigError("check_last needs seeds");
  for (auto n : ns) {
    if (n < 1) throw ConfigError("check_last needs n >= 1");
  }
  LastReport rep;
  rep.rho = estimate_rho(spec, eta, theta_prime, rho_samples);
  std::vector<double> norm(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    norm[i] = invert_g_tilde(spec, eta, rep.rho / static_cast<double>(ns[i]), theta_prime);
  }
  rep.rows.resize(ns.size() * seeds.size());
  parallel_for(rep.rows.size(), [&](std::size_t k) {
    const std::size_t i = k / seeds.size();
    auto& row = rep.rows[k];
    row.n = ns[i];
    row.seed = seeds[k % seeds.size()];
    std::vector<double> terms(static_cast<std::size_t>(row.n));
    for (std::int64_t x = 1; x <= row.n; ++x) {
      terms[static_cast<std::size_t>(x - 1)] = sample_site(spec, row.seed, x).log_neg_xi_or_one();
    }
    row.statistic = pairwise_sum(terms) / norm[i];
  });
  for (std::size_t i = 0; i < ns.size(); ++i) {
    std::vector<double> v;
    for (std::size_t s = 0; s < seeds.size(); ++s) v.push_back(rep.rows[i * seeds.size() + s].statistic);
    rep.median.push_back(median_of(v));
    rep.frac_below.push_back(fraction_if(v, [](double x, double c) { return x <= c; }, 1.2));
  }
  return rep;
}

std::vector<MicroboxRow> check_microbox(const PotentialSpec& spec, const ShapeFunction& psi,
                                        const std::vector<double>& ts,
                                        const std::vector<std::uint64_t>& seeds,
                                        const MicroboxOptions& opt) {
  spec.validate();
  psi.validate();
  if (seeds.empty()) throw ConfigError("check_microbox needs seeds");
  if (!(opt.eps > 0.0)) throw ConfigError("check_microbox needs eps > 0");
  const auto params = make_scale_params(spec);
  if (!std::isfinite(params.A)) throw ConfigError("check_microbox needs mix_q < 1");
  const double L = legendre_L(psi, params.gamma, params.A);
  if (!(L < 1.0)) {
    throw ConfigError("check_microbox needs L(psi) < 1, got " + std::to_string(L));
  }
  if (!(opt.eta > L && opt.eta < 1.0)) {
    throw ConfigError("check_microbox needs eta in (L(psi), 1) = (" + std::to_string(L) + ", 1)");
  }
  const double rho = opt.rho > 0.0 ? opt.rho : estimate_rho(spec, opt.eta, opt.theta_prime);
  const auto gammas = gamma_box_curve(spec, params, opt.eta, rho, ts, opt.theta_prime);
  const auto supp = psi.support_cells();

  std::vector<MicroboxRow> out(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    auto& row = out[i];
    row.t = ts[i];
    row.alpha_bt = alpha(params, b_scale(spec, params, row.t));
    row.gamma_t = static_cast<std::int64_t>(std::min(std::floor(gammas[i]), 9e18));
    const double a = row.alpha_bt;
    // lattice offsets z with z / alpha in the support, and their thresholds
    std::vector<std::int64_t> zs;
    std::vector<double> thresh;
    const auto zmax = static_cast<std::int64_t>(std::floor(psi.R * a));
    for (std::int64_t z = -zmax; z <= zmax; ++z) {
      const double x = static_cast<double>(z) / a;
      const double pos = (x + psi.R) / psi.h();
      const auto cell = std::min(static_cast<std::size_t>(std::max(pos, 0.0)), supp.size() - 1);
      if (!supp[cell]) continue;
      zs.push_back(z);
      thresh.push_back((psi.value_at(x) - opt.eps) / (a * a));
    }
    row.box_sites = static_cast<std::int64_t>(zs.size());
    const std::int64_t reach = std::min(row.gamma_t, opt.scan_cap);
    row.centers.assign(seeds.size(), std::numeric_limits<std::int64_t>::min());
    parallel_for(seeds.size(), [&](std::size_t s) {
      const std::uint64_t seed = seeds[s];
      auto ok = [&](std::int64_t y) {
        for (std::size_t k = 0; k < zs.size(); ++k) {
          if (sample_site(spec, seed, y + zs[k]).xi() < thresh[k]) return false;
        }
        return true;
      };
      // nearest centre first: 0, 1, -1, 2, -2, ...
      for (std::int64_t d = 0; d <= reach; ++d) {
        if (ok(d)) {
          row.centers[s] = d;
          return;
        }
        if (d > 0 && ok(-d)) {
          row.centers[s] = -d;
          return;
        }
      }
    });
    std::size_t hits = 0;
    for (auto c : row.centers) hits += c != std::numeric_limits<std::int64_t>::min();
    row.frequency = static_cast<double>(hits) / static_cast<double>(seeds.size());
  }
  return out;
}

}  // namespace pam1d
