#include "pam1d/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <limits>
#include <numbers>
#include <sstream>

#include "pam1d/errors.hpp"
#include "pam1d/quadrature.hpp"
#include "pam1d/rng.hpp"

namespace pam1d {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// exp(x) for x that may exceed the double range; returns +inf instead of UB.
double exp_or_inf(double x) { return x > 709.0 ? kInf : std::exp(x); }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Continuous branch written in an integration coordinate c with exponential
// decay at infinity: log density in c and log W(c) (heavy) or log V(c) (Frechet).
struct Coordinate {
  double lo;
  double hi;
  double hint;
  std::function<double(double)> log_density;
  std::function<double(double)> log_value;
};

// Heavy branch in coordinates; nullopt encodes the point mass W = 0.
std::optional<Coordinate> heavy_coordinate(const LowerTailSpec& lower) {
  return std::visit(
      Overloaded{
          [](const ParetoLog& p) -> std::optional<Coordinate> {
            const double z = p.zeta;
            return Coordinate{0.0, kInf, 1.0,
                              [z](double c) { return std::log(z) - z * c; },
                              [](double c) { return c; }};
          },
          [](const LogLogDensity& l) -> std::optional<Coordinate> {
            const double th = l.theta;
            const double llx0 = std::log(std::log(l.x0));
            const double c0 = llx0;
            return Coordinate{c0, kInf, c0 + 1.0,
                              [th, llx0](double c) { return std::log(th) + th * llx0 - th * c; },
                              [](double c) { return std::exp(c); }};
          },
          [](const BoundedLog& b) -> std::optional<Coordinate> {
            if (b.wmax == 0.0) return std::nullopt;
            const double w = b.wmax;
            return Coordinate{0.0, w, 0.5 * w, [w](double) { return -std::log(w); },
                              [](double c) { return std::log(c); }};
          }},
      lower);
}

// Frechet branch: sigma = log s with s = D V^-a ~ Exp(1).
Coordinate frechet_coordinate(double D, double a) {
  const double logD = std::log(D);
  return Coordinate{-kInf, kInf, 0.0, [](double s) { return s - std::exp(s); },
                    [logD, a](double s) { return (logD - s) / a; }};
}

double log_one_minus_exp_neg(double x) {
  // log(1 - e^-x) for x >= 0
  if (x <= 0.0) return -kInf;
  return std::log(-std::expm1(-x));
}

// log E[exp(-l |xi|)] on the heavy branch.
double heavy_log_laplace(const LowerTailSpec& lower, double ell) {
  const auto coord = heavy_coordinate(lower);
  if (!coord) return -ell;  // W = 0, xi = -1
  if (ell == 0.0) return 0.0;
  const double log_ell = std::log(ell);
  const auto& c = *coord;
  auto g = [&](double x) {
    const double w = exp_or_inf(c.log_value(x));
    return c.log_density(x) - exp_or_inf(log_ell + w);
  };
  return quad::log_integrate_exp(g, c.lo, c.hi, std::min(c.hint, c.lo + 1.0 / ell));
}

// log E[1 - exp(-W/l)] on the heavy branch.
double heavy_log_deficit(const LowerTailSpec& lower, double ell) {
  const auto coord = heavy_coordinate(lower);
  if (!coord) return -kInf;
  const double log_ell = std::log(ell);
  const auto& c = *coord;
  auto g = [&](double x) {
    return c.log_density(x) + log_one_minus_exp_neg(exp_or_inf(c.log_value(x) - log_ell));
  };
  return quad::log_integrate_exp(g, c.lo, c.hi, c.hint);
}

double upper_log_laplace(const PotentialSpec& spec, double ell) {
  return std::visit(
      Overloaded{[&](const AtomAtZero& a) {
                   if (a.p == 1.0) return 0.0;
                   return quad::log_add_exp(std::log(a.p), std::log1p(-a.p) - ell);
                 },
                 [&](const Frechet& f) {
                   if (ell == 0.0) return 0.0;
                   const auto c = frechet_coordinate(f.D, spec.frechet_shape());
                   const double log_ell = std::log(ell);
                   auto g = [&](double s) {
                     return c.log_density(s) - exp_or_inf(log_ell + c.log_value(s));
                   };
                   return quad::log_integrate_exp(g, c.lo, c.hi, c.hint);
                 }},
      spec.upper);
}

// log E[1 - (V v 1)^(-1/l)] on the upper branch.
double upper_log_deficit(const PotentialSpec& spec, double ell) {
  return std::visit(Overloaded{[](const AtomAtZero&) { return -kInf; },
                               [&](const Frechet& f) {
                                 const auto c = frechet_coordinate(f.D, spec.frechet_shape());
                                 auto g = [&](double s) {
                                   const double log_v = c.log_value(s);
                                   return c.log_density(s) + log_one_minus_exp_neg(log_v / ell);
                                 };
                                 const double top = std::log(f.D);
                                 return quad::log_integrate_exp(g, -kInf, top, top - 1.0);
                               }},
                    spec.upper);
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

void PotentialSpec::validate() const {
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0,1)");
  require(mix_q > 0.0 && mix_q <= 1.0, "mix_q must lie in (0,1]");
  std::visit(Overloaded{[&](const AtomAtZero& a) {
                          require(gamma == 0.0, "atom_p upper tail requires gamma = 0");
                          require(a.p > 0.0 && a.p <= 1.0, "atom_p must lie in (0,1]");
                        },
                        [&](const Frechet& f) {
                          require(gamma > 0.0, "frechet_D upper tail requires gamma in (0,1)");
                          require(f.D > 0.0 && std::isfinite(f.D), "frechet_D must be positive");
                        }},
             upper);
  std::visit(Overloaded{[](const ParetoLog& p) {
                          require(p.zeta > 0.0 && p.zeta <= 1.0, "pareto_zeta must lie in (0,1]");
                        },
                        [](const LogLogDensity& l) {
                          require(l.theta > 0.0, "loglog_theta must be positive");
                          require(l.x0 >= std::numbers::e, "loglog_x0 must be at least e");
                        },
                        [](const BoundedLog& b) {
                          require(b.wmax >= 0.0 && std::isfinite(b.wmax),
                                  "bounded_wmax must be non-negative");
                        }},
             lower);
}

PotentialSpec spec_from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& m) { throw ConfigError("potential spec: " + m); };
  if (!j.is_object()) fail("expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "gamma" && key != "upper" && key != "mix_q" && key != "lower") {
      fail("unknown field '" + key + "'");
    }
  }
  for (const char* key : {"gamma", "upper", "mix_q", "lower"}) {
    if (!j.contains(key)) fail(std::string("missing field '") + key + "'");
  }
  auto number = [&](const nlohmann::json& obj, const char* key) {
    if (!obj.contains(key) || !obj.at(key).is_number()) {
      fail(std::string("field '") + key + "' must be a number");
    }
    return obj.at(key).get<double>();
  };
  auto only = [&](const nlohmann::json& obj, std::initializer_list<const char*> keys,
                  const char* where) {
    for (const auto& [key, _] : obj.items()) {
      if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return key == k; }) ==
          keys.end()) {
        fail(std::string("unknown field '") + key + "' in " + where);
      }
    }
  };

  PotentialSpec spec;
  spec.gamma = number(j, "gamma");
  spec.mix_q = number(j, "mix_q");

  const auto& up = j.at("upper");
  if (!up.is_object() || up.size() != 1) fail("'upper' must hold exactly one of atom_p, frechet_D");
  if (up.contains("atom_p")) {
    spec.upper = AtomAtZero{number(up, "atom_p")};
  } else if (up.contains("frechet_D")) {
    spec.upper = Frechet{number(up, "frechet_D")};
  } else {
    only(up, {"atom_p", "frechet_D"}, "upper");
  }

  const auto& lo = j.at("lower");
  if (!lo.is_object()) fail("'lower' must be an object");
  if (lo.contains("pareto_zeta")) {
    only(lo, {"pareto_zeta"}, "lower");
    spec.lower = ParetoLog{number(lo, "pareto_zeta")};
  } else if (lo.contains("loglog_theta")) {
    only(lo, {"loglog_theta", "loglog_x0"}, "lower");
    const double x0 = lo.contains("loglog_x0") ? number(lo, "loglog_x0") : std::numbers::e;
    spec.lower = LogLogDensity{number(lo, "loglog_theta"), x0};
  } else if (lo.contains("bounded_wmax")) {
    only(lo, {"bounded_wmax"}, "lower");
    spec.lower = BoundedLog{number(lo, "bounded_wmax")};
  } else {
    only(lo, {"pareto_zeta", "loglog_theta", "bounded_wmax"}, "lower");
    fail("'lower' must hold one of pareto_zeta, loglog_theta, bounded_wmax");
  }
  spec.validate();
  return spec;
}

nlohmann::json spec_to_json(const PotentialSpec& spec) {
  nlohmann::json j;
  j["gamma"] = spec.gamma;
  j["mix_q"] = spec.mix_q;
  j["upper"] = std::visit(Overloaded{[](const AtomAtZero& a) { return nlohmann::json{{"atom_p", a.p}}; },
                                     [](const Frechet& f) { return nlohmann::json{{"frechet_D", f.D}}; }},
                          spec.upper);
  j["lower"] = std::visit(
      Overloaded{[](const ParetoLog& p) { return nlohmann::json{{"pareto_zeta", p.zeta}}; },
                 [](const LogLogDensity& l) {
                   return nlohmann::json{{"loglog_theta", l.theta}, {"loglog_x0", l.x0}};
                 },
                 [](const BoundedLog& b) { return nlohmann::json{{"bounded_wmax", b.wmax}}; }},
      spec.lower);
  return j;
}

PotentialSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spec file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("spec file '" + path + "': " + e.what());
  }
  return spec_from_json(j);
}

double SiteValue::xi() const { return heavy ? -exp_or_inf(value) : value; }

double SiteValue::log_neg_xi_or_one() const {
  if (heavy) return std::max(value, 0.0);
  return value < -1.0 ? std::log(-value) : 0.0;
}

double SiteValue::log_neg_xi_or(double log_b) const {
  if (heavy) return std::max(value, log_b);
  return -value > std::exp(log_b) ? std::log(-value) : log_b;
}

double SiteValue::xi_clamped(double cap, bool& clamped) const {
  if (heavy) {
    if (value > std::log(cap)) {
      clamped = true;
      return -cap;
    }
    return -std::exp(value);
  }
  if (value < -cap) {
    clamped = true;
    return -cap;
  }
  return value;
}

SiteValue sample_site(const PotentialSpec& spec, std::uint64_t seed, std::int64_t x) {
  const CounterRng rng(seed);
  if (rng.uniform(x, 0) < spec.mix_q) {
    const double u = rng.uniform(x, 2);
    const double w = std::visit(
        Overloaded{[&](const ParetoLog& p) { return std::pow(u, -1.0 / p.zeta); },
                   [&](const LogLogDensity& l) {
                     const double log_w = std::log(l.x0) * std::pow(u, -1.0 / l.theta);
                     return log_w > std::log(kMaxHeavyW) ? kMaxHeavyW : std::exp(log_w);
                   },
                   [&](const BoundedLog& b) { return b.wmax * u; }},
        spec.lower);
    return SiteValue::from_w(w);
  }
  const double u = rng.uniform(x, 1);
  return std::visit(Overloaded{[&](const AtomAtZero& a) {
                                 return SiteValue::light(u < a.p ? 0.0 : -1.0);
                               },
                               [&](const Frechet& f) {
                                 const double v =
                                     std::pow(f.D / -std::log(u), 1.0 / spec.frechet_shape());
                                 return SiteValue::light(-v);
                               }},
                    spec.upper);
}

const SiteValue& Field::at(std::int64_t x) const {
  if (x < lo() || x > hi()) {
    throw ConfigError("site " + std::to_string(x) + " outside sampled field [" +
                      std::to_string(lo()) + ", " + std::to_string(hi()) + "]");
  }
  return sites_[static_cast<std::size_t>(x - lo_)];
}

Field Field::constant(std::int64_t lo, std::int64_t hi, double xi) {
  return Field(lo, std::vector<SiteValue>(static_cast<std::size_t>(hi - lo + 1), SiteValue::light(xi)));
}

Field sample_field(const PotentialSpec& spec, std::int64_t lo, std::int64_t hi,
                   std::uint64_t seed) {
  spec.validate();
  if (lo > hi) throw ConfigError("sample_field: lo must not exceed hi");
  std::vector<SiteValue> sites;
  sites.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (std::int64_t x = lo; x <= hi; ++x) sites.push_back(sample_site(spec, seed, x));
  return Field(lo, std::move(sites));
}

double cumulant_H(const PotentialSpec& spec, double ell) {
  if (!(ell >= 0.0)) throw ConfigError("cumulant_H: ell must be non-negative");
  if (ell == 0.0) return 0.0;
  const double q = spec.mix_q;
  const double heavy = std::log(q) + heavy_log_laplace(spec.lower, ell);
  if (q == 1.0) return std::min(heavy, 0.0);
  const double upper = std::log1p(-q) + upper_log_laplace(spec, ell);
  return std::min(quad::log_add_exp(upper, heavy), 0.0);
}

double cumulant_G(const PotentialSpec& spec, double ell) {
  if (!(ell > 0.0)) throw ConfigError("cumulant_G: ell must be positive");
  const double q = spec.mix_q;
  double deficit = q * std::exp(heavy_log_deficit(spec.lower, ell));
  if (q < 1.0) deficit += (1.0 - q) * std::exp(upper_log_deficit(spec, ell));
  return -std::log1p(-deficit);
}

double g_tilde(const PotentialSpec& spec, double eta, double ell, double theta_prime) {
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("g_tilde: eta must lie in (0,1)");
  if (!(ell > 0.0)) throw ConfigError("g_tilde: ell must be positive");
  return std::visit(
      Overloaded{[&](const ParetoLog& p) { return std::pow(ell, -eta * p.zeta); },
                 [&](const LogLogDensity&) {
                   const double guarded = std::max(ell, std::exp(std::numbers::e));
                   return cumulant_G(spec, ell) *
                          std::pow(std::log(std::log(guarded)), 1.0 + theta_prime);
                 },
                 [](const BoundedLog&) -> double {
                   throw ConfigError(
                       "g_tilde: bounded lower tail has finite logarithmic moments; "
                       "the regularized cumulant is not defined");
                 }},
      spec.lower);
}

double g_tilde_concavity_threshold(const PotentialSpec& spec, double eta, double theta_prime) {
  if (std::holds_alternative<ParetoLog>(spec.lower)) return 1.0;
  // Scan a geometric grid for the last violation of monotonicity or concavity.
  std::vector<double> xs;
  for (double x = std::exp(std::numbers::e); x <= 1e10; x *= 1.5) xs.push_back(x);
  std::vector<double> inv(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) inv[i] = 1.0 / g_tilde(spec, eta, xs[i], theta_prime);
  double threshold = xs.front();
  for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
    const double left = (inv[i] - inv[i - 1]) / (xs[i] - xs[i - 1]);
    const double right = (inv[i + 1] - inv[i]) / (xs[i + 1] - xs[i]);
    if (left <= 0.0 || right > left) threshold = xs[i + 1];
  }
  return threshold;
}

double log_moment(const PotentialSpec& spec, double delta) {
  if (!(delta > 0.0)) throw ConfigError("log_moment: delta must be positive");
  const double q = spec.mix_q;
  double heavy = 0.0;
  if (const auto* p = std::get_if<ParetoLog>(&spec.lower); p && delta >= p->zeta) return kInf;
  if (std::holds_alternative<LogLogDensity>(spec.lower)) return kInf;
  if (const auto coord = heavy_coordinate(spec.lower)) {
    const auto& c = *coord;
    auto g = [&](double x) { return c.log_density(x) + delta * c.log_value(x); };
    heavy = std::exp(quad::log_integrate_exp(g, c.lo, c.hi, c.hint));
  }
  double upper = 0.0;
  if (const auto* f = std::get_if<Frechet>(&spec.upper); f && q < 1.0) {
    const auto c = frechet_coordinate(f->D, spec.frechet_shape());
    auto g = [&](double s) {
      const double log_v = c.log_value(s);
      return log_v > 0.0 ? c.log_density(s) + delta * std::log(log_v) : -kInf;
    };
    const double top = std::log(f->D);
    upper = std::exp(quad::log_integrate_exp(g, -kInf, top, top - 1.0));
  }
  return q * heavy + (1.0 - q) * upper;
}

double canonical_A(const PotentialSpec& spec) {
  if (spec.mix_q == 1.0) {
    throw ConfigError("canonical_A: mix_q = 1 leaves no mass near 0; the upper-tail scaling is undefined");
  }
  return std::visit(Overloaded{[&](const AtomAtZero& a) {
                                 return -std::log((1.0 - spec.mix_q) * a.p);
                               },
                               [&](const Frechet& f) {
                                 const double a = spec.frechet_shape();
                                 const double g = spec.gamma;
                                 return (1.0 + a) * std::pow(a, -g) * std::pow(f.D, 1.0 - g);
                               }},
                    spec.upper);
}

}  // namespace pam1d
