#pragma once

// Distribution families for the i.i.d. non-positive potential, reproducible
// field sampling and the cumulant functions that drive the scale theory.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace pam1d {

// Lower tail of xi(0), described through W = log(-xi(0)) on the heavy branch.

/// P(W > x) = x^-zeta for x >= 1.
struct ParetoLog {
  double zeta;
};
/// Density of W proportional to 1/(x log^(1+theta) x) on [x0, inf).
struct LogLogDensity {
  double theta;
  double x0;
};
/// W uniform on [0, wmax]; every logarithmic moment is finite.
struct BoundedLog {
  double wmax;
};
using LowerTailSpec = std::variant<ParetoLog, LogLogDensity, BoundedLog>;

// Upper tail, near the essential supremum 0.

/// xi = 0 with probability p, xi = -1 otherwise. Only for gamma = 0.
struct AtomAtZero {
  double p;
};
/// xi = -V with P(V <= x) = exp(-D x^-a), a = gamma/(1-gamma).
struct Frechet {
  double D;
};
using UpperTailSpec = std::variant<AtomAtZero, Frechet>;

struct PotentialSpec {
  double gamma = 0.0;
  UpperTailSpec upper = AtomAtZero{0.5};
  /// Weight of the heavy lower-tail branch.
  double mix_q = 0.5;
  LowerTailSpec lower = ParetoLog{1.0};

  /// Throws ConfigError on out-of-range parameters.
  void validate() const;
  /// Shape a = gamma/(1-gamma) of the Frechet branch.
  double frechet_shape() const { return gamma / (1.0 - gamma); }
  bool finite_log_moment() const { return std::holds_alternative<BoundedLog>(lower); }
};

PotentialSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const PotentialSpec& spec);
PotentialSpec load_spec(const std::string& path);

/// Heavy-branch sites with W above this are capped (W itself overflows
/// beyond ~1e308 for the log-log family).
inline constexpr double kMaxHeavyW = 1e300;

/// One site in dual representation: light sites carry xi itself, heavy sites
/// carry W = log(-xi) so that -e^W never has to be formed.
struct SiteValue {
  bool heavy = false;
  double value = 0.0;

  static SiteValue light(double xi) { return {false, xi}; }
  static SiteValue from_w(double w) { return {true, w}; }

  /// xi itself; -inf when e^W overflows.
  double xi() const;
  /// log(-xi v 1), i.e. the screening weight of the site.
  double log_neg_xi_or_one() const;
  /// log(-xi v b) for b >= 1.
  double log_neg_xi_or(double log_b) const;
  /// xi clamped below at -cap; sets `clamped` when the cap was applied.
  double xi_clamped(double cap, bool& clamped) const;
};

SiteValue sample_site(const PotentialSpec& spec, std::uint64_t seed, std::int64_t x);

/// A realization on the integer interval [lo, hi].
class Field {
 public:
  Field() = default;
  Field(std::int64_t lo, std::vector<SiteValue> sites) : lo_(lo), sites_(std::move(sites)) {}

  std::int64_t lo() const { return lo_; }
  std::int64_t hi() const { return lo_ + static_cast<std::int64_t>(sites_.size()) - 1; }
  std::size_t size() const { return sites_.size(); }
  bool covers(std::int64_t a, std::int64_t b) const { return a >= lo() && b <= hi(); }
  const SiteValue& at(std::int64_t x) const;
  const std::vector<SiteValue>& sites() const { return sites_; }

  /// Field with every site equal to xi (light representation).
  static Field constant(std::int64_t lo, std::int64_t hi, double xi);

 private:
  std::int64_t lo_ = 0;
  std::vector<SiteValue> sites_;
};

/// Samples [lo, hi]. Site x depends only on (seed, x), so enlarging the
/// interval never changes sites already drawn.
Field sample_field(const PotentialSpec& spec, std::int64_t lo, std::int64_t hi,
                   std::uint64_t seed);

/// H(l) = log <exp(l xi(0))>.
double cumulant_H(const PotentialSpec& spec, double ell);
/// G(l) = -log <(-xi(0) v 1)^(-1/l)>.
double cumulant_G(const PotentialSpec& spec, double ell);
/// Regularizing function for the lower tail (ParetoLog: l^(-eta zeta);
/// LogLogDensity: G(l) [log log (l v e^e)]^(1+theta')).
double g_tilde(const PotentialSpec& spec, double eta, double ell, double theta_prime = 0.5);
/// <(log(-xi(0) v 1))^delta>, +inf when the integral diverges.
double log_moment(const PotentialSpec& spec, double delta);
/// The constant A of the upper-tail scaling under alpha_t = t^nu.
double canonical_A(const PotentialSpec& spec);

/// Threshold beyond which 1/g_tilde is increasing and concave.
double g_tilde_concavity_threshold(const PotentialSpec& spec, double eta, double theta_prime);

}  // namespace pam1d
