#include "pam1d/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pam1d/errors.hpp"
#include "pam1d/experiments.hpp"
#include "pam1d/io.hpp"
#include "pam1d/lattice.hpp"
#include "pam1d/montecarlo.hpp"
#include "pam1d/potential.hpp"
#include "pam1d/scales.hpp"
#include "pam1d/variational.hpp"

namespace pam1d {

namespace {

using ojson = nlohmann::ordered_json;

struct Options {
  // global
  std::string spec_path;
  std::uint64_t seed = 1;
  std::string out;
  std::string format;
  bool deterministic = false;

  std::string seeds;
  std::string t_grid;
  std::string ell;
  std::string y_grid = "0.5,1,2";
  std::string n_grid = "100,1000,10000";
  std::string psi_path;

  std::int64_t lo = -10, hi = 10;
  std::int64_t center = 0;
  std::int64_t radius = 10;
  std::int64_t micro = 5;
  std::optional<std::int64_t> box;
  std::int64_t field_radius = 0;
  std::int64_t R0 = 8;
  std::int64_t R_cap = 10000;
  std::int64_t scan_cap = 50000000;
  double samples = 1e5;
  double rho_samples = 1e6;
  std::uint64_t walk_seed = 0;

  double t = 0.0;
  double rtol = 1e-8;
  double kappa = 1.0;
  double eta = 0.5;
  double theta_prime = 0.5;
  double rho = 0.0;
  double b = 1.0;
  double eps = 0.1;
  std::optional<double> gamma, A;
  double support = 0.1;
  double depth = 1.0;
  std::size_t cells = 8;
  std::size_t chi_cells = 256;
  double R_max = 64.0;
  int restarts = 8;
  bool brute = false;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t") - a + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_real(const std::string& s, const std::string& flag) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw ConfigError(flag + ": '" + s + "' is not a number");
  return v;
}

std::int64_t parse_count(const std::string& s, const std::string& flag) {
  const double v = parse_real(s, flag);
  if (!(v >= 0.0 && v < 9e18) || std::floor(v) != v) {
    throw ConfigError(flag + ": '" + s + "' is not a nonnegative integer");
  }
  return static_cast<std::int64_t>(v);
}

/// Comma list, or lo:hi:geometric:count.
std::vector<double> parse_reals(const std::string& text, const std::string& flag) {
  if (text.empty()) throw ConfigError(flag + " is required");
  if (text.find(':') != std::string::npos) return parse_t_grid(text);
  std::vector<double> out;
  for (const auto& s : split(text, ',')) out.push_back(parse_real(s, flag));
  return out;
}

std::vector<std::int64_t> parse_counts(const std::string& text, const std::string& flag) {
  std::vector<std::int64_t> out;
  for (const auto& s : split(text, ',')) out.push_back(parse_count(s, flag));
  if (out.empty()) throw ConfigError(flag + " is empty");
  return out;
}

/// "a:b" (inclusive) or a comma list; the global seed when empty.
std::vector<std::uint64_t> parse_seeds(const Options& o) {
  std::vector<std::uint64_t> out;
  if (o.seeds.empty()) return {o.seed};
  const auto parts = split(o.seeds, ':');
  if (parts.size() == 2) {
    const auto a = parse_count(parts[0], "--seeds"), b = parse_count(parts[1], "--seeds");
    if (b < a) throw ConfigError("--seeds: empty range '" + o.seeds + "'");
    for (auto s = a; s <= b; ++s) out.push_back(static_cast<std::uint64_t>(s));
    return out;
  }
  if (parts.size() != 1) throw ConfigError("--seeds: expected a:b or a comma list");
  for (const auto& s : split(o.seeds, ',')) {
    out.push_back(static_cast<std::uint64_t>(parse_count(s, "--seeds")));
  }
  return out;
}

PotentialSpec need_spec(const Options& o, const std::string& cmd) {
  if (o.spec_path.empty()) throw ConfigError("--spec is required for '" + cmd + "'");
  return load_spec(o.spec_path);
}

double need_t(const Options& o) {
  if (!(o.t > 0.0)) throw ConfigError("--t is required and must be positive");
  return o.t;
}

ShapeFunction load_psi(const Options& o) {
  if (o.psi_path.empty()) {
    if (!(o.support > 0.0)) throw ConfigError("--support must be positive");
    if (!(o.depth > 0.0)) throw ConfigError("--depth must be positive");
    if (o.cells < 1) throw ConfigError("--cells must be positive");
    return ShapeFunction{o.support / 2.0, std::vector<double>(o.cells + 1, -o.depth)};
  }
  std::ifstream f(o.psi_path);
  if (!f) throw ConfigError("cannot open --psi file '" + o.psi_path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("--psi: " + std::string(e.what()));
  }
  if (!j.is_object() || !j.contains("R") || !j.contains("values") || j.size() != 2) {
    throw ConfigError("--psi: expected {\"R\": number, \"values\": [numbers]}");
  }
  ShapeFunction psi;
  try {
    psi.R = j.at("R").get<double>();
    psi.values = j.at("values").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("--psi: " + std::string(e.what()));
  }
  psi.validate();
  return psi;
}

/// gamma and A from the flags, or from --spec when the flags are absent.
std::pair<double, double> gamma_and_A(const Options& o, const std::string& cmd) {
  if (o.gamma && o.A) return {*o.gamma, *o.A};
  if (o.spec_path.empty()) throw ConfigError("'" + cmd + "' needs --gamma and --A, or --spec");
  const auto spec = load_spec(o.spec_path);
  return {o.gamma.value_or(spec.gamma), o.A.value_or(canonical_A(spec))};
}

class Emitter {
 public:
  explicit Emitter(const Options& o) : o_(o) {}

  bool json(const std::string& fallback) const {
    const std::string f = o_.format.empty() ? fallback : o_.format;
    return f == "json";
  }

  /// Table as CSV, or as JSON {rows, ...extra}.
  void table(const Table& t, const ojson& extra = ojson::object()) const {
    if (!json("csv")) {
      write_output(o_.out, to_csv(t));
      return;
    }
    if (extra.empty()) {
      write_output(o_.out, dump_json(to_json(t)));
      return;
    }
    ojson j = ojson::object();
    j["rows"] = to_json(t);
    for (const auto& [k, v] : extra.items()) j[k] = v;
    write_output(o_.out, dump_json(j));
  }

  /// One record: JSON object, or a one-row CSV.
  void record(const Table& t) const {
    if (json("json")) {
      write_output(o_.out, dump_json(to_json(t).at(0)));
    } else {
      write_output(o_.out, to_csv(t));
    }
  }

  void object(const ojson& j, const Table& csv_form) const {
    if (json("json")) {
      write_output(o_.out, dump_json(j));
    } else {
      write_output(o_.out, to_csv(csv_form));
    }
  }

 private:
  const Options& o_;
};

ojson real_json(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

void run_field(const Options& o, const Emitter& out) {
  const auto spec = need_spec(o, "field");
  if (o.hi < o.lo) throw ConfigError("--hi must be at least --lo");
  const Field f = sample_field(spec, o.lo, o.hi, o.seed);
  Table t{{"x", "representation", "value", "xi", "log_neg_xi_or_one"}, {}};
  for (std::int64_t x = o.lo; x <= o.hi; ++x) {
    const auto& s = f.at(x);
    t.add({x, std::string(s.heavy ? "W" : "xi"), s.value, s.xi(), s.log_neg_xi_or_one()});
  }
  out.table(t);
}

void run_h(const Options& o, const Emitter& out) {
  const auto spec = need_spec(o, "h");
  Table t{{"ell", "H"}, {}};
  for (double l : parse_reals(o.ell, "--ell")) t.add({l, cumulant_H(spec, l)});
  out.table(t);
}

void run_g(const Options& o, const Emitter& out, bool with_tilde) {
  const auto spec = need_spec(o, "g");
  Table t{{"ell", "G"}, {}};
  if (with_tilde) t.columns.push_back("g_tilde");
  for (double l : parse_reals(o.ell, "--ell")) {
    std::vector<Cell> row{l, cumulant_G(spec, l)};
    if (with_tilde) row.push_back(g_tilde(spec, o.eta, l, o.theta_prime));
    t.add(std::move(row));
  }
  out.table(t);
}

void run_scales(const Options& o, const Emitter& out) {
  const auto spec = need_spec(o, "scales");
  const auto params = make_scale_params(spec);
  const auto ts = o.t_grid.empty() ? g_level_grid(spec, 1, 16) : parse_t_grid(o.t_grid);
  std::vector<double> gammas(ts.size(), std::nan(""));
  if (!spec.finite_log_moment()) {
    const double rho = o.rho > 0.0 ? o.rho : estimate_rho(spec, o.eta, o.theta_prime);
    gammas = gamma_box_curve(spec, params, o.eta, rho, ts, o.theta_prime);
  }
  Table t{{"t", "G", "alpha_bt_sq", "b_t", "b_star", "r_t", "gamma_t"}, {}};
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double bt = b_scale(spec, params, ts[i]);
    const double a = alpha(params, bt);
    t.add({ts[i], cumulant_G(spec, ts[i]), a * a, bt, b_star(params, ts[i]),
           static_cast<std::int64_t>(r_box(spec, params, ts[i])), gammas[i]});
  }
  out.table(t);
}

void run_eigen(const Options& o, const Emitter& out) {
  const auto spec = need_spec(o, "eigen");
  if (o.radius < 0) throw ConfigError("--radius must be nonnegative");
  const Field f = sample_field(spec, o.center - o.radius, o.center + o.radius, o.seed);
  const auto op = hamiltonian(f, o.center, o.radius, o.kappa);
  const auto sd = principal_eigpair(op);
  Table vec{{"x", "e", "log_e"}, {}};
  ojson e = ojson::array();
  for (std::size_t i = 0; i < sd.principal_vec.size(); ++i) {
    vec.add({o.center - o.radius + static_cast<std::int64_t>(i), sd.principal_vec[i],
             sd.log_principal_vec[i]});
    e.push_back(real_json(sd.principal_vec[i]));
  }
  ojson j = ojson::object();
  j["center"] = o.center;
  j["R"] = o.radius;
  j["lambda"] = real_json(sd.principal);
  j["residual"] = real_json(sd.residual);
  j["clamped_sites"] = op.clamped.size();
  j["e"] = e;
  out.object(j, vec);
}

void run_solve(const Options& o, const Emitter& out) {
  const auto spec = need_spec(o, "solve");
  AdaptiveOptions opt;
  opt.kappa = o.kappa;
  opt.R0 = o.R0;
  opt.R_cap = o.R_cap;
  const auto s = solve_adaptive(spec, o.seed, need_t(o), o.rtol, opt);
  Table t{{"u", "log_u", "R", "lambda", "clamped_sites"}, {}};
  t.add({s.u, s.log_u, s.R, s.lambda, static_cast<std::int64_t>(s.clamped_sites)});
  out.record(t);
}

void run_fk(const Options& o, const Emitter& out) {
  const auto spec = need_spec(o, "fk");
  const double t = need_t(o);
  const auto n = parse_count(format_real(o.samples), "--samples");
  if (n < 2) throw ConfigError("--samples must be at least 2");
  std::int64_t reach = o.box.value_or(o.field_radius);
  if (!o.box && reach <= 0) {
    // ten standard deviations of the walk
    reach = static_cast<std::int64_t>(std::ceil(10.0 * std::sqrt(2.0 * o.kappa * t))) + 10;
  }
  const Field f = sample_field(spec, -reach, reach, o.seed);
  const std::uint64_t walk_seed = o.walk_seed ? o.walk_seed : o.seed ^ 0x6a09e667f3bcc909ULL;
  const auto est = fk_estimate(f, o.kappa, t, static_cast<std::size_t>(n), walk_seed, o.box);
  Table r{{"mean", "stderr", "exit_fraction", "samples", "field_radius"}, {}};
  r.add({est.mean, est.std_error, est.exit_fraction, static_cast<std::int64_t>(est.samples), reach});
  out.record(r);
}

void run_lbound(const Options& o, const Emitter& out) {
  const auto spec = need_spec(o, "lbound");
  const double t = need_t(o);
  if (o.radius < 0 || o.micro < 1) throw ConfigError("--radius >= 0 and --micro >= 1 required");
  const std::int64_t reach = o.radius + o.micro;
  const Field f = sample_field(spec, -reach, reach, o.seed);
  const auto lb = best_screening_bound(f, o.kappa, t, o.radius, o.micro);
  Table r{{"log_lb", "y_star", "split", "lambda"}, {}};
  r.add({lb.log_lb, lb.y, lb.split, lb.lambda});
  out.record(r);
}

void run_legendre(const Options& o, const Emitter& out) {
  const auto [gamma, A] = gamma_and_A(o, "legendre");
  const auto psi = load_psi(o);
  Table r{{"L"}, {}};
  std::vector<Cell> row{legendre_L(psi, gamma, A)};
  if (o.brute) {
    r.columns.push_back("brute_L");
    row.push_back(brute_legendre(psi, gamma, A));
  }
  r.add(std::move(row));
  out.record(r);
}

void run_chi(const Options& o, const Emitter& out) {
  VariationalConfig cfg;
  std::tie(cfg.gamma, cfg.A) = gamma_and_A(o, "chi");
  cfg.kappa = o.kappa;
  cfg.cells = o.chi_cells;
  cfg.R_max = o.R_max;
  cfg.restarts = o.restarts;
  const auto res = chi_tilde(cfg);
  ojson xs = ojson::array(), vs = ojson::array();
  Table grid{{"x", "psi"}, {}};
  for (std::size_t i = 0; i < res.psi.values.size(); ++i) {
    xs.push_back(res.psi.node(i));
    vs.push_back(res.psi.values[i]);
    grid.add({res.psi.node(i), res.psi.values[i]});
  }
  ojson j = ojson::object();
  j["chi_tilde"] = real_json(res.chi_tilde);
  j["R_star"] = res.R_star;
  j["psi_grid"] = {{"x", xs}, {"psi", vs}};
  j["constraint_value"] = real_json(res.constraint_value);
  j["flags"] = {{"stagnated", res.stagnated},
                {"lambda_error", real_json(res.lambda_error)},
                {"local_optima", res.local_optima}};
  out.object(j, grid);
}

void run_rate(const Options& o, const Emitter& out) {
  ExperimentConfig c;
  c.spec = need_spec(o, "rate");
  c.seeds = parse_seeds(o);
  if (o.t_grid.empty()) throw ConfigError("--t-grid is required for 'rate'");
  c.t_grid = parse_t_grid(o.t_grid);
  c.rtol = o.rtol;
  c.kappa = o.kappa;
  c.R_cap = o.R_cap;
  const auto rows = rate_curve(c);
  Table t{{"t", "seed", "R_used", "log_u", "b_t", "alpha_bt_sq", "rho", "b_star", "rho_star",
           "flagged"},
          {}};
  for (const auto& r : rows) {
    t.add({r.t, r.seed, r.R_used, r.log_u, r.b_t, r.alpha_bt_sq, r.rho, r.b_star, r.rho_star,
           r.flagged});
  }
  const auto med = median_rho(rows, c.t_grid);
  ojson summary = ojson::array();
  for (std::size_t i = 0; i < med.size(); ++i) {
    summary.push_back({{"t", c.t_grid[i]}, {"median_rho", real_json(med[i])}});
  }
  out.table(t, {{"summary", summary}});
}

void run_verify_h(const Options& o, const Emitter& out) {
  const auto spec = need_spec(o, "verify-h");
  if (o.t_grid.empty()) throw ConfigError("--t-grid is required for 'verify-h'");
  const auto ts = parse_t_grid(o.t_grid);
  const auto rep = check_assumption_H(spec, ts, parse_reals(o.y_grid, "--y-grid"));
  Table t{{"t", "y", "scaled", "target", "error"}, {}};
  for (const auto& r : rep.rows) t.add({r.t, r.y, r.scaled, r.target, r.error});
  ojson summary = ojson::array();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    summary.push_back({{"t", ts[i]}, {"max_error", real_json(rep.max_error[i])}});
  }
  out.table(t, {{"summary", summary}});
}

Table stat_table(const std::vector<StatRow>& rows) {
  Table t{{"n", "seed", "statistic"}, {}};
  for (const auto& r : rows) t.add({r.n, r.seed, r.statistic});
  return t;
}

void run_verify_lln(const Options& o, const Emitter& out) {
  const auto spec = need_spec(o, "verify-lln");
  const auto ns = parse_counts(o.n_grid, "--n");
  const auto rep = check_lln(spec, o.b, ns, parse_seeds(o));
  ojson summary = ojson::array();
  for (std::size_t i = 0; i < ns.size(); ++i) {
    summary.push_back({{"n", ns[i]},
                       {"median", real_json(rep.median[i])},
                       {"frac_above_1", rep.frac_above_1[i]},
                       {"frac_above_10", rep.frac_above_10[i]}});
  }
  out.table(stat_table(rep.rows), {{"summary", summary}});
}

void run_verify_last(const Options& o, const Emitter& out) {
  const auto spec = need_spec(o, "verify-last");
  const auto ns = parse_counts(o.n_grid, "--n");
  const auto rep = check_last(spec, o.eta, ns, parse_seeds(o), o.theta_prime,
                              parse_count(format_real(o.rho_samples), "--rho-samples"));
  ojson summary = ojson::array();
  for (std::size_t i = 0; i < ns.size(); ++i) {
    summary.push_back({{"n", ns[i]},
                       {"median", real_json(rep.median[i])},
                       {"frac_at_most_1_2", rep.frac_below[i]}});
  }
  out.table(stat_table(rep.rows), {{"rho", rep.rho}, {"summary", summary}});
}

void run_verify_microbox(const Options& o, const Emitter& out) {
  const auto spec = need_spec(o, "verify-microbox");
  if (o.t_grid.empty()) throw ConfigError("--t-grid is required for 'verify-microbox'");
  MicroboxOptions opt;
  opt.eps = o.eps;
  opt.eta = o.eta;
  opt.theta_prime = o.theta_prime;
  opt.rho = o.rho;
  opt.scan_cap = o.scan_cap;
  const auto seeds = parse_seeds(o);
  const auto rows = check_microbox(spec, load_psi(o), parse_t_grid(o.t_grid), seeds, opt);
  Table t{{"t", "alpha_bt", "gamma_t", "box_sites", "frequency"}, {}};
  ojson centers = ojson::array();
  for (const auto& r : rows) {
    t.add({r.t, r.alpha_bt, r.gamma_t, r.box_sites, r.frequency});
    ojson c = ojson::array();
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const bool none = r.centers[s] == std::numeric_limits<std::int64_t>::min();
      c.push_back({{"seed", seeds[s]}, {"center", none ? ojson(nullptr) : ojson(r.centers[s])}});
    }
    centers.push_back({{"t", r.t}, {"centers", c}});
  }
  out.table(t, {{"centers", centers}});
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  Options o;
  CLI::App app{"Parabolic Anderson model on Z with nonpositive potential"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--spec", o.spec_path, "potential spec (JSON file)");
  app.add_option("--seed", o.seed, "master seed of the field");
  app.add_option("--out", o.out, "output file (stdout when absent)");
  app.add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--deterministic", o.deterministic, "suppress the timestamp line on stderr");

  auto sub = [&](const char* name, const char* help) { return app.add_subcommand(name, help); };
  auto seeds = [&](CLI::App* s) { s->add_option("--seeds", o.seeds, "seed range a:b or list"); };

  auto* field = sub("field", "sample the potential on [lo, hi]");
  field->add_option("--lo", o.lo);
  field->add_option("--hi", o.hi);

  auto* h = sub("h", "cumulant generating function H");
  h->add_option("--ell", o.ell, "list or lo:hi:geometric:count")->required();

  auto* g = sub("g", "cumulant G (and G~ with --eta)");
  g->add_option("--ell", o.ell, "list or lo:hi:geometric:count")->required();
  auto* g_eta = g->add_option("--eta", o.eta);
  g->add_option("--theta-prime", o.theta_prime);

  auto* scales = sub("scales", "scale functions along a t grid");
  scales->add_option("--t-grid", o.t_grid, "lo:hi:geometric:count");
  scales->add_option("--eta", o.eta);
  scales->add_option("--theta-prime", o.theta_prime);
  scales->add_option("--rho", o.rho, "rho of gamma_t (estimated when absent)");

  auto* eigen = sub("eigen", "principal Dirichlet eigenpair of a box");
  eigen->add_option("--center", o.center);
  eigen->add_option("--radius", o.radius);
  eigen->add_option("--kappa", o.kappa);

  auto* solve = sub("solve", "u(t, 0) by box exhaustion");
  solve->add_option("--t", o.t)->required();
  solve->add_option("--rtol", o.rtol);
  solve->add_option("--kappa", o.kappa);
  solve->add_option("--R0", o.R0);
  solve->add_option("--R-cap", o.R_cap);

  auto* fk = sub("fk", "Feynman-Kac Monte Carlo estimate of u(t, 0)");
  fk->add_option("--t", o.t)->required();
  fk->add_option("--samples", o.samples);
  fk->add_option("--box", o.box, "Dirichlet box radius");
  fk->add_option("--field-radius", o.field_radius, "sampled interval without --box");
  fk->add_option("--walk-seed", o.walk_seed);
  fk->add_option("--kappa", o.kappa);

  auto* lbound = sub("lbound", "screening-strategy lower bound on log u(t, 0)");
  lbound->add_option("--t", o.t)->required();
  lbound->add_option("--radius", o.radius)->required();
  lbound->add_option("--micro", o.micro, "microbox radius");
  lbound->add_option("--kappa", o.kappa);

  auto add_psi = [&](CLI::App* s) {
    s->add_option("--psi", o.psi_path, "shape JSON {R, values}");
    s->add_option("--support", o.support, "constant shape: support length");
    s->add_option("--depth", o.depth, "constant shape: depth");
    s->add_option("--cells", o.cells, "constant shape: cells");
  };
  auto* legendre = sub("legendre", "Legendre transform L(psi)");
  legendre->add_option("--gamma", o.gamma);
  legendre->add_option("--A", o.A);
  legendre->add_flag("--brute", o.brute, "also evaluate the transform by direct maximization");
  add_psi(legendre);

  auto* chi = sub("chi", "variational rate constant chi~");
  chi->add_option("--gamma", o.gamma);
  chi->add_option("--A", o.A);
  chi->add_option("--kappa", o.kappa);
  chi->add_option("--cells", o.chi_cells);
  chi->add_option("--R-max", o.R_max);
  chi->add_option("--restarts", o.restarts);

  auto* rate = sub("rate", "rate curve alpha(b_t)^2 / t log u(t, 0)");
  seeds(rate);
  rate->add_option("--t-grid", o.t_grid, "lo:hi:geometric:count");
  rate->add_option("--rtol", o.rtol);
  rate->add_option("--kappa", o.kappa);
  rate->add_option("--R-cap", o.R_cap);

  auto* vh = sub("verify-h", "upper-tail collapse of H");
  vh->add_option("--t-grid", o.t_grid, "lo:hi:geometric:count");
  vh->add_option("--y-grid", o.y_grid);

  auto* vlln = sub("verify-lln", "divergence of the truncated log sums");
  seeds(vlln);
  vlln->add_option("--b", o.b);
  vlln->add_option("--n", o.n_grid, "comma list");

  auto* vlast = sub("verify-last", "upper law for sums of log(-xi v 1)");
  seeds(vlast);
  vlast->add_option("--eta", o.eta);
  vlast->add_option("--n", o.n_grid, "comma list");
  vlast->add_option("--theta-prime", o.theta_prime);
  vlast->add_option("--rho-samples", o.rho_samples);

  auto* vmb = sub("verify-microbox", "frequency of shape-fitting microboxes");
  seeds(vmb);
  vmb->add_option("--t-grid", o.t_grid, "lo:hi:geometric:count");
  vmb->add_option("--eps", o.eps);
  vmb->add_option("--eta", o.eta);
  vmb->add_option("--theta-prime", o.theta_prime);
  vmb->add_option("--rho", o.rho);
  vmb->add_option("--scan-cap", o.scan_cap);
  add_psi(vmb);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const Emitter out(o);
  try {
    if (!o.deterministic) std::cerr << "# pam1d " << timestamp() << "\n";
    if (*field) run_field(o, out);
    else if (*h) run_h(o, out);
    else if (*g) run_g(o, out, g_eta->count() > 0);
    else if (*scales) run_scales(o, out);
    else if (*eigen) run_eigen(o, out);
    else if (*solve) run_solve(o, out);
    else if (*fk) run_fk(o, out);
    else if (*lbound) run_lbound(o, out);
    else if (*legendre) run_legendre(o, out);
    else if (*chi) run_chi(o, out);
    else if (*rate) run_rate(o, out);
    else if (*vh) run_verify_h(o, out);
    else if (*vlln) run_verify_lln(o, out);
    else if (*vlast) run_verify_last(o, out);
    else if (*vmb) run_verify_microbox(o, out);
  } catch (const ConfigError& e) {
    std::cerr << "pam1d: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "pam1d: numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "pam1d: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace pam1d
