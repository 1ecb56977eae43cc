#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "pam1d/errors.hpp"
#include "pam1d/lattice.hpp"
#include "pam1d/scales.hpp"
#include "stiff_oracle.hpp"

using namespace pam1d;

namespace {

PotentialSpec spec_of(LowerTailSpec lower, double q = 0.5, double p = 0.5) {
  PotentialSpec s;
  s.upper = AtomAtZero{p};
  s.mix_q = q;
  s.lower = lower;
  return s;
}

Eigen::MatrixXd dense(const TridiagonalOperator& op) {
  const auto n = static_cast<Eigen::Index>(op.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = op.diag[static_cast<std::size_t>(i)];
    if (i + 1 < n) m(i, i + 1) = m(i + 1, i) = op.kappa;
  }
  return m;
}

}  // namespace

TEST_CASE("hamiltonian assembly") {
  const Field zero = Field::constant(-5, 5, 0.0);
  const auto op = hamiltonian(zero, 0, 1, 1.0);
  CHECK(op.diag == std::vector<double>{-2.0, -2.0, -2.0});
  CHECK(op.offdiag() == std::vector<double>{1.0, 1.0});

  std::vector<SiteValue> sites(5, SiteValue::light(-0.5));
  sites[3] = SiteValue::from_w(1000.0);
  const Field f(-2, sites);
  const auto op2 = hamiltonian(f, 0, 2, 0.5);
  CHECK(op2.diag[3] == -kXiMax - 1.0);
  CHECK(op2.clamped == std::vector<std::int64_t>{1});

  std::vector<double> g(5, 0.0);
  g[2] = 1.0;
  CHECK(quadratic_form(op2, g) == doctest::Approx(-0.5 - 1.0));
  CHECK_THROWS_AS(hamiltonian(f, 1, 2, 1.0), ConfigError);
}

TEST_CASE("principal eigenpair: small cases and dense oracle") {
  const auto op = hamiltonian(Field::constant(-1, 1, 0.0), 0, 1, 1.0);
  const auto sd = principal_eigpair(op);
  CHECK(sd.principal == doctest::Approx(-2.0 * (1.0 - std::cos(M_PI / 4))).epsilon(1e-14));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(op));
  CHECK(std::fabs(sd.principal - es.eigenvalues()(2)) < 1e-12);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-20.0, 0.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> xi(2 * (1 + trial % 30) + 1);
    for (double& v : xi) v = u(rng);
    const double kappa = 0.25 + 0.05 * (trial % 10);
    const auto h = hamiltonian_from_xi(xi, kappa);
    const auto s = principal_eigpair(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(dense(h));
    const auto last = oracle.eigenvalues().size() - 1;
    CHECK(std::fabs(s.principal - oracle.eigenvalues()(last)) < 1e-12);
    CHECK(s.principal <= *std::max_element(xi.begin(), xi.end()));
    double norm = 0.0;
    double align = 0.0;
    for (std::size_t i = 0; i < s.n; ++i) {
      CHECK(s.principal_vec[i] > 0.0);
      norm += s.principal_vec[i] * s.principal_vec[i];
      align += s.principal_vec[i] * oracle.eigenvectors()(static_cast<Eigen::Index>(i), last);
    }
    CHECK(std::fabs(norm - 1.0) < 1e-12);
    CHECK(std::fabs(std::fabs(align) - 1.0) < 1e-9);
    CHECK(s.residual <= 1e-8 * (1.0 + std::fabs(s.principal)));

    const double c = -1.75;
    const auto shifted = principal_eigpair(h.shifted(c));
    CHECK(std::fabs(shifted.principal - (s.principal + c)) < 1e-12);
    for (std::size_t i = 0; i < s.n; ++i) {
      CHECK(std::fabs(shifted.principal_vec[i] - s.principal_vec[i]) < 1e-9);
    }
  }
}

TEST_CASE("principal eigenpair: heavy-tailed fields keep positive log entries") {
  const auto spec = spec_of(ParetoLog{1.0});
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Field f = sample_field(spec, -200, 200, seed);
    const auto op = hamiltonian(f, 0, 200, 1.0);
    const auto s = principal_eigpair(op);
    for (double l : s.log_principal_vec) CHECK(std::isfinite(l));
    CHECK(s.residual <= 1e-8 * (1.0 + std::fabs(s.principal)));
    double lambda_max = -1e300;
    for (std::int64_t x = -200; x <= 200; ++x) {
      bool clamped = false;
      lambda_max = std::max(lambda_max, f.at(x).xi_clamped(kXiMax, clamped));
    }
    CHECK(s.principal <= lambda_max);
    CHECK(s.principal >= lambda_max - 2.0);
  }
}

TEST_CASE("principal eigenvalue increases with the potential") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 0.0);
  std::uniform_int_distribution<int> site(0, 20);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> xi(21);
    for (double& v : xi) v = u(rng);
    const double before = principal_eigpair(hamiltonian_from_xi(xi, 1.0)).principal;
    xi[static_cast<std::size_t>(site(rng))] += 0.5;
    const double after = principal_eigpair(hamiltonian_from_xi(xi, 1.0)).principal;
    CHECK(after >= before - 1e-13);
  }
}

TEST_CASE("full spectrum") {
  const auto op = hamiltonian(Field::constant(-1, 1, 0.0), 0, 1, 1.0);
  const auto sd = full_spectrum(op);
  REQUIRE(sd.eigenvalues.size() == 3);
  CHECK(sd.eigenvalues[0] == doctest::Approx(-2.0 - std::sqrt(2.0)).epsilon(1e-14));
  CHECK(sd.eigenvalues[1] == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(sd.eigenvalues[2] == doctest::Approx(-2.0 + std::sqrt(2.0)).epsilon(1e-14));

  const Field f = sample_field(spec_of(BoundedLog{3.0}), -60, 60, 5);
  const auto big = hamiltonian(f, 0, 60, 0.7);
  const auto all = full_spectrum(big);
  const std::size_t n = big.size();
  double trace = 0.0;
  double eig_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    trace += big.diag[i];
    eig_sum += all.eigenvalues[i];
  }
  CHECK(std::fabs(trace - eig_sum) < 1e-8);
  double worst_orth = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d += all.vec(i, a) * all.vec(i, b);
      worst_orth = std::max(worst_orth, std::fabs(d));
    }
  }
  CHECK(worst_orth <= 1e-10);
  // reconstruction V diag(w) V^T = H
  double worst = 0.0;
  const auto h = dense(big);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double v = 0.0;
      for (std::size_t k = 0; k < n; ++k) v += all.vec(i, k) * all.eigenvalues[k] * all.vec(j, k);
      worst = std::max(worst, std::fabs(v - h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    }
  }
  CHECK(worst <= 1e-8);
  CHECK_THROWS_AS(full_spectrum(big, 100), ConfigError);
}

TEST_CASE("solve_box: initial condition and constant potential") {
  const Field f = sample_field(spec_of(ParetoLog{1.0}), -30, 30, 2);
  const auto zero_t = solve_box(f, 0, 30, 1.0, 0.0);
  for (double v : zero_t.u) CHECK(v == 1.0);

  const Field c = Field::constant(-50, 50, -1.0);
  const auto sol = solve_box(c, 0, 50, 1.0, 1.0);
  CHECK(std::fabs(sol.u[50] - std::exp(-1.0)) <= 1e-6);
}

TEST_CASE("solve_box: sandwich, positivity and contraction") {
  const auto spec = spec_of(ParetoLog{0.7}, 0.4);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> tt(0.1, 50.0);
  std::uniform_int_distribution<int> rr(1, 60);
  for (int trial = 0; trial < 200; ++trial) {
    const std::int64_t R = rr(rng);
    const double t = tt(rng);
    const Field f = sample_field(spec, -R, R, 1000 + static_cast<std::uint64_t>(trial));
    const auto sol = solve_box(f, 0, R, 1.0, t);
    const double lu = sol.log_u_center();
    CHECK(lu >= 2.0 * sol.log_e_center + t * sol.lambda - 1e-9);
    CHECK(lu <= std::log(2.0 * static_cast<double>(R) + 1.0) + t * sol.lambda + 1e-9);
    for (std::size_t i = 0; i < sol.u.size(); ++i) {
      CHECK(sol.u[i] >= 0.0);
      CHECK(sol.u[i] <= 1.0);
    }
  }
}

TEST_CASE("solve_box agrees with a stiff integrator") {
  const auto spec = spec_of(ParetoLog{1.0}, 0.3);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> tt(0.05, 5.0);
  std::uniform_real_distribution<double> kk(0.2, 2.0);
  std::uniform_int_distribution<int> rr(1, 20);
  for (int trial = 0; trial < 50; ++trial) {
    const std::int64_t R = rr(rng);
    const double t = tt(rng);
    const double kappa = kk(rng);
    const Field f = sample_field(spec, -R, R, 77 + static_cast<std::uint64_t>(trial));
    const auto op = hamiltonian(f, 0, R, kappa);
    const auto sol = solve_box(op, t);
    const auto ref = stiff_reference(op.diag, op.kappa, t);
    const auto c = static_cast<std::size_t>(R);
    CHECK(sol.u[c] == doctest::Approx(ref[c]).epsilon(1e-6));
  }
}

TEST_CASE("solve_box: trapped origin against high-precision arithmetic") {
  // Seed 3 puts a clamped site at the origin; u(10, 0) is ~e^-53 below the
  // box maximum, far beyond what absolute eigenvector accuracy resolves.
  const auto spec = spec_of(ParetoLog{0.5});
  for (std::int64_t R : {16, 24}) {
    const Field f = sample_field(spec, -R, R, 3);
    const auto op = hamiltonian(f, 0, R, 1.0);
    REQUIRE(!op.clamped.empty());
    const double ref = log_u_center_multiprecision(op.diag, op.kappa, 10.0);
    CHECK(solve_box(op, 10.0).log_u_center() == doctest::Approx(ref).epsilon(1e-13));
  }
}

TEST_CASE("solve_box: large t with the origin far from the best region") {
  // xi = -3 around the origin, a run of zeros near the edge: at t = 500 the
  // local eigenpairs carry weights e^{t (lambda - lambda_1)} far below the
  // double range relative to the principal one.
  std::vector<double> xi(33, -3.0);
  for (int i = 27; i <= 31; ++i) xi[static_cast<std::size_t>(i)] = 0.0;
  const auto op = hamiltonian_from_xi(xi, 1.0);
  for (double t : {50.0, 500.0, 3000.0}) {
    const double ref = log_u_center_multiprecision(op.diag, op.kappa, t);
    CHECK(solve_box(op, t).log_u_center() == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("solve_box: chunked expansion matches the full one") {
  // t small enough that radius 700 and 1000 agree far below 1e-10.
  const Field f = sample_field(spec_of(ParetoLog{1.0}), -1000, 1000, 9);
  const auto small = solve_box(f, 0, 700, 1.0, 20.0);
  const auto large = solve_box(f, 0, 1000, 1.0, 20.0);
  CHECK(large.eigenpairs_used < 2001);
  CHECK(large.log_u_center() == doctest::Approx(small.log_u_center()).epsilon(1e-10));
}

TEST_CASE("solve_adaptive") {
  const auto zero = solve_adaptive(
      [](std::int64_t lo, std::int64_t hi) { return Field::constant(lo, hi, 0.0); }, 3.0, 1e-10);
  CHECK(zero.u == doctest::Approx(1.0).epsilon(1e-9));

  const auto spec = spec_of(ParetoLog{0.5});
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto a = solve_adaptive(spec, seed, 10.0, 1e-9);
    for (std::size_t i = 1; i < a.history.size(); ++i) {
      CHECK(a.history[i].second >= a.history[i - 1].second - 1e-12);
    }
    const Field f = sample_field(spec, -a.R, a.R, seed);
    CHECK(solve_box(f, 0, a.R, 1.0, 10.0).log_u_center() == a.log_u);
  }
  AdaptiveOptions tight;
  tight.R0 = 1;
  tight.R_cap = 2;
  CHECK_THROWS_AS(solve_adaptive(spec, 1, 50.0, 1e-12, tight), NumericalError);
}

TEST_CASE("truncation product") {
  const Field mild = Field::constant(-5, 5, -1.0);
  const auto t0 = truncation_product(mild, 3.0, 5);
  CHECK(t0.left == 0.0);
  CHECK(t0.right == 0.0);

  std::vector<SiteValue> sites(7, SiteValue::light(0.0));
  sites[5] = SiteValue::from_w(10.0);
  const auto one = truncation_product(Field(-3, sites), std::exp(1.0), 3);
  CHECK(one.right == doctest::Approx(-9.0).epsilon(1e-14));
  CHECK(one.left == 0.0);
  CHECK_THROWS_AS(truncation_product(mild, 2.0, 5), ConfigError);

  // Pareto zeta = 1: at R = r(t) the log-product falls below -t.
  const auto spec = spec_of(ParetoLog{1.0});
  const auto params = make_scale_params(spec);
  double prev_fraction = 0.0;
  for (double t : {1e2, 1e3, 1e4}) {
    const auto R = static_cast<std::int64_t>(r_box(spec, params, t));
    int below = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const auto tp = truncation_product(sample_field(spec, -R, R, seed), 3.0, R);
      if (tp.right <= -t && tp.left <= -t) ++below;
    }
    const double fraction = below / 50.0;
    CHECK(fraction >= prev_fraction);
    prev_fraction = fraction;
  }
  CHECK(prev_fraction == 1.0);
}
