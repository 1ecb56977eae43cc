#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "pam1d/errors.hpp"
#include "pam1d/variational.hpp"

using namespace pam1d;

namespace {

constexpr double kPi = 3.14159265358979323846;

ShapeFunction random_psi(std::mt19937_64& rng, std::size_t cells, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  ShapeFunction s;
  s.R = 0.5 + u(rng) / hi;
  s.values.resize(cells + 1);
  for (double& v : s.values) v = -u(rng);
  return s;
}

// kappa |g'|^2 + c^{(1-gamma)/gamma} (int g^{2 gamma})^{1/gamma} for the
// normalized cosine bump of length L; its minimum over L bounds chi~ from
// above (chi~ is the infimum of this functional over all unit g).
double cosine_bound(double gamma, double A, double kappa, double L) {
  const double c = (1.0 / gamma - 1.0) * std::pow(A * gamma, 1.0 / (1.0 - gamma));
  const double beta_int = std::sqrt(kPi) * std::tgamma(gamma + 0.5) / std::tgamma(gamma + 1.0);
  const double J = std::pow(2.0 / L, gamma) * L * beta_int / kPi;
  return kappa * kPi * kPi / (L * L) + std::pow(c, (1.0 - gamma) / gamma) * std::pow(J, 1.0 / gamma);
}

double best_cosine_bound(double gamma, double A, double kappa) {
  double best = std::numeric_limits<double>::infinity();
  for (double L = 0.05; L < 60.0; L *= 1.001) best = std::min(best, cosine_bound(gamma, A, kappa, L));
  return best;
}

}  // namespace

TEST_CASE("functional_H examples") {
  CHECK(functional_H(std::vector<double>(9, 0.0), 1.0, 0.5, 2.0) == 0.0);
  // R = 1 with 8 cells: f > 0 strictly inside [-1/2, 1/2]
  std::vector<double> f(9, 0.0);
  for (int i = 3; i <= 5; ++i) f[i] = 1.0;
  CHECK(functional_H(f, 1.0, 0.0, 3.0) == doctest::Approx(-3.0));
  CHECK(functional_H(std::vector<double>(11, 1.0), 0.5, 0.5, 1.0) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(functional_H({1.0, -1.0}, 1.0, 0.5, 1.0), ConfigError);
}

TEST_CASE("legendre_L examples") {
  ShapeFunction zero{1.0, std::vector<double>(17, 0.0)};
  CHECK(std::isinf(legendre_L(zero, 0.5, 1.0)));
  CHECK(std::isinf(brute_legendre(zero, 0.5, 1.0)));

  // R = 1, 16 cells of width 1/8: negative on the open interval (-1/4, 1/4)
  ShapeFunction quarter{1.0, std::vector<double>(17, 0.0)};
  for (int i = 7; i <= 9; ++i) quarter.values[i] = -1.0;
  CHECK(quarter.support_length() == doctest::Approx(0.5));
  CHECK(legendre_L(quarter, 0.0, 2.0) == doctest::Approx(1.0));
  CHECK(brute_legendre(quarter, 0.0, 2.0) == doctest::Approx(1.0).epsilon(1e-9));

  ShapeFunction unit{0.5, std::vector<double>(9, -1.0)};
  CHECK(legendre_L(unit, 0.5, 1.0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(brute_legendre(unit, 0.5, 1.0) == doctest::Approx(0.25).epsilon(1e-9));

  // zeros inside the support make the integral diverge once gamma >= 1/2
  ShapeFunction tent = ShapeFunction::from_function(1.0, 16, [](double x) { return -(1.0 - x * x); });
  CHECK(std::isinf(legendre_L(tent, 0.5, 1.0)));
  CHECK(std::isfinite(legendre_L(tent, 0.25, 1.0)));
  CHECK_THROWS_AS(legendre_L(ShapeFunction{1.0, {0.0, 1.0}}, 0.5, 1.0), ConfigError);
}

TEST_CASE("legendre_L matches the brute-force transform") {
  std::mt19937_64 rng(11);
  for (double gamma : {0.25, 0.5, 0.75}) {
    int agree = 0;
    for (int k = 0; k < 50; ++k) {
      const auto psi = random_psi(rng, 24, 0.2, 3.0);
      const double closed = legendre_L(psi, gamma, 1.3);
      const double brute = brute_legendre(psi, gamma, 1.3);
      agree += std::fabs(brute / closed - 1.0) < 0.02;
    }
    CHECK(agree == 50);
  }
  for (int k = 0; k < 20; ++k) {
    auto psi = random_psi(rng, 24, 0.2, 3.0);
    for (std::size_t i = 0; i < psi.values.size(); i += 3) psi.values[i] = 0.0;
    CHECK(brute_legendre(psi, 0.0, 0.7) == doctest::Approx(0.7 * psi.support_length()).epsilon(0.02));
  }
}

TEST_CASE("legendre_L decreases as psi deepens") {
  std::mt19937_64 rng(12);
  for (double gamma : {0.25, 0.5, 0.75}) {
    auto psi = random_psi(rng, 16, 0.5, 2.0);
    auto deeper = psi;
    for (double& v : deeper.values) v *= 1.7;
    CHECK(legendre_L(deeper, gamma, 1.0) < legendre_L(psi, gamma, 1.0));
  }
}

TEST_CASE("eig_continuum: closed forms") {
  ShapeFunction flat{0.5, std::vector<double>(65, -1e-6)};
  const auto e = eig_continuum(flat, 1.0);
  CHECK(std::fabs(e.lambda - (-kPi * kPi - 1e-6)) < 1e-4);
  CHECK(e.error < 1e-3);

  // kappa g'' - x^2 g on a wide interval: ground state -sqrt(kappa)
  for (double kappa : {0.5, 1.0, 2.0}) {
    const auto osc = ShapeFunction::from_function(6.0, 1024, [](double x) { return -x * x; });
    CHECK(eig_continuum(osc, kappa).lambda == doctest::Approx(-std::sqrt(kappa)).epsilon(1e-4));
  }

  ShapeFunction zero{1.0, std::vector<double>(9, 0.0)};
  CHECK(eig_continuum(zero, 1.0).lambda == -std::numeric_limits<double>::infinity());
}

TEST_CASE("eig_continuum: scaling, order and kappa monotonicity") {
  auto bump = [](double x) { return -1.0 - std::cos(3.0 * x) * std::cos(3.0 * x); };
  const auto psi = ShapeFunction::from_function(1.0, 128, bump);
  for (double s : {0.5, 2.0, 3.0}) {
    const auto scaled = ShapeFunction::from_function(
        s, 200, [&](double x) { return bump(x / s) / (s * s); });
    CHECK(eig_continuum(scaled, 1.0).lambda ==
          doctest::Approx(eig_continuum(psi, 1.0).lambda / (s * s)).epsilon(1e-4));
  }

  const auto coarse = eig_continuum(psi, 1.0, 1);
  const auto fine = eig_continuum(psi, 1.0, 2);
  CHECK(coarse.lambda_h2 == fine.lambda_h);
  const double order = std::log2((coarse.lambda_h - coarse.lambda_h2) / (fine.lambda_h - fine.lambda_h2));
  CHECK(order >= 1.9);

  std::mt19937_64 rng(13);
  for (int k = 0; k < 20; ++k) {
    const auto r = random_psi(rng, 32, 0.0, 4.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double kappa : {0.25, 0.5, 1.0, 2.0}) {
      const double lam = eig_continuum(r, kappa).lambda;
      CHECK(lam <= prev);
      prev = lam;
    }
  }
}

TEST_CASE("chi_tilde: gamma = 0 reduces to the Dirichlet interval") {
  for (auto [A, kappa] : {std::pair{std::log(2.0), 1.0}, std::pair{1.0, 1.0}, std::pair{1.0, 2.0}}) {
    VariationalConfig cfg;
    cfg.A = A;
    cfg.kappa = kappa;
    const auto r = chi_tilde(cfg);
    CHECK(r.chi_tilde == doctest::Approx(kappa * kPi * kPi * A * A).epsilon(0.01));
    CHECK(r.constraint_value <= 1.0 + 1e-6);
    CHECK(r.psi.support_length() == doctest::Approx(1.0 / A).epsilon(1e-9));
  }
  VariationalConfig a, b;
  a.A = 0.8;
  b.A = 1.6;
  CHECK(chi_tilde(b).chi_tilde / chi_tilde(a).chi_tilde == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("chi_tilde: gamma > 0") {
  for (double gamma : {0.25, 0.5}) {
    VariationalConfig cfg;
    cfg.gamma = gamma;
    const auto r = chi_tilde(cfg);
    CHECK(r.chi_tilde > 0.0);
    CHECK(r.chi_tilde < 1e6);
    CHECK(r.constraint_value <= 1.0 + 1e-6);
    CHECK_FALSE(r.stagnated);
    // cosine trial profile gives an upper bound that is not far off
    const double ub = best_cosine_bound(gamma, cfg.A, cfg.kappa);
    CHECK(r.chi_tilde <= ub * (1.0 + 1e-3));
    CHECK(r.chi_tilde >= 0.9 * ub);

    // x -> s x rescaling: chi~ ~ kappa^{(1-gamma)/(1+gamma)} A^{2/(1+gamma)}
    auto c2 = cfg;
    c2.A = 2.0;
    CHECK(chi_tilde(c2).chi_tilde / r.chi_tilde ==
          doctest::Approx(std::pow(2.0, 2.0 / (1.0 + gamma))).epsilon(0.01));
  }
}

TEST_CASE("chi_tilde is nondecreasing in kappa") {
  for (double gamma : {0.0, 0.5}) {
    double prev = 0.0;
    for (double kappa : {0.5, 1.0, 2.0}) {
      VariationalConfig cfg;
      cfg.gamma = gamma;
      cfg.kappa = kappa;
      const double chi = chi_tilde(cfg).chi_tilde;
      CHECK(chi >= prev);
      if (gamma > 0.0 && prev > 0.0) {
        CHECK(chi / prev == doctest::Approx(std::pow(2.0, (1.0 - gamma) / (1.0 + gamma))).epsilon(0.01));
      }
      prev = chi;
    }
  }
}

TEST_CASE("chi_tilde rejects bad configs") {
  VariationalConfig cfg;
  cfg.gamma = 1.0;
  CHECK_THROWS_AS(chi_tilde(cfg), ConfigError);
  cfg.gamma = 0.5;
  cfg.A = 0.0;
  CHECK_THROWS_AS(chi_tilde(cfg), ConfigError);
}
