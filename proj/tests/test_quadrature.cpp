#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "apcauchy/quadrature.hpp"

using namespace apcauchy;

namespace {
// Independent oracle values, frozen.
constexpr double kGamma03 = 2.9915689876875906;   // Gamma(0.3)
constexpr double kSqrtPi = 1.7724538509055160273;  // Gamma(0.5)
constexpr double kLowerGammaHalfOne = 1.4936482656248540508;  // sqrt(pi) erf(1)
}  // namespace

TEST_CASE("gauss-legendre integrates polynomials of degree 2n-1 exactly") {
  const QuadRule& r = gauss_legendre(5);
  double s8 = 0.0, s9 = 0.0;
  for (int i = 0; i < r.nodes.size(); ++i) {
    s8 += r.weights(i) * std::pow(r.nodes(i), 8);
    s9 += r.weights(i) * std::pow(r.nodes(i), 9);
  }
  CHECK(s8 == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
  CHECK(s9 == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(r.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("gauss rule on a mapped interval") {
  QuadRule r = gauss_on(1.0, 3.0, 12);
  double s = 0.0;
  for (int i = 0; i < r.nodes.size(); ++i) s += r.weights(i) / r.nodes(i);
  CHECK(s == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("gauss-legendre rejects out-of-range orders") {
  CHECK_THROWS_AS(gauss_legendre(0), std::invalid_argument);
  CHECK_THROWS_AS(gauss_legendre(65), std::invalid_argument);
}

TEST_CASE("product rule integrates moments against the weight exactly") {
  const double beta = 0.5;
  const double h = 1.0;
  QuadRule r = singular_product_quadrature(beta, h, 10);
  for (int j = 0; j <= 9; ++j) {
    double s = 0.0;
    for (int i = 0; i < r.nodes.size(); ++i) s += r.weights(i) * std::pow(r.nodes(i), j);
    // integral_0^1 s^j s^{beta-1} ds = 1 / (beta + j)
    CHECK(s == doctest::Approx(1.0 / (beta + j)).epsilon(1e-11));
  }
}

TEST_CASE("weighted cell rule integrates moments exactly on interior cells") {
  const double beta = 0.3;
  // Wide cell near the singularity (moment-equation branch) and narrow cell
  // far from it (mapped-Gauss branch); both must reproduce the shifted
  // monomial integrals integral_a^b s^{beta-1+j} ds = (b^{beta+j} -
  // a^{beta+j})/(beta+j).
  const std::pair<double, double> cells[] = {{1e-6, 1e-4}, {3.0, 4.0}};
  for (const auto& [a, b] : cells) {
    QuadRule r = weighted_cell_rule(beta, a, b, 10);
    for (int j = 0; j <= 9; ++j) {
      double s = 0.0;
      for (int i = 0; i < r.nodes.size(); ++i) s += r.weights(i) * std::pow(r.nodes(i), j);
      const double exact = (std::pow(b, beta + j) - std::pow(a, beta + j)) / (beta + j);
      CHECK(s == doctest::Approx(exact).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(weighted_cell_rule(0.5, 2.0, 1.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(weighted_cell_rule(0.5, -1.0, 1.0, 8), std::invalid_argument);
}

TEST_CASE("product rule parameter validation") {
  CHECK_THROWS_AS(singular_product_quadrature(0.0, 1.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(singular_product_quadrature(1.2, 1.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(singular_product_quadrature(0.5, -1.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(singular_product_quadrature(0.5, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(singular_product_quadrature(0.5, 1.0, 17), std::invalid_argument);
}

TEST_CASE("gamma identities via the composite singular scheme") {
  // integral_0^inf e^{-s} s^{beta-1} ds = Gamma(beta); T = 40 leaves a tail
  // under 1e-16 relative.
  auto decay = [](double s) { return std::exp(-s); };
  const double g03 = integrate_singular(decay, 0.3, 40.0);
  const double g05 = integrate_singular(decay, 0.5, 40.0);
  const double g10 = integrate_singular(decay, 1.0, 40.0);
  CHECK(std::abs(g03 - kGamma03) / kGamma03 < 1e-6);
  CHECK(std::abs(g05 - kSqrtPi) / kSqrtPi < 1e-6);
  CHECK(std::abs(g10 - 1.0) < 1e-6);
  // Agreement with the library Gamma as an independent cross-check.
  CHECK(g03 == doctest::Approx(std::tgamma(0.3)).epsilon(1e-8));
}

TEST_CASE("lower incomplete gamma at a short horizon") {
  auto decay = [](double s) { return std::exp(-s); };
  const double v = integrate_singular(decay, 0.5, 1.0);
  CHECK(v == doctest::Approx(kLowerGammaHalfOne).epsilon(1e-9));
}

TEST_CASE("singular mesh covers the horizon with a graded head") {
  SingularIntegralConfig cfg;
  auto mesh = singular_mesh(0.5, 7.3, cfg);
  REQUIRE(!mesh.empty());
  CHECK(mesh.front().first == doctest::Approx(0.0));
  CHECK(mesh.back().second == doctest::Approx(7.3));
  for (std::size_t i = 1; i < mesh.size(); ++i)
    CHECK(mesh[i].first == doctest::Approx(mesh[i - 1].second));
  // Head cells shrink toward 0.
  CHECK(mesh[0].second - mesh[0].first < mesh[1].second - mesh[1].first);
}

TEST_CASE("config validation bounds") {
  SingularIntegralConfig cfg;
  cfg.n_nodes = 3;
  CHECK_THROWS_AS(cfg.validate(0.5), std::invalid_argument);
  cfg.n_nodes = 10;
  cfg.sigma = 0.5;
  CHECK_THROWS_AS(cfg.validate(0.5), std::invalid_argument);
  cfg.sigma = 0.0;
  CHECK(cfg.grading(0.5) == doctest::Approx(4.0));
  CHECK(cfg.grading(1.0) == doctest::Approx(2.0));
}

TEST_CASE("smooth composite gauss") {
  const double twopi = 6.283185307179586;
  const double s = integrate_smooth([](double t) { return std::sin(t) * std::sin(t); }, 0.0,
                                    twopi);
  CHECK(s == doctest::Approx(twopi / 2.0).epsilon(1e-12));
}

TEST_CASE("beta equal to one reduces to plain integration") {
  const double v = integrate_singular([](double s) { return std::cos(s); }, 1.0, 1.5);
  CHECK(v == doctest::Approx(std::sin(1.5)).epsilon(1e-12));
}
