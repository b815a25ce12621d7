#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "apcauchy/signal.hpp"
#include "apcauchy/trig_polynomial.hpp"

using namespace apcauchy;

namespace {
constexpr double kTwoPi = 6.283185307179586476925;
}

TEST_CASE("sine and cosine terms evaluate pointwise") {
  TrigSignal s(TrigPolynomial::sine(1.0, 2.0));
  CHECK(s.eval(0.7)(0) == doctest::Approx(2.0 * std::sin(0.7)).epsilon(1e-15));
  TrigSignal c(TrigPolynomial::cosine(3.0, 0.5));
  CHECK(c.eval(1.3)(0) == doctest::Approx(0.5 * std::cos(3.9)).epsilon(1e-14));
}

TEST_CASE("termwise sum and scaling") {
  TrigPolynomial p = TrigPolynomial::sine(1.0) + TrigPolynomial::cosine(2.0, 3.0);
  TrigSignal s(p.scaled(2.0));
  const double t = 0.31;
  CHECK(s.eval(t)(0) ==
        doctest::Approx(2.0 * (std::sin(t) + 3.0 * std::cos(2.0 * t))).epsilon(1e-14));
}

TEST_CASE("integer-frequency polynomials have 2 pi as a 0-period") {
  TrigPolynomial p = TrigPolynomial::sine(1.0) + TrigPolynomial::sine(2.0, 0.7) +
                     TrigPolynomial::cosine(3.0, 0.3);
  TrigSignal s(p);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double t = -40.0 + 0.4 * i;
    worst = std::max(worst, std::abs(s.eval(t + kTwoPi)(0) - s.eval(t)(0)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("constant polynomial") {
  Eigen::VectorXd v(2);
  v << 1.5, -2.0;
  TrigSignal s(TrigPolynomial::constant(v));
  CHECK(s.eval(17.0)(0) == doctest::Approx(1.5));
  CHECK(s.eval(-4.0)(1) == doctest::Approx(-2.0));
  CHECK(s.dim() == 2);
}

TEST_CASE("pulse train values and period") {
  PulseTrainSignal p(2.0, 1.0, 1.0);
  CHECK(p.eval(0.5)(0) == doctest::Approx(1.0));
  CHECK(p.eval(1.5)(0) == doctest::Approx(0.0));
  CHECK(p.eval(2.5)(0) == doctest::Approx(1.0));
  CHECK(p.eval(-0.5)(0) == doctest::Approx(0.0));
  CHECK(p.eval(-1.5)(0) == doctest::Approx(1.0));
  for (double t : {0.25, 0.75, 1.25, 1.75}) {
    CHECK(p.eval(t + 2.0)(0) == doctest::Approx(p.eval(t)(0)));
  }
}

TEST_CASE("exponential decay signal") {
  ExpDecaySignal d(Eigen::VectorXd::Constant(1, 2.0), 2.0);
  CHECK(d.eval(0.0)(0) == doctest::Approx(2.0));
  CHECK(d.eval(2.0)(0) == doctest::Approx(2.0 / std::exp(1.0)).epsilon(1e-14));
}

TEST_CASE("sum signal adds componentwise") {
  auto a = std::make_shared<TrigSignal>(TrigPolynomial::sine(1.0));
  auto b = std::make_shared<ExpDecaySignal>(Eigen::VectorXd::Constant(1, 1.0), 1.0);
  SumSignal s(a, b);
  const double t = 0.9;
  CHECK(s.eval(t)(0) == doctest::Approx(std::sin(t) + std::exp(-t)).epsilon(1e-14));
}

TEST_CASE("grid signal windows and near-period extension") {
  TimeGrid g(0.0, 10.0, 0.01);
  GridFunction f = GridFunction::sample(g, 1, [](double t, Eigen::Ref<Eigen::VectorXd> out) {
    out(0) = std::sin(kTwoPi * t / 2.0);
  });

  GridSignal plain(f);
  CHECK_FALSE(plain.exact());
  CHECK(plain.t_min() == doctest::Approx(0.0));
  CHECK(plain.t_max() == doctest::Approx(10.0));
  CHECK_THROWS_AS(plain.eval(-0.5), std::out_of_range);

  // tau_ext = 2 is an exact period of the data, so the left extension agrees
  // with the closed form.
  GridSignal extended(f, 2.0);
  CHECK(extended.extended());
  CHECK(extended.eval(-3.0)(0) ==
        doctest::Approx(std::sin(kTwoPi * -3.0 / 2.0)).epsilon(1e-4));
  CHECK(extended.eval(-17.7)(0) ==
        doctest::Approx(std::sin(kTwoPi * -17.7 / 2.0)).epsilon(1e-4));
}

TEST_CASE("lambda signal and composed field trajectory") {
  LambdaSignal traj(1, [](double t) { return Eigen::VectorXd::Constant(1, t * t); });
  CHECK(traj.eval(3.0)(0) == doctest::Approx(9.0));

  struct AffineField final : VectorField {
    int dim() const override { return 1; }
    Eigen::VectorXd eval(double t, const Eigen::VectorXd& x) const override {
      return Eigen::VectorXd::Constant(1, std::sin(t) + 2.0 * x(0));
    }
  };
  auto field = std::make_shared<AffineField>();
  auto traj_ptr = std::make_shared<LambdaSignal>(
      1, [](double t) { return Eigen::VectorXd::Constant(1, t); });
  ComposedSignal composed(field, traj_ptr);
  CHECK(composed.eval(0.5)(0) == doctest::Approx(std::sin(0.5) + 1.0).epsilon(1e-14));
}
