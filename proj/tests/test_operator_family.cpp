#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <limits>

#include "apcauchy/operator_family.hpp"
#include "doctest.h"

using namespace apcauchy;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Geometric block sums of e^{-t} blocks, frozen:
/// sum_k e^{-k} and sum_k ||e^{-s}||_{L^2[k,k+1]}.
constexpr double kExpBlockSumInf = 1.5819767068693265;
constexpr double kExpBlockSumQ2 = 1.040181093305068;

DiagonalFamily unit_exp_family(double rate = 1.0) {
  return DiagonalFamily(Eigen::VectorXd::Constant(1, rate), Eigen::VectorXd::Ones(1),
                        KernelEnvelope{1.0, rate, 1.0});
}

}  // namespace

TEST_CASE("kernel envelope validation and evaluation") {
  KernelEnvelope env{2.0, 0.5, 0.75};
  CHECK_NOTHROW(env.validate());
  CHECK(env.eval(4.0) == doctest::Approx(2.0 * std::exp(-2.0) * std::pow(4.0, -0.25)));
  CHECK_THROWS_AS(env.eval(0.0), std::domain_error);
  CHECK_THROWS_AS(env.eval(-1.0), std::domain_error);
  CHECK_THROWS_AS((KernelEnvelope{0.0, 1.0, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((KernelEnvelope{1.0, 0.0, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((KernelEnvelope{1.0, 1.0, 1.5}.validate()), std::invalid_argument);
}

TEST_CASE("diagonal family semantics") {
  Eigen::VectorXd rates(2), weights(2);
  rates << 1.0, 2.0;
  weights << 1.0, 1.0;
  DiagonalFamily fam(rates, weights, KernelEnvelope{1.0, 1.0, 1.0});
  CHECK(fam.is_semigroup());
  CHECK(fam.regular_projector().isApprox(Eigen::MatrixXd::Identity(2, 2)));
  Eigen::VectorXd x(2);
  x << 3.0, -4.0;
  const Eigen::VectorXd y = fam.apply(0.5, x);
  CHECK(y(0) == doctest::Approx(3.0 * std::exp(-0.5)).epsilon(1e-14));
  CHECK(y(1) == doctest::Approx(-4.0 * std::exp(-1.0)).epsilon(1e-14));
  CHECK(fam.operator_norm(0.5) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(fam.spectrum()(0) == std::complex<double>(-1.0, 0.0));

  Eigen::VectorXd shaped(2);
  shaped << 0.5, 2.0;
  DiagonalFamily weighted(rates, shaped, KernelEnvelope{2.0, 1.0, 1.0});
  CHECK(!weighted.is_semigroup());
  CHECK_THROWS_AS(weighted.regular_projector(), std::logic_error);
  CHECK_THROWS_AS(weighted.spectrum(), std::logic_error);
}

TEST_CASE("measured norms never exceed the declared envelope") {
  const EnvelopeCheck diag = verify_envelope(unit_exp_family());
  CHECK(diag.pass);
  CHECK(diag.worst_ratio <= 1.0 + 1e-6);
  CHECK(diag.worst_ratio > 0.9);  // the scalar family saturates its envelope

  const OperatorFamilyPtr sur = surrogate_family(0.5, 1.0, 16);
  const EnvelopeCheck s = verify_envelope(*sur);
  CHECK(s.pass);
  CHECK(s.worst_ratio <= 1.0 + 1e-6);
}

TEST_CASE("surrogate family traces the power-law envelope within a factor two") {
  const OperatorFamilyPtr sur = surrogate_family(0.5, 1.0, 16);
  const KernelEnvelope& env = sur->envelope();
  for (double t = 1e-2; t <= 10.0; t *= 1.2) {
    const double norm = sur->operator_norm(t);
    CHECK(norm <= env.eval(t) * (1.0 + 1e-6));
    CHECK(norm >= 0.5 * env.eval(t));
  }
  CHECK_THROWS_AS(surrogate_family(0.5, 1.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(surrogate_family(0.0, 1.0, 16), std::invalid_argument);
}

TEST_CASE("block sums of the exponential envelope are geometric") {
  const KernelEnvelope env{1.0, 1.0, 1.0};
  const BlockSumResult inf_sum = block_norm_sum(env, kInf);
  CHECK(inf_sum.sum == doctest::Approx(kExpBlockSumInf).epsilon(1e-8));
  CHECK(inf_sum.blocks > 10);
  CHECK(inf_sum.tail_bound < 1e-10 * inf_sum.sum);

  const BlockSumResult q2 = block_norm_sum(env, 2.0);
  CHECK(q2.sum == doctest::Approx(kExpBlockSumQ2).epsilon(1e-8));

  // The measured family norm agrees with its envelope here.
  const BlockSumResult fam = block_norm_sum(unit_exp_family(), kInf);
  CHECK(fam.sum == doctest::Approx(kExpBlockSumInf).epsilon(1e-6));
}

TEST_CASE("non-integrable first blocks are rejected") {
  const KernelEnvelope env{1.0, 1.0, 0.5};
  // q'(beta - 1) = -1: the first block diverges.
  CHECK_THROWS_WITH_AS(block_norm_sum(env, 2.0),
                       doctest::Contains("first block divergent"), std::invalid_argument);
  // q' = inf requires beta = 1.
  CHECK_THROWS_AS(block_norm_sum(env, kInf), std::invalid_argument);
  // q' slightly below the threshold converges.
  CHECK_NOTHROW(block_norm_sum(env, 1.9));
  CHECK_THROWS_AS(block_norm_sum(env, 0.5), std::invalid_argument);
}

TEST_CASE("classical pencil reduces to the matrix exponential") {
  const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
  A(0, 0) = -1.0;
  A(1, 1) = -2.0;
  const PencilSemigroup sg = pencil_semigroup(B, A);
  CHECK(sg.model.rank == 2);
  CHECK(sg.model.projector.isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-12));
  Eigen::VectorXd x(2);
  x << 1.0, 1.0;
  const Eigen::VectorXd y = sg.family->apply(0.7, x);
  CHECK(y(0) == doctest::Approx(std::exp(-0.7)).epsilon(1e-12));
  CHECK(y(1) == doctest::Approx(std::exp(-1.4)).epsilon(1e-12));
  CHECK(sg.family->is_semigroup());
  // Spectrum {-1, -2} recovered.
  double re_min = 0.0, re_max = -10.0;
  for (int i = 0; i < sg.model.finite_spectrum.size(); ++i) {
    re_min = std::min(re_min, sg.model.finite_spectrum(i).real());
    re_max = std::max(re_max, sg.model.finite_spectrum(i).real());
  }
  CHECK(re_min == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(re_max == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("degenerate pencil kills the algebraic component") {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2, 2);
  B(0, 0) = 1.0;
  const Eigen::MatrixXd A = -Eigen::MatrixXd::Identity(2, 2);
  const PencilSemigroup sg = pencil_semigroup(B, A);
  CHECK(sg.model.rank == 1);
  Eigen::VectorXd x(2);
  x << 2.0, 5.0;
  const Eigen::VectorXd y = sg.family->apply(1.0, x);
  CHECK(y(0) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-12));
  CHECK(std::abs(y(1)) < 1e-12);
  // T(0+) is the projector onto the regular subspace.
  const Eigen::MatrixXd P = sg.family->regular_projector();
  CHECK(P(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(P(1, 1)) < 1e-12);
}

TEST_CASE("pencil family satisfies the semigroup law") {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(3, 3);
  B(0, 0) = 1.0;
  B(1, 1) = 2.0;
  B(0, 1) = B(1, 0) = 0.5;  // rank 2, coupled
  Eigen::MatrixXd A(3, 3);
  A << -2.0, 0.3, 0.0, 0.3, -1.5, 0.2, 0.0, 0.2, -1.0;
  const PencilSemigroup sg = pencil_semigroup(B, A);
  REQUIRE(sg.model.rank == 2);
  for (double t : {0.1, 0.8, 2.5}) {
    for (double s : {0.3, 1.7}) {
      for (int i = 0; i < 3; ++i) {
        const Eigen::VectorXd e = Eigen::VectorXd::Unit(3, i);
        const Eigen::VectorXd two_step = sg.family->apply(t, sg.family->apply(s, e));
        const Eigen::VectorXd one_step = sg.family->apply(t + s, e);
        CHECK((two_step - one_step).norm() < 1e-8);
      }
    }
  }
}

TEST_CASE("rank-3 pencil matches a stiff trapezoidal integration of the constrained system") {
  // B = M^T diag(1,2,3,0) M is symmetric positive semidefinite with rank 3;
  // A = -(N^T N + I) is symmetric negative definite, which guarantees index
  // one and a decaying finite spectrum.
  Eigen::MatrixXd M(4, 4), N(4, 4);
  M << 1, 1, 0, 0, 0, 1, 1, 0, 0, 0, 1, 1, 1, 0, 0, 1;
  N << 1, 0, 1, 0, 0, 1, 0, 1, 1, 1, 0, 0, 0, 0, 1, 1;
  Eigen::VectorXd d(4);
  d << 1.0, 2.0, 3.0, 0.0;
  const Eigen::MatrixXd B = M.transpose() * d.asDiagonal() * M;
  const Eigen::MatrixXd A = -(N.transpose() * N + Eigen::MatrixXd::Identity(4, 4));

  const PencilSemigroup sg = pencil_semigroup(B, A);
  REQUIRE(sg.model.rank == 3);

  // The family propagates u = B v.  Build a consistent v0: B v0 = u0 with
  // the algebraic constraint (ker B^T)' A v0 = 0, met by a kernel tilt.
  Eigen::FullPivLU<Eigen::MatrixXd> blu(B);
  blu.setThreshold(1e-10);
  const Eigen::MatrixXd ker_b = blu.kernel();
  Eigen::FullPivLU<Eigen::MatrixXd> btlu(B.transpose());
  btlu.setThreshold(1e-10);
  const Eigen::MatrixXd ker_bt = btlu.kernel();
  REQUIRE(ker_b.cols() == 1);
  Eigen::VectorXd p(4);
  p << 1.0, -1.0, 2.0, 0.5;
  const Eigen::MatrixXd constraint = ker_bt.transpose() * A;
  const Eigen::VectorXd tilt =
      (constraint * ker_b).fullPivLu().solve(-(constraint * p));
  const Eigen::VectorXd v0 = p + ker_b * tilt;
  const Eigen::VectorXd u0 = B * v0;

  // Trapezoidal rule on B v' = A v; the constraint stays satisfied exactly.
  const double h = 1e-4;
  Eigen::VectorXd v = v0;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lhs(B - 0.5 * h * A);
  const Eigen::MatrixXd rhs = B + 0.5 * h * A;
  const int steps = static_cast<int>(std::round(1.0 / h));
  for (int n = 0; n < steps; ++n) v = lhs.solve(rhs * v);

  const Eigen::VectorXd flow = sg.family->apply(1.0, u0);
  CHECK((B * v - flow).norm() < 5e-6);
  // The projector is absorbed: T(t) x = T(t) P x for arbitrary x.
  const Eigen::VectorXd arbitrary = sg.family->apply(1.0, p);
  const Eigen::VectorXd projected = sg.family->apply(1.0, sg.model.projector * p);
  CHECK((arbitrary - projected).norm() < 1e-10);
}

TEST_CASE("pencil construction rejects the unsupported cases") {
  {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2, 2);
    B(0, 0) = 1.0;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
    A(0, 0) = -1.0;  // det(lambda B - A) = 0 identically
    CHECK_THROWS_WITH_AS(pencil_semigroup(B, A), doctest::Contains("singular pencil"),
                         std::invalid_argument);
  }
  {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2, 2);
    B(0, 1) = 1.0;  // nilpotent: index 2
    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_WITH_AS(pencil_semigroup(B, A), doctest::Contains("index exceeds one"),
                         std::invalid_argument);
  }
  {
    const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(2, 2);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
    A(0, 0) = 1.0;  // unstable mode
    A(1, 1) = -1.0;
    CHECK_THROWS_WITH_AS(pencil_semigroup(B, A),
                         doctest::Contains("not exponentially decaying"), std::invalid_argument);
  }
  CHECK_THROWS_AS(pencil_semigroup(Eigen::MatrixXd::Identity(2, 2),
                                   Eigen::MatrixXd::Identity(3, 3)),
                  std::invalid_argument);
}

TEST_CASE("pencil resolvent is conjugate symmetric") {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(3, 3);
  B(0, 0) = 1.0;
  B(1, 1) = 1.0;
  Eigen::MatrixXd A(3, 3);
  A << -1.0, 0.4, 0.1, -0.2, -2.0, 0.0, 0.3, 0.0, -1.5;
  const PencilSemigroup sg = pencil_semigroup(B, A);
  const std::complex<double> lambda(0.7, 2.3);
  const double plus = sg.model.resolvent_norm(lambda);
  const double minus = sg.model.resolvent_norm(std::conj(lambda));
  CHECK(plus == doctest::Approx(minus).epsilon(1e-12));
  CHECK(plus > 0.0);
}

TEST_CASE("resolvent region membership") {
  CHECK(in_resolvent_region({-0.5, 0.0}, 1.0));
  CHECK(in_resolvent_region({-1.0, 0.0}, 1.0));       // boundary
  CHECK(!in_resolvent_region({-3.0, 0.0}, 1.0));
  CHECK(in_resolvent_region({-3.0, 2.5}, 1.0));       // -c(|Im|+1) = -3.5
  CHECK(!in_resolvent_region({-4.0, 2.5}, 1.0));
  CHECK(in_resolvent_region({100.0, -50.0}, 0.25));
}

TEST_CASE("resolvent bound verification for a scalar spectrum") {
  Eigen::VectorXcd spectrum(1);
  spectrum << std::complex<double>(-2.0, 0.0);

  // Fit mode: the report carries the smallest admissible M.
  const ConditionPReport fit = check_condition_P(spectrum, 1.0, 0.0, 1.0);
  CHECK(fit.verdict == Verdict::kPass);
  CHECK(fit.fitted);
  CHECK(fit.M >= 1.0);
  CHECK(fit.M < 10.0);
  CHECK(fit.worst_ratio == doctest::Approx(1.0).epsilon(1e-9));

  // A generous declared M passes, an understated one fails.
  CHECK(check_condition_P(spectrum, 1.0, 2.0 * fit.M, 1.0).verdict == Verdict::kPass);
  const ConditionPReport bad = check_condition_P(spectrum, 1.0, 0.5 * fit.M, 1.0);
  CHECK(bad.verdict == Verdict::kFail);
  CHECK(bad.worst_ratio > 1.0);
  CHECK(!bad.fitted);
}

TEST_CASE("resolvent bound verification for a pencil model") {
  const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
  A(0, 0) = -1.0;
  A(1, 1) = -2.0;
  const PencilSemigroup sg = pencil_semigroup(B, A);
  const double c = sg.family->envelope().c;
  CHECK(c < 1.0);  // fitted just inside the spectral gap
  const ConditionPReport rep = check_condition_P(sg.model, c, 0.0, 1.0);
  CHECK(rep.verdict == Verdict::kPass);
  CHECK(rep.fitted);
  CHECK(rep.M > 0.0);
}

TEST_CASE("condition check argument validation") {
  Eigen::VectorXcd spectrum(1);
  spectrum << std::complex<double>(-1.0, 0.0);
  CHECK_THROWS_AS(check_condition_P(spectrum, 0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(check_condition_P(spectrum, 1.0, 1.0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(check_condition_P(spectrum, 1.0, 1.0, 1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(check_condition_P(Eigen::VectorXcd(), 1.0, 1.0, 1.0), std::invalid_argument);
}
