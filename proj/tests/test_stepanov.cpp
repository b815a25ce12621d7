#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <memory>

#include "apcauchy/stepanov.hpp"
#include "apcauchy/trig_polynomial.hpp"
#include "doctest.h"

using namespace apcauchy;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// sup_t sqrt(integral_t^{t+1} sin^2) = sqrt((1 + sin 1)/2).
constexpr double kSineS2Norm = 0.9595496299847904;

struct SineFeedback : VectorField {
  double k = 0.25;
  int dim() const override { return 1; }
  Eigen::VectorXd eval(double t, const Eigen::VectorXd& x) const override {
    return Eigen::VectorXd::Constant(1, std::sin(t) + k * std::sin(x(0)));
  }
};

PeriodScanConfig basic_scan(double t_end, double step, double tau_max) {
  PeriodScanConfig cfg;
  cfg.window = TimeGrid(0.0, t_end, step);
  cfg.tau_step = step;
  cfg.tau_max = tau_max;
  return cfg;
}

}  // namespace

TEST_CASE("composition exponents for the (2, 4) pair are exact") {
  const StepanovExponents e = composition_exponent(2.0, 4.0);
  CHECK(e.p == 2.0);
  CHECK(e.r.value() == 4.0);
  CHECK(e.q() == 4.0 / 3.0);          // p r / (p + r) = 8/6, exact in binary
  CHECK(e.q_conjugate() == 4.0);      // p r / (p r - p - r) = 8/2
}

TEST_CASE("the conjugate exponent degenerates exactly at r = p/(p-1)") {
  const StepanovExponents e = composition_exponent(2.0, 2.0);
  CHECK(e.q() == 1.0);
  CHECK(std::isinf(e.q_conjugate()));
}

TEST_CASE("conjugate exponent identities") {
  CHECK(std::isinf(conjugate_exponent(1.0)));
  CHECK(conjugate_exponent(kInf) == 1.0);
  CHECK(conjugate_exponent(2.0) == 2.0);
  CHECK(conjugate_exponent(4.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(conjugate_exponent(conjugate_exponent(3.0)) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("composition exponent validation") {
  CHECK_THROWS_AS(composition_exponent(1.0, 4.0), std::invalid_argument);   // p must exceed 1
  CHECK_THROWS_AS(composition_exponent(2.0, 1.5), std::invalid_argument);   // r < p/(p-1)
  CHECK_THROWS_AS(composition_exponent(3.0, 2.0), std::invalid_argument);   // r < p
  CHECK_NOTHROW(composition_exponent(3.0, 3.0));
}

TEST_CASE("Stepanov norm of sine matches the closed form") {
  TrigSignal f(TrigPolynomial::sine(1.0));
  TimeGrid window(0.0, 9.0, 0.01);
  const double norm = stepanov_norm(f, 2.0, window);
  CHECK(norm == doctest::Approx(kSineS2Norm).epsilon(1e-4));
  // The sup ranges over the window, so an offset window with the same span
  // yields the same value for a periodic signal.
  TimeGrid offset(0.37, 9.37, 0.01);
  CHECK(stepanov_norm(f, 2.0, offset) == doctest::Approx(norm).epsilon(1e-4));
  // S^1 norm of sine: sup_t integral_t^{t+1} |sin| = 2 sin(1/2).
  CHECK(stepanov_norm(f, 1.0, window) ==
        doctest::Approx(2.0 * std::sin(0.5)).epsilon(1e-4));
}

TEST_CASE("Stepanov norm of a pulse train is exact on aligned grids") {
  // High on [2k, 2k+1): a unit window starting at an even integer is all
  // high, so the S^p norm is exactly 1; the midpoint rule never straddles a
  // jump when the step divides the period.
  PulseTrainSignal pulse(2.0, 1.0);
  TimeGrid window(0.0, 6.0, 0.002);
  CHECK(stepanov_norm(pulse, 1.0, window) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(stepanov_norm(pulse, 2.0, window) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Stepanov norm rejects malformed windows") {
  TrigSignal f(TrigPolynomial::sine(1.0));
  CHECK_THROWS_AS(stepanov_norm(f, 2.0, TimeGrid(0.0, 0.5, 0.01)), std::invalid_argument);
  CHECK_THROWS_AS(stepanov_norm(f, 2.0, TimeGrid(0.0, 5.0, 0.3)), std::invalid_argument);
  CHECK_THROWS_AS(stepanov_norm(f, 0.5, TimeGrid(0.0, 5.0, 0.01)), std::invalid_argument);
}

TEST_CASE("Bohr almost periodic signals are Stepanov almost periodic") {
  TrigSignal f(TrigPolynomial::sine(1.0));
  PeriodScanConfig cfg = basic_scan(8.0, 0.01, 30.0);
  cfg.tau_step = 0.02;
  const StepanovReport rep = sp_ap_test(f, 2.0, 0.05, cfg);
  CHECK(rep.p == 2.0);
  CHECK(rep.scan.verdict == Verdict::kPass);
  CHECK(rep.norm == doctest::Approx(stepanov_norm(f, 2.0, cfg.window)).epsilon(1e-12));
  CHECK(rep.aap_threshold == 0.0);
  // The lift metric is dominated by the sup metric, so every sup-metric
  // near-period reappears in the Stepanov scan at the same eps.
  const PeriodScan sup_scan = epsilon_periods(f, 0.05, cfg);
  CHECK(std::includes(rep.scan.found_periods.begin(), rep.scan.found_periods.end(),
                      sup_scan.passing.begin(), sup_scan.passing.end()));
}

TEST_CASE("a discontinuous pulse train is Stepanov but not Bohr almost periodic") {
  PulseTrainSignal pulse(2.0, 1.0);
  PeriodScanConfig cfg = basic_scan(8.0, 0.01, 24.0);
  const StepanovReport rep = sp_ap_test(pulse, 1.0, 0.05, cfg);
  CHECK(rep.scan.verdict == Verdict::kPass);
  // Exact periods are detected with zero lift defect.
  bool has_two = false;
  for (double tau : rep.scan.found_periods)
    if (std::abs(tau - 2.0) < 1e-9) has_two = true;
  CHECK(has_two);
}

TEST_CASE("a decaying perturbation breaks plain Stepanov periodicity but not the asymptotic variant") {
  LambdaSignal f(1, [](double t) {
    return Eigen::VectorXd::Constant(1, std::sin(t) + 3.0 * std::exp(-0.5 * t));
  });
  PeriodScanConfig cfg = basic_scan(24.0, 0.02, 40.0);
  const StepanovReport plain = sp_ap_test(f, 1.0, 0.05, cfg);
  CHECK(plain.scan.verdict == Verdict::kFail);
  const StepanovReport asym = sp_aap_test(f, 1.0, 0.05, cfg);
  CHECK(asym.scan.verdict == Verdict::kPass);
  CHECK(asym.aap_threshold > 0.0);
  CHECK(asym.aap_threshold <= 12.0 + 1e-9);  // first half of the window
}

TEST_CASE("composition with sampled Lipschitz data lands in S^q") {
  SineFeedback field;
  auto trajectory = std::make_shared<TrigSignal>(TrigPolynomial::sine(1.0));
  const StepanovExponents exps = composition_exponent(2.0, 4.0);
  const GridFunction l_samples = GridFunction::sample(
      TimeGrid(0.0, 12.0, 0.1), 1,
      [&](double, Eigen::Ref<Eigen::VectorXd> v) { v(0) = field.k; });
  const LipschitzData lip = LipschitzData::sampled_bound(l_samples, 4.0);

  ComposeConfig cfg;
  cfg.scan = basic_scan(12.0, 0.01, 40.0);
  const CompositionReport rep = compose_and_verify(field, trajectory, exps, lip, 0.05,
                                                   CompositionMode::kAP, cfg);
  CHECK(rep.conclusion_exponent == 4.0 / 3.0);
  CHECK(rep.hyp_two_param == Verdict::kPass);
  CHECK(rep.hyp_lipschitz == Verdict::kPass);
  CHECK(rep.lipschitz_worst_ratio <= 1.0 + 1e-9);
  CHECK(rep.lipschitz_worst_ratio > 0.5);
  CHECK(rep.conclusion == Verdict::kPass);
  CHECK(rep.composed.p == 4.0 / 3.0);
}

TEST_CASE("constant-Lipschitz composition keeps the trajectory exponent") {
  SineFeedback field;
  auto trajectory = std::make_shared<TrigSignal>(TrigPolynomial::sine(1.0));
  ComposeConfig cfg;
  cfg.scan = basic_scan(12.0, 0.01, 40.0);
  const CompositionReport rep =
      compose_and_verify(field, trajectory, composition_exponent(2.0, 4.0),
                         LipschitzData::constant_bound(field.k), 0.05,
                         CompositionMode::kAP, cfg);
  CHECK(rep.conclusion_exponent == 2.0);
  CHECK(rep.conclusion == Verdict::kPass);
}

TEST_CASE("an understated Lipschitz constant fails the hypothesis and blocks the conclusion") {
  SineFeedback field;
  auto trajectory = std::make_shared<TrigSignal>(TrigPolynomial::sine(1.0));
  ComposeConfig cfg;
  cfg.scan = basic_scan(12.0, 0.01, 40.0);
  const CompositionReport rep =
      compose_and_verify(field, trajectory, composition_exponent(2.0, 4.0),
                         LipschitzData::constant_bound(field.k / 4.0), 0.05,
                         CompositionMode::kAP, cfg);
  CHECK(rep.hyp_lipschitz == Verdict::kFail);
  CHECK(rep.lipschitz_worst_ratio > 1.0);
  CHECK(rep.conclusion == Verdict::kInconclusive);
  CHECK(rep.note.find("not asserted") != std::string::npos);
}

TEST_CASE("asymptotic composition accepts a trajectory with a vanishing tail") {
  SineFeedback field;
  auto trajectory = std::make_shared<LambdaSignal>(1, [](double t) {
    return Eigen::VectorXd::Constant(1, std::sin(t) + std::exp(-0.5 * t));
  });
  ComposeConfig cfg;
  cfg.scan = basic_scan(60.0, 0.02, 20.0);
  const CompositionReport rep =
      compose_and_verify(field, trajectory, composition_exponent(2.0, 4.0),
                         LipschitzData::constant_bound(field.k), 0.05,
                         CompositionMode::kAAP, cfg);
  CHECK(rep.hyp_two_param == Verdict::kPass);
  CHECK(rep.hyp_lipschitz == Verdict::kPass);
  CHECK(rep.hyp_decomposition == Verdict::kPass);
  CHECK(rep.conclusion == Verdict::kPass);
  CHECK(rep.composed.aap_threshold > 0.0);
}

TEST_CASE("Lipschitz data validation and evaluation") {
  const LipschitzData c = LipschitzData::constant_bound(0.7);
  CHECK(c.eval(-100.0) == 0.7);
  CHECK(c.eval(12345.0) == 0.7);
  CHECK_THROWS_AS(LipschitzData::constant_bound(-0.1).validate(), std::invalid_argument);

  TimeGrid grid(0.0, 2.0, 0.5);
  Eigen::MatrixXd vals(5, 1);
  vals << 1.0, 2.0, 3.0, 2.0, 1.0;
  const LipschitzData s = LipschitzData::sampled_bound(GridFunction(grid, vals), 2.0);
  CHECK(s.eval(1.0) == doctest::Approx(3.0));
  CHECK(s.eval(0.25) == doctest::Approx(1.5));  // linear interpolation
  CHECK_THROWS_AS(s.eval(5.0), std::out_of_range);
  CHECK_THROWS_AS(LipschitzData::sampled_bound(GridFunction(grid, vals), 0.5).validate(),
                  std::invalid_argument);
  Eigen::MatrixXd negative = vals;
  negative(2, 0) = -1.0;
  CHECK_THROWS_AS(LipschitzData::sampled_bound(GridFunction(grid, negative), 2.0).validate(),
                  std::invalid_argument);
}
