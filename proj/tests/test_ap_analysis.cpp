#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <memory>

#include "apcauchy/ap_analysis.hpp"
#include "apcauchy/signal.hpp"
#include "apcauchy/trig_polynomial.hpp"
#include "doctest.h"

using namespace apcauchy;

namespace {

constexpr double kTwoPi = 6.283185307179586;

GridFunction sample_scalar(const std::function<double(double)>& f, const TimeGrid& grid) {
  return GridFunction::sample(grid, 1,
                              [&](double t, Eigen::Ref<Eigen::VectorXd> v) { v(0) = f(t); });
}

}  // namespace

TEST_CASE("sine passes the almost periodicity test with near-periods at 2 pi k") {
  TrigSignal f(TrigPolynomial::sine(1.0));
  PeriodScanConfig cfg;
  cfg.window = TimeGrid(0.0, 12.0, 0.01);
  cfg.tau_step = 0.01;
  cfg.tau_max = 40.0;
  const APReport report = ap_test(f, 0.01, cfg);
  CHECK(report.verdict == Verdict::kPass);
  CHECK(report.continuity_checked);
  CHECK(report.jump_estimate < 1e-9);
  REQUIRE(!report.found_periods.empty());
  REQUIRE(report.inclusion_length.has_value());
  CHECK(*report.inclusion_length <= cfg.inclusion_limit());
  // Every detected near-period sits close to a multiple of the exact period
  // (k = 0 is legitimate: tiny shifts are eps-periods of any signal).
  for (double tau : report.found_periods) {
    const double k = std::round(tau / kTwoPi);
    CHECK(std::abs(tau - k * kTwoPi) < 0.02);
  }
  // Some genuinely nontrivial near-period is present.
  CHECK(report.found_periods.back() > 1.0);
}

TEST_CASE("a grid-aligned exact period is detected at near machine accuracy") {
  TrigSignal f(TrigPolynomial::sine(1.0));
  PeriodScanConfig cfg;
  cfg.window = TimeGrid(0.0, kTwoPi, M_PI / 100.0);
  cfg.tau_step = M_PI / 2.0;  // 50 window steps; tau = 2 pi is candidate k = 3
  cfg.tau_max = 3.0 * M_PI;
  const PeriodScan scan = epsilon_periods(f, 1e-9, cfg);
  REQUIRE(scan.metric.size() >= 4);
  CHECK(scan.tau_at(3) == doctest::Approx(kTwoPi).epsilon(1e-14));
  CHECK(scan.metric[3] < 1e-12);
  // Non-periods of the same scan stay far from zero.
  CHECK(scan.metric[0] > 0.5);  // tau = pi/2
  CHECK(scan.metric[1] > 1.5);  // tau = pi flips the sign
  const std::vector<double> reps = cluster_representatives(scan, 1e-9);
  REQUIRE(reps.size() == 1);
  CHECK(reps[0] == doctest::Approx(kTwoPi).epsilon(1e-14));
}

TEST_CASE("epsilon-period sets grow with epsilon") {
  TrigPolynomial two_tone = TrigPolynomial::sine(1.0) + TrigPolynomial::sine(std::sqrt(2.0));
  TrigSignal f(two_tone);
  PeriodScanConfig cfg;
  cfg.window = TimeGrid(0.0, 10.0, 0.01);
  cfg.tau_step = 0.01;
  cfg.tau_max = 50.0;
  const PeriodScan tight = epsilon_periods(f, 0.05, cfg);
  const PeriodScan loose = epsilon_periods(f, 0.2, cfg);
  CHECK(tight.passing.size() <= loose.passing.size());
  CHECK(std::includes(loose.passing.begin(), loose.passing.end(), tight.passing.begin(),
                      tight.passing.end()));
}

TEST_CASE("discontinuous pulse train fails the Bohr test on continuity") {
  PulseTrainSignal pulse(2.0, 1.0);
  PeriodScanConfig cfg;
  cfg.window = TimeGrid(0.0, 8.0, 0.01);
  cfg.tau_step = 0.01;
  cfg.tau_max = 24.0;
  const APReport report = ap_test(pulse, 0.05, cfg);
  CHECK(report.verdict == Verdict::kFail);
  CHECK(report.continuity_checked);
  CHECK(report.jump_estimate > 0.9);
  CHECK(report.note.find("discontinuity") != std::string::npos);
  CHECK(!report.inclusion_length.has_value());
}

TEST_CASE("relative density hand cases") {
  {
    const DensityResult r = relative_density({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 10.0, 1.5);
    CHECK(r.pass);
    CHECK(r.max_gap == doctest::Approx(1.0));
  }
  {
    const DensityResult r = relative_density({3.0}, 10.0, 2.0);
    CHECK(!r.pass);
    CHECK(r.max_gap == doctest::Approx(7.0));
  }
  {
    // Empty set: only an inclusion length covering the whole span works.
    const DensityResult r = relative_density({}, 5.0, 5.0);
    CHECK(r.pass);
    CHECK(r.max_gap == doctest::Approx(5.0));
    CHECK(!relative_density({}, 5.0, 4.0).pass);
  }
  CHECK_THROWS_AS(relative_density({1.0}, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("two-parameter scan over a finite state set") {
  // f(t, y) = sin(t) * y is almost periodic uniformly over K.
  struct Field : VectorField {
    int dim() const override { return 1; }
    Eigen::VectorXd eval(double t, const Eigen::VectorXd& y) const override {
      return std::sin(t) * y;
    }
  };
  Field f;
  std::vector<Eigen::VectorXd> K;
  for (double y : {-2.0, 0.5, 1.0}) K.push_back(Eigen::VectorXd::Constant(1, y));
  PeriodScanConfig cfg;
  cfg.window = TimeGrid(0.0, 12.0, 0.01);
  cfg.tau_step = 0.01;
  cfg.tau_max = 40.0;
  const APReport report = ap_test(f, K, 0.05, cfg);
  CHECK(report.verdict == Verdict::kPass);
  REQUIRE(!report.found_periods.empty());
  // The defect at tau scales with the largest |y| in K; near-periods still
  // cluster at multiples of 2 pi.
  const double tau = report.found_periods.front();
  CHECK(std::abs(tau - kTwoPi * std::round(tau / kTwoPi)) < 0.05);
}

TEST_CASE("asymptotic decomposition strips an exponential tail from a sine") {
  TimeGrid grid(0.0, 120.0, 0.02);
  const GridFunction f =
      sample_scalar([](double t) { return std::sin(t) + std::exp(-t / 4.0); }, grid);
  const AAPDecomposition dec = aap_decompose(f, 0.05);
  REQUIRE(dec.translates.size() == 3);
  for (double tau : dec.translates) CHECK(tau >= 20.0 - 1e-9);
  CHECK(dec.residual < 1e-12);
  CHECK(dec.detect_slack <= 0.05 + 1e-6);

  // g approximates the almost periodic part.
  double g_err = 0.0;
  const TimeGrid& og = dec.g.grid();
  for (std::size_t i = 0; i < og.node_count(); ++i)
    g_err = std::max(g_err, std::abs(dec.g.values()(i, 0) - std::sin(og.node(i))));
  CHECK(g_err < 0.05);

  // phi carries the tail: large initially, small eventually.
  CHECK(dec.phi.values().row(0).norm() > 0.5);
  CHECK(dec.phi_tail_sup < 0.05);
  const C0TailReport tail = c0_tail_test(dec.phi, 0.05);
  CHECK(tail.verdict == Verdict::kPass);
}

TEST_CASE("decomposition refuses a window without detectable near-periods") {
  TimeGrid grid(0.0, 30.0, 0.02);
  const GridFunction f = sample_scalar([](double t) { return std::exp(-t); }, grid);
  CHECK_THROWS_AS(aap_decompose(f, 1e-6), std::runtime_error);
}

TEST_CASE("extension to the line through a detected near-period") {
  TimeGrid grid(0.0, 40.0, 0.01);
  const GridFunction f = sample_scalar([](double t) { return std::sin(t); }, grid);
  const ExtensionResult ext = extend_to_line(f, 10.0, 0.05);
  CHECK(ext.tau >= 10.0);
  CHECK(std::abs(ext.tau - kTwoPi * std::round(ext.tau / kTwoPi)) < 0.02);
  CHECK(ext.slack <= 0.05 + 1e-6);
  // Negative times evaluate through the shift and still track sin.
  double err = 0.0;
  for (double t = -5.0; t < 5.0; t += 0.01)
    err = std::max(err, std::abs(ext.signal.eval(t)(0) - std::sin(t)));
  CHECK(err <= ext.slack + 1e-2);
  // Without an extension period, negative times are rejected.
  CHECK_THROWS_AS(GridSignal(f).eval(-1.0), std::out_of_range);
  // A shift beyond the searchable range is refused.
  CHECK_THROWS_AS(extend_to_line(f, 100.0, 0.05), std::invalid_argument);
}

TEST_CASE("vanishing tail test verdicts") {
  {
    TimeGrid grid(0.0, 40.0, 0.01);
    const C0TailReport r =
        c0_tail_test(sample_scalar([](double t) { return std::exp(-t); }, grid), 1e-2);
    CHECK(r.verdict == Verdict::kPass);
    CHECK(r.monotone_ok);
    CHECK(r.final_sup < 1e-10);
  }
  {
    TimeGrid grid(0.0, 40.0, 0.01);
    const C0TailReport r =
        c0_tail_test(sample_scalar([](double t) { return std::sin(t); }, grid), 1e-2);
    CHECK(r.verdict == Verdict::kFail);
    CHECK(r.final_sup > 0.9);
  }
  {
    // Slow decay still vanishes; a long window resolves it.
    TimeGrid grid(0.0, 2000.0, 0.5);
    const C0TailReport r =
        c0_tail_test(sample_scalar([](double t) { return 1.0 / (1.0 + t); }, grid), 1e-3);
    CHECK(r.verdict == Verdict::kPass);
    CHECK(r.final_sup == doctest::Approx(1.0 / 1751.0).epsilon(0.05));
  }
  {
    TimeGrid grid(0.0, 1.0, 0.5);  // 3 nodes: too short, inconclusive
    const C0TailReport r =
        c0_tail_test(sample_scalar([](double) { return 0.0; }, grid), 1e-2);
    CHECK(r.verdict == Verdict::kInconclusive);
  }
  TimeGrid grid(0.0, 10.0, 0.1);
  const GridFunction zero = sample_scalar([](double) { return 0.0; }, grid);
  CHECK_THROWS_AS(c0_tail_test(zero, 1e-2, 2), std::invalid_argument);
  CHECK_THROWS_AS(c0_tail_test(zero, 0.0), std::invalid_argument);
}

TEST_CASE("scan configuration validation") {
  PeriodScanConfig cfg;
  cfg.window = TimeGrid(0.0, 10.0, 0.01);
  cfg.tau_step = 0.015;  // not a multiple of the window step
  cfg.tau_max = 5.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.tau_step = 0.02;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.stride() == 2);
  CHECK(cfg.tau_count() == 250);
  CHECK(cfg.inclusion_limit() == doctest::Approx(5.0 / 3.0));
  cfg.max_inclusion_length = 1.0;
  CHECK(cfg.inclusion_limit() == doctest::Approx(1.0));
  // A zero tau range is degenerate, not invalid: the test reports
  // inconclusive instead of scanning.
  cfg.tau_max = 0.0;
  CHECK(cfg.tau_count() == 0);
  TrigSignal f(TrigPolynomial::sine(1.0));
  CHECK(ap_test(f, 0.01, cfg).verdict == Verdict::kInconclusive);
  cfg.tau_step = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
