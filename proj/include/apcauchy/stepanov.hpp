#pragma once

#include <optional>
#include <string>

#include "apcauchy/ap_analysis.hpp"
#include "apcauchy/signal.hpp"

namespace apcauchy {

/// Exponent bookkeeping for Stepanov spaces and composition results.
///
/// With a two-parameter nonlinearity in S^r-Lipschitz form, a trajectory in
/// S^p composes into S^q with q = p*r/(p+r); the conjugate q' = p*r/(p*r-p-r)
/// blows up to infinity exactly when r = p/(p-1).
struct StepanovExponents {
  double p = 1.0;
  std::optional<double> r;

  double q() const;
  double q_conjugate() const;  ///< conjugate of q(); +inf when q() == 1
  bool has_r() const { return r.has_value(); }
};

/// Validates p > 1 and r >= max(p, p/(p-1)) and packages the pair.
StepanovExponents composition_exponent(double p, double r);

/// Conjugate exponent a/(a-1), +inf for a == 1.
double conjugate_exponent(double a);

/// Lipschitz data for a two-parameter function:
///   constant kind:  ||f(t,x)-f(t,y)|| <= L ||x-y||
///   sampled kind:   ||f(t,x)-f(t,y)|| <= L_f(t) ||x-y||, L_f given on a grid.
struct LipschitzData {
  enum class Kind { kConstant, kSampled };
  Kind kind = Kind::kConstant;
  double constant = 0.0;
  GridFunction samples;  ///< scalar samples of L_f (sampled kind)
  double r = 0.0;        ///< Stepanov exponent declared for L_f (sampled kind)

  static LipschitzData constant_bound(double L);
  static LipschitzData sampled_bound(GridFunction L_f, double r);
  double eval(double t) const;
  void validate() const;
};

/// S^p norm of f over the window: sup over window nodes t of
/// (integral_t^(t+1) ||f||^p)^(1/p).  The window must span at least 1 s and
/// its step must divide 1 s.  Exact signals integrate with the midpoint rule
/// at the window step (exact for pulse trains); grid-backed signals use
/// composite trapezoid on their native nodes.
double stepanov_norm(const Signal& f, double p, const TimeGrid& window);

/// Stepanov almost-periodicity report.
struct StepanovReport {
  double p = 1.0;
  double norm = 0.0;
  APReport scan;                 ///< lift-metric period scan + density verdict
  double aap_threshold = 0.0;    ///< M(eps) for the asymptotic variant
};

/// Epsilon-period scan under the lift metric
///   d(t; tau) = (integral_0^1 ||f(t+s+tau) - f(t+s)||^p ds)^(1/p).
StepanovReport sp_ap_test(const Signal& f, double p, double eps, const PeriodScanConfig& cfg);

/// Asymptotic variant: tau counts as an eps-period when the lift metric stays
/// below eps from some threshold on; the threshold must fall in the first
/// half of the window.  Reports M(eps) = the largest accepted threshold.
StepanovReport sp_aap_test(const Signal& f, double p, double eps, const PeriodScanConfig& cfg);

/// Composition f(t, x(t)) checked end to end.
struct ComposeConfig {
  PeriodScanConfig scan;
  int k_points = 16;          ///< trajectory subsample size for hypothesis checks
  int lipschitz_pairs = 1000; ///< random pairs per window for the Lipschitz probe
  unsigned seed = 12345;
};

enum class CompositionMode { kAP, kAAP };

struct CompositionReport {
  StepanovExponents exponents;
  double conclusion_exponent = 0.0;   ///< S^q class asserted for the composition
  Verdict hyp_two_param = Verdict::kInconclusive;
  Verdict hyp_lipschitz = Verdict::kInconclusive;
  double lipschitz_worst_ratio = 0.0;
  Verdict hyp_decomposition = Verdict::kInconclusive;  ///< AAP mode only
  Verdict conclusion = Verdict::kInconclusive;
  StepanovReport composed;
  std::string note;
};

/// Verifies the composition hypotheses (two-parameter Stepanov almost
/// periodicity of f over the trajectory's sampled range, the declared
/// Lipschitz bound on random pairs) and then tests the composed signal in
/// S^q.  If a hypothesis fails, the conclusion is not asserted.
CompositionReport compose_and_verify(const VectorField& f, const SignalPtr& trajectory,
                                     const StepanovExponents& exponents,
                                     const LipschitzData& lipschitz, double eps,
                                     CompositionMode mode, const ComposeConfig& cfg);

}  // namespace apcauchy
