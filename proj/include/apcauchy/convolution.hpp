#pragma once

#include <limits>
#include <vector>

#include "apcauchy/operator_family.hpp"
#include "apcauchy/signal.hpp"
#include "apcauchy/time_grid.hpp"

namespace apcauchy {

/// Controls for the convolution quadrature and history truncation.
struct QuadratureConfig {
  int n_b = 10;         ///< nodes per cell, 4..16
  double sigma = 0.0;   ///< graded-mesh exponent >= 1; 0 selects max(1, 2/beta)
  double h0 = 1.0;      ///< width of the graded singular region
  double T_tail = 0.0;  ///< history length, infinite case; 0 selects the default

  void validate() const;

  /// Same knobs in the vocabulary of the singular-integral helpers.
  SingularIntegralConfig singular() const;
};

/// Convolution values with a per-node quadrature error estimate (difference
/// against a rule with fewer nodes per cell) and, for the infinite case, the
/// history truncation bound ||f||_{S^p} * (envelope block-norm tail beyond
/// T_tail).
struct ConvolutionResult {
  GridFunction values;
  std::vector<double> error_estimate;
  double tail_bound = 0.0;

  double max_error() const;
};

/// H(t) = integral_0^t k(t-s) f(s) ds on the grid of f (which must start at
/// t = 0), with the scalar kernel k(t) = M e^{-ct} t^{beta-1} acting
/// componentwise.  The declared Stepanov exponent p of f fixes the conjugate
/// q' (1/p + 1/q' = 1); the kernel must satisfy q'(beta-1) > -1, otherwise
/// the singular block is not integrable against S^p data and the call throws.
ConvolutionResult finite_convolution(const KernelEnvelope& kernel, const GridFunction& f,
                                     const QuadratureConfig& cfg = {},
                                     double p = std::numeric_limits<double>::infinity());

/// Operator-valued variant: H(t) = integral_0^t T(t-s) f(s) ds.  The family
/// is applied state by state at the quadrature lags; its declared envelope
/// drives the integrability check.
ConvolutionResult finite_convolution(const OperatorFamily& family, const GridFunction& f,
                                     const QuadratureConfig& cfg = {},
                                     double p = std::numeric_limits<double>::infinity());

/// F(t) = integral_{-inf}^t k(t-s) f(s) ds, evaluated on out_grid as
/// integral_0^{T_tail} k(s) f(t-s) ds plus the reported tail bound.  f must be
/// evaluatable down to t_start - T_tail.  The default T_tail is the smallest
/// whole number of seconds making the analytic tail bound fall below
/// 1e-10 * M Gamma(beta) c^{-beta}.
ConvolutionResult infinite_convolution(const KernelEnvelope& kernel, const Signal& f, double p,
                                       const TimeGrid& out_grid,
                                       const QuadratureConfig& cfg = {});
ConvolutionResult infinite_convolution(const OperatorFamily& family, const Signal& f, double p,
                                       const TimeGrid& out_grid,
                                       const QuadratureConfig& cfg = {});

/// Default history length for an envelope: the smallest integer K >= 1 with
/// M e^{-cK} K^{beta-1} / (1 - e^{-c}) < 1e-10 * M Gamma(beta) c^{-beta}.
double default_tail_length(const KernelEnvelope& env);

}  // namespace apcauchy
