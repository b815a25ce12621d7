#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <memory>

#include "apcauchy/time_grid.hpp"
#include "apcauchy/trig_polynomial.hpp"

namespace apcauchy {

/// A vector-valued function of time, evaluatable on (part of) the real line.
///
/// Exact signals (trig polynomials, pulse trains, closed-form decays) can be
/// evaluated anywhere and refined arbitrarily; grid-backed signals are limited
/// by their sample window and interpolate linearly.
class Signal {
 public:
  virtual ~Signal() = default;

  virtual int dim() const = 0;
  virtual Eigen::VectorXd eval(double t) const = 0;

  /// True when eval carries no interpolation floor (closed form).
  virtual bool exact() const { return true; }

  virtual double t_min() const { return -std::numeric_limits<double>::infinity(); }
  virtual double t_max() const { return std::numeric_limits<double>::infinity(); }

  /// Samples the signal at the grid nodes.
  GridFunction sample(const TimeGrid& grid) const;

  /// Values at the per-cell midpoints t_i + step/2, one row per cell.
  Eigen::MatrixXd sample_midpoints(const TimeGrid& grid) const;
};

using SignalPtr = std::shared_ptr<const Signal>;

/// Trig-polynomial-backed signal; defined on all of R.
class TrigSignal final : public Signal {
 public:
  explicit TrigSignal(TrigPolynomial poly) : poly_(std::move(poly)) {}
  int dim() const override { return poly_.dim(); }
  Eigen::VectorXd eval(double t) const override { return poly_.eval(t); }
  const TrigPolynomial& poly() const { return poly_; }

 private:
  TrigPolynomial poly_;
};

/// Grid samples, optionally extended to the left of the window by a detected
/// near-period: for t below the window, eval uses t + k*tau_ext inside it.
/// The accuracy of that extension is the caller-supplied slack, carried along
/// for reporting.
class GridSignal final : public Signal {
 public:
  explicit GridSignal(GridFunction values, double tau_ext = 0.0, double ext_slack = 0.0);
  int dim() const override { return values_.dim(); }
  Eigen::VectorXd eval(double t) const override;
  bool exact() const override { return false; }
  double t_min() const override;
  double t_max() const override { return values_.grid().t_end(); }
  const GridFunction& data() const { return values_; }
  double extension_slack() const { return ext_slack_; }
  bool extended() const { return tau_ext_ > 0.0; }

 private:
  GridFunction values_;
  double tau_ext_;
  double ext_slack_;
};

/// Periodic pulse train: value `high` on [k*period, k*period + duty), else 0.
/// Scalar, exact and discontinuous.
class PulseTrainSignal final : public Signal {
 public:
  PulseTrainSignal(double period, double duty, double high = 1.0);
  int dim() const override { return 1; }
  Eigen::VectorXd eval(double t) const override;

 private:
  double period_, duty_, high_;
};

/// amplitude * exp(-t / tau) componentwise; defined for t >= 0 and extended
/// by its closed form to t < 0.
class ExpDecaySignal final : public Signal {
 public:
  ExpDecaySignal(Eigen::VectorXd amplitude, double tau);
  int dim() const override { return static_cast<int>(amplitude_.size()); }
  Eigen::VectorXd eval(double t) const override;

 private:
  Eigen::VectorXd amplitude_;
  double tau_;
};

/// Pointwise sum of two signals of equal dimension.
class SumSignal final : public Signal {
 public:
  SumSignal(SignalPtr a, SignalPtr b);
  int dim() const override { return a_->dim(); }
  Eigen::VectorXd eval(double t) const override { return a_->eval(t) + b_->eval(t); }
  bool exact() const override { return a_->exact() && b_->exact(); }
  double t_min() const override { return std::max(a_->t_min(), b_->t_min()); }
  double t_max() const override { return std::min(a_->t_max(), b_->t_max()); }

 private:
  SignalPtr a_, b_;
};

/// Closed-form signal defined by a callable; used for analytic test inputs.
class LambdaSignal final : public Signal {
 public:
  LambdaSignal(int dim, std::function<Eigen::VectorXd(double)> fn)
      : dim_(dim), fn_(std::move(fn)) {}
  int dim() const override { return dim_; }
  Eigen::VectorXd eval(double t) const override { return fn_(t); }

 private:
  int dim_;
  std::function<Eigen::VectorXd(double)> fn_;
};

/// Time-dependent vector field f(t, x); the building block for semilinear
/// right-hand sides.  Implementations are registered by name in the models
/// module so problems can reference them without serialized closures.
class VectorField {
 public:
  virtual ~VectorField() = default;
  virtual int dim() const = 0;
  virtual Eigen::VectorXd eval(double t, const Eigen::VectorXd& x) const = 0;

  /// Almost periodic part of t -> f(t, x), when known in closed form.
  virtual std::shared_ptr<const VectorField> ap_part() const { return nullptr; }
};

using VectorFieldPtr = std::shared_ptr<const VectorField>;

/// t -> f(t, x(t)) as a signal.
class ComposedSignal final : public Signal {
 public:
  ComposedSignal(VectorFieldPtr field, SignalPtr trajectory);
  int dim() const override { return field_->dim(); }
  Eigen::VectorXd eval(double t) const override {
    return field_->eval(t, trajectory_->eval(t));
  }
  bool exact() const override { return trajectory_->exact(); }
  double t_min() const override { return trajectory_->t_min(); }
  double t_max() const override { return trajectory_->t_max(); }

 private:
  VectorFieldPtr field_;
  SignalPtr trajectory_;
};

}  // namespace apcauchy
