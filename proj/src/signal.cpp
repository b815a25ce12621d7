#include "apcauchy/signal.hpp"

#include <cmath>
#include <stdexcept>

namespace apcauchy {

GridFunction Signal::sample(const TimeGrid& grid) const {
  Eigen::MatrixXd values(grid.node_count(), dim());
  for (std::size_t i = 0; i < grid.node_count(); ++i)
    values.row(i) = eval(grid.node(i)).transpose();
  return GridFunction(grid, std::move(values));
}

Eigen::MatrixXd Signal::sample_midpoints(const TimeGrid& grid) const {
  const std::size_t cells = grid.node_count() - 1;
  Eigen::MatrixXd values(cells, dim());
  const double half = 0.5 * grid.step();
  for (std::size_t i = 0; i < cells; ++i)
    values.row(i) = eval(grid.node(i) + half).transpose();
  return values;
}

GridSignal::GridSignal(GridFunction values, double tau_ext, double ext_slack)
    : values_(std::move(values)), tau_ext_(tau_ext), ext_slack_(ext_slack) {
  if (tau_ext_ < 0.0) throw std::invalid_argument("GridSignal: extension period must be >= 0");
}

double GridSignal::t_min() const {
  return tau_ext_ > 0.0 ? -std::numeric_limits<double>::infinity()
                        : values_.grid().t_start();
}

Eigen::VectorXd GridSignal::eval(double t) const {
  const TimeGrid& g = values_.grid();
  if (t < g.t_start() - 1e-9) {
    if (tau_ext_ <= 0.0)
      throw std::out_of_range("GridSignal: t below the window and no extension period set");
    const double k = std::ceil((g.t_start() - t) / tau_ext_);
    t += k * tau_ext_;
    if (t > g.t_end() + 1e-9)
      throw std::out_of_range("GridSignal: extension period larger than the window");
  }
  return values_.eval(std::min(t, g.t_end()));
}

PulseTrainSignal::PulseTrainSignal(double period, double duty, double high)
    : period_(period), duty_(duty), high_(high) {
  if (period <= 0.0 || duty <= 0.0 || duty >= period)
    throw std::invalid_argument("PulseTrainSignal: need 0 < duty < period");
}

Eigen::VectorXd PulseTrainSignal::eval(double t) const {
  double phase = std::fmod(t, period_);
  if (phase < 0.0) phase += period_;
  Eigen::VectorXd out(1);
  out(0) = phase < duty_ ? high_ : 0.0;
  return out;
}

ExpDecaySignal::ExpDecaySignal(Eigen::VectorXd amplitude, double tau)
    : amplitude_(std::move(amplitude)), tau_(tau) {
  if (tau <= 0.0) throw std::invalid_argument("ExpDecaySignal: decay time must be positive");
}

Eigen::VectorXd ExpDecaySignal::eval(double t) const { return amplitude_ * std::exp(-t / tau_); }

SumSignal::SumSignal(SignalPtr a, SignalPtr b) : a_(std::move(a)), b_(std::move(b)) {
  if (!a_ || !b_) throw std::invalid_argument("SumSignal: null operand");
  if (a_->dim() != b_->dim()) throw std::invalid_argument("SumSignal: dimension mismatch");
}

ComposedSignal::ComposedSignal(VectorFieldPtr field, SignalPtr trajectory)
    : field_(std::move(field)), trajectory_(std::move(trajectory)) {
  if (!field_ || !trajectory_) throw std::invalid_argument("ComposedSignal: null operand");
}

}  // namespace apcauchy
