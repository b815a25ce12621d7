#include "apcauchy/time_grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace apcauchy {

TimeGrid::TimeGrid(double t_start, double t_end, double step)
    : t_start_(t_start), t_end_(t_end), step_(step) {
  if (!std::isfinite(t_start) || !std::isfinite(t_end) || !std::isfinite(step))
    throw std::invalid_argument("TimeGrid: non-finite bounds");
  if (t_end <= t_start) throw std::invalid_argument("TimeGrid: t_end must exceed t_start");
  if (step <= 0.0) throw std::invalid_argument("TimeGrid: step must be positive");
  const double span = t_end - t_start;
  const double steps = std::round(span / step);
  if (steps < 1.0 || std::abs(steps * step - span) > 1e-9 * std::max(1.0, span))
    throw std::invalid_argument("TimeGrid: step does not tile [t_start, t_end]");
  n_nodes_ = static_cast<std::size_t>(steps) + 1;
}

std::size_t TimeGrid::cell_index(double t) const {
  double x = (t - t_start_) / step_;
  auto i = static_cast<long>(std::floor(x));
  i = std::max(0L, std::min(i, static_cast<long>(n_nodes_) - 2));
  return static_cast<std::size_t>(i);
}

std::size_t TimeGrid::nodes_per_unit() const {
  const double per_unit = 1.0 / step_;
  const double rounded = std::round(per_unit);
  if (rounded < 1.0 || std::abs(rounded * step_ - 1.0) > 1e-9)
    throw std::invalid_argument("TimeGrid: step does not divide 1 s (required for unit-window integrals)");
  return static_cast<std::size_t>(rounded);
}

GridFunction::GridFunction(TimeGrid grid, Eigen::MatrixXd values)
    : grid_(grid), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.rows()) != grid_.node_count())
    throw std::invalid_argument("GridFunction: row count does not match the grid (" +
                                std::to_string(values_.rows()) + " rows, " +
                                std::to_string(grid_.node_count()) + " nodes)");
  if (values_.cols() < 1) throw std::invalid_argument("GridFunction: dimension must be positive");
  if (!values_.allFinite()) throw std::invalid_argument("GridFunction: values must be finite");
}

GridFunction GridFunction::sample(
    const TimeGrid& grid, int dim,
    const std::function<void(double, Eigen::Ref<Eigen::VectorXd>)>& fn) {
  Eigen::MatrixXd values(grid.node_count(), dim);
  Eigen::VectorXd buf(dim);
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    fn(grid.node(i), buf);
    values.row(i) = buf.transpose();
  }
  return GridFunction(grid, std::move(values));
}

Eigen::VectorXd GridFunction::eval(double t) const {
  if (!grid_.contains(t))
    throw std::out_of_range("GridFunction::eval: t outside the sample window");
  const std::size_t i = grid_.cell_index(t);
  const double w = (t - grid_.node(i)) / grid_.step();
  return ((1.0 - w) * values_.row(i) + w * values_.row(i + 1)).transpose();
}

double GridFunction::sup_norm() const { return values_.rowwise().norm().maxCoeff(); }

double GridFunction::interpolation_slack() const {
  if (values_.rows() < 3) return 0.0;
  double worst = 0.0;
  for (Eigen::Index i = 1; i + 1 < values_.rows(); ++i) {
    const double d2 =
        (values_.row(i + 1) - 2.0 * values_.row(i) + values_.row(i - 1)).norm();
    worst = std::max(worst, d2);
  }
  return worst / 8.0;
}

}  // namespace apcauchy
