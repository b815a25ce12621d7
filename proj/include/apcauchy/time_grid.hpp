#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>

namespace apcauchy {

/// Uniform time grid on [t_start, t_end].
///
/// The step must tile the span: round((t_end - t_start)/step) steps of width
/// `step` have to reproduce the span within 1e-9 (absolute, relative for long
/// windows).  Construction throws std::invalid_argument otherwise.
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double t_start, double t_end, double step);

  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }
  double step() const { return step_; }
  double length() const { return t_end_ - t_start_; }
  std::size_t node_count() const { return n_nodes_; }
  double node(std::size_t i) const { return t_start_ + static_cast<double>(i) * step_; }
  bool contains(double t, double slack = 1e-9) const {
    return t >= t_start_ - slack && t <= t_end_ + slack;
  }

  /// Index of the largest node <= t, clamped to [0, node_count()-2].
  std::size_t cell_index(double t) const;

  /// Grid nodes per unit time.  Throws unless step divides 1 s within 1e-9.
  std::size_t nodes_per_unit() const;

 private:
  double t_start_ = 0.0;
  double t_end_ = 1.0;
  double step_ = 1.0;
  std::size_t n_nodes_ = 2;
};

/// Vector-valued samples over a TimeGrid; row i holds the value at node i.
///
/// Evaluation between nodes is linear interpolation.  All entries must be
/// finite; construction rejects NaN/inf and shape mismatches.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(TimeGrid grid, Eigen::MatrixXd values);

  static GridFunction sample(const TimeGrid& grid, int dim,
                             const std::function<void(double, Eigen::Ref<Eigen::VectorXd>)>& fn);

  const TimeGrid& grid() const { return grid_; }
  int dim() const { return static_cast<int>(values_.cols()); }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }

  Eigen::VectorXd at_node(std::size_t i) const { return values_.row(i).transpose(); }

  /// Linear interpolation; throws std::out_of_range outside the window.
  Eigen::VectorXd eval(double t) const;

  /// max over nodes of the Euclidean norm.
  double sup_norm() const;

  /// Upper bound for the linear-interpolation error, estimated from second
  /// differences: max_i ||v[i+1] - 2 v[i] + v[i-1]|| / 8.
  double interpolation_slack() const;

 private:
  TimeGrid grid_;
  Eigen::MatrixXd values_;
};

}  // namespace apcauchy
