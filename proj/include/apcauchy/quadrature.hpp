#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace apcauchy {

/// Nodes/weights of a quadrature rule on an explicit interval.
struct QuadRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Golub-Welsch, cached per n).
const QuadRule& gauss_legendre(int n);

/// Gauss-Legendre rule mapped onto [a, b].
QuadRule gauss_on(double a, double b, int n);

/// Product rule for the weakly singular integral
///    integral_0^h g(s) s^(beta-1) ds  ~=  sum_i w_i g(x_i)
/// with beta in (0, 1].  The interpolating polynomial of degree n_nodes-1 at
/// Chebyshev points is integrated against the weight exactly, using the
/// moments integral_0^h s^(beta-1+j) ds = h^(beta+j)/(beta+j).
QuadRule singular_product_quadrature(double beta, double h, int n_nodes);

/// Rule for integral_a^b g(s) s^(beta-1) ds with the weight folded into the
/// weights, so callers evaluate only the smooth factor g.  Cells whose
/// endpoint ratio b/a keeps the singularity at s = 0 well separated use
/// mapped Gauss; cells close to the singularity use exact moment equations
/// for the shifted monomials ((s-a)/(b-a))^j, which stay accurate for every
/// beta in (0, 1] no matter how wide the cell is.
QuadRule weighted_cell_rule(double beta, double a, double b, int n_nodes);

/// Composite scheme for integral_0^T g(s) s^(beta-1) ds: a graded mesh
/// h0*(j/J)^sigma covers the singular region, each of its cells is handled by
/// weighted_cell_rule, and [h0, T] is covered by uniform Gauss blocks (also
/// via weighted_cell_rule, which degrades to plain Gauss away from 0).
struct SingularIntegralConfig {
  int n_nodes = 10;      ///< points per cell; 4..16
  int graded_cells = 8;  ///< J >= 1
  double sigma = 0.0;    ///< grading exponent; 0 selects max(1, 2/beta)
  double h0 = 1.0;       ///< width of the graded region
  double block_width = 1.0;

  double grading(double beta) const;
  void validate(double beta) const;
};

/// Cell decomposition of [0, T] described above.
std::vector<std::pair<double, double>> singular_mesh(double beta, double T,
                                                     const SingularIntegralConfig& cfg);

double integrate_singular(const std::function<double(double)>& g, double beta, double T,
                          const SingularIntegralConfig& cfg = {});

/// Plain composite Gauss of a smooth integrand over [a, b].
double integrate_smooth(const std::function<double(double)>& g, double a, double b,
                        int n_nodes = 12, double block_width = 1.0);

}  // namespace apcauchy
