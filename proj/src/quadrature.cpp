#include "apcauchy/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace apcauchy {

const QuadRule& gauss_legendre(int n) {
  static std::map<int, QuadRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: order out of range");

  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  QuadRule rule;
  rule.nodes = eig.eigenvalues();
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    const double v0 = eig.eigenvectors()(0, k);
    rule.weights(k) = 2.0 * v0 * v0;
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

QuadRule gauss_on(double a, double b, int n) {
  const QuadRule& base = gauss_legendre(n);
  QuadRule rule;
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  rule.nodes = (base.nodes.array() * half + mid).matrix();
  rule.weights = base.weights * half;
  return rule;
}

namespace {

/// Chebyshev-Gauss points on (0, 1), increasing; endpoints excluded so the
/// integrand factor g never needs evaluation at the singularity.
Eigen::VectorXd chebyshev_points(int n_nodes) {
  Eigen::VectorXd xi(n_nodes);
  for (int i = 0; i < n_nodes; ++i)
    xi(i) = 0.5 * (1.0 - std::cos(M_PI * (2.0 * i + 1.0) / (2.0 * n_nodes)));
  return xi;
}

/// Weights solving the moment equations sum_i w_i xi_i^j = m_j at the
/// reference points; exactness for shifted monomials up to degree n-1.
Eigen::VectorXd moment_weights(const Eigen::VectorXd& xi, const Eigen::VectorXd& moments) {
  const int n = static_cast<int>(xi.size());
  Eigen::MatrixXd vand(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) vand(j, i) = std::pow(xi(i), j);
  return vand.fullPivLu().solve(moments);
}

/// Moments m_j = integral_a^b ((s-a)/(b-a))^j s^(beta-1) ds for j < n.
/// Wide cells (b >= 2a) expand (s-a)^j binomially; the alternating terms are
/// then dominated by the leading one and long double absorbs the remaining
/// cancellation.  Narrow cells substitute s = b - (b-a)v and expand
/// (1 - (1-a/b)v)^(beta-1) as a series with positive coefficients, which is
/// cancellation free and converges geometrically at rate 1 - a/b < 1/2.
Eigen::VectorXd shifted_moments(double beta, double a, double b, int n) {
  Eigen::VectorXd m(n);
  const long double al = a;
  const long double bl = b;
  const long double dl = bl - al;
  const long double betal = beta;
  if (a == 0.0) {
    const long double hb = std::pow(bl, betal);
    for (int j = 0; j < n; ++j) m(j) = static_cast<double>(hb / (betal + j));
    return m;
  }
  if (bl >= 2.0L * al) {
    for (int j = 0; j < n; ++j) {
      long double sum = 0.0L;
      long double binom = 1.0L;  // C(j, i), updated in the loop
      for (int i = 0; i <= j; ++i) {
        const long double power_moment =
            (std::pow(bl, betal + i) - std::pow(al, betal + i)) / (betal + i);
        const long double sign = ((j - i) % 2 == 0) ? 1.0L : -1.0L;
        sum += binom * sign * std::pow(al, static_cast<long double>(j - i)) * power_moment;
        binom = binom * (j - i) / (i + 1);
      }
      m(j) = static_cast<double>(sum / std::pow(dl, static_cast<long double>(j)));
    }
    return m;
  }
  const long double x = dl / bl;  // in (0, 1/2)
  const long double front = std::pow(bl, betal - 1.0L) * dl;
  for (int j = 0; j < n; ++j) {
    long double ck = 1.0L;               // product of (l - beta)/l
    long double xk = 1.0L;               // x^k
    long double bk = 1.0L / (j + 1.0L);  // Beta(k+1, j+1)
    long double sum = 0.0L;
    for (int k = 0; k < 400; ++k) {
      const long double term = ck * xk * bk;
      sum += term;
      if (term < sum * 1e-20L) break;
      ck *= (k + 1.0L - betal) / (k + 1.0L);
      xk *= x;
      bk *= (k + 1.0L) / (k + j + 2.0L);
    }
    m(j) = static_cast<double>(front * sum);
  }
  return m;
}

}  // namespace

QuadRule singular_product_quadrature(double beta, double h, int n_nodes) {
  if (!(beta > 0.0) || beta > 1.0)
    throw std::invalid_argument("singular_product_quadrature: beta must lie in (0, 1]");
  if (h <= 0.0) throw std::invalid_argument("singular_product_quadrature: h must be positive");
  if (n_nodes < 2 || n_nodes > 16)
    throw std::invalid_argument("singular_product_quadrature: n_nodes must lie in [2, 16]");

  const Eigen::VectorXd xi = chebyshev_points(n_nodes);
  QuadRule rule;
  rule.nodes = xi * h;
  rule.weights = moment_weights(xi, shifted_moments(beta, 0.0, h, n_nodes));
  return rule;
}

QuadRule weighted_cell_rule(double beta, double a, double b, int n_nodes) {
  if (!(beta > 0.0) || beta > 1.0)
    throw std::invalid_argument("weighted_cell_rule: beta must lie in (0, 1]");
  if (a < 0.0 || b <= a) throw std::invalid_argument("weighted_cell_rule: need 0 <= a < b");
  if (n_nodes < 2 || n_nodes > 16)
    throw std::invalid_argument("weighted_cell_rule: n_nodes must lie in [2, 16]");

  // Mapped Gauss converges like psi^(-2n) with psi = m + sqrt(m^2 - 1) and
  // m = (b + a)/(b - a) the scaled distance to the singularity at s = 0.
  // Keep Gauss whenever that bound already beats double precision.
  const double m_required = std::cosh(std::log(1e17) / (2.0 * n_nodes));
  const bool gauss_ok = beta == 1.0 || (a > 0.0 && (b + a) / (b - a) >= m_required);
  if (gauss_ok) {
    QuadRule rule = gauss_on(a, b, n_nodes);
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i)
      rule.weights(i) *= std::pow(rule.nodes(i), beta - 1.0);
    return rule;
  }

  const Eigen::VectorXd xi = chebyshev_points(n_nodes);
  QuadRule rule;
  rule.nodes = (xi.array() * (b - a) + a).matrix();
  rule.weights = moment_weights(xi, shifted_moments(beta, a, b, n_nodes));
  return rule;
}

double SingularIntegralConfig::grading(double beta) const {
  return sigma > 0.0 ? sigma : std::max(1.0, 2.0 / beta);
}

void SingularIntegralConfig::validate(double beta) const {
  if (!(beta > 0.0) || beta > 1.0)
    throw std::invalid_argument("SingularIntegralConfig: beta must lie in (0, 1]");
  if (n_nodes < 4 || n_nodes > 16)
    throw std::invalid_argument("SingularIntegralConfig: n_nodes must lie in [4, 16]");
  if (graded_cells < 1) throw std::invalid_argument("SingularIntegralConfig: graded_cells >= 1");
  if (sigma != 0.0 && sigma < 1.0)
    throw std::invalid_argument("SingularIntegralConfig: grading exponent must be >= 1");
  if (h0 <= 0.0 || block_width <= 0.0)
    throw std::invalid_argument("SingularIntegralConfig: h0 and block_width must be positive");
}

std::vector<std::pair<double, double>> singular_mesh(double beta, double T,
                                                     const SingularIntegralConfig& cfg) {
  cfg.validate(beta);
  if (T <= 0.0) throw std::invalid_argument("singular_mesh: T must be positive");
  std::vector<std::pair<double, double>> cells;
  const double sg = cfg.grading(beta);
  const double head = std::min(cfg.h0, T);
  double prev = 0.0;
  for (int j = 1; j <= cfg.graded_cells; ++j) {
    const double next = head * std::pow(static_cast<double>(j) / cfg.graded_cells, sg);
    if (next > prev) cells.emplace_back(prev, next);
    prev = next;
  }
  if (T > head) {
    const int blocks = static_cast<int>(std::ceil((T - head) / cfg.block_width));
    for (int b = 0; b < blocks; ++b) {
      const double a = head + (T - head) * b / blocks;
      const double z = head + (T - head) * (b + 1) / blocks;
      cells.emplace_back(a, z);
    }
  }
  return cells;
}

double integrate_singular(const std::function<double(double)>& g, double beta, double T,
                          const SingularIntegralConfig& cfg) {
  const auto cells = singular_mesh(beta, T, cfg);
  double total = 0.0;
  for (const auto& [a, b] : cells) {
    const QuadRule rule = weighted_cell_rule(beta, a, b, cfg.n_nodes);
    for (int i = 0; i < rule.nodes.size(); ++i) total += rule.weights(i) * g(rule.nodes(i));
  }
  return total;
}

double integrate_smooth(const std::function<double(double)>& g, double a, double b, int n_nodes,
                        double block_width) {
  if (b <= a) return 0.0;
  const int blocks = std::max(1, static_cast<int>(std::ceil((b - a) / block_width)));
  double total = 0.0;
  for (int k = 0; k < blocks; ++k) {
    const double lo = a + (b - a) * k / blocks;
    const double hi = a + (b - a) * (k + 1) / blocks;
    const QuadRule rule = gauss_on(lo, hi, n_nodes);
    for (int i = 0; i < rule.nodes.size(); ++i) total += rule.weights(i) * g(rule.nodes(i));
  }
  return total;
}

}  // namespace apcauchy
