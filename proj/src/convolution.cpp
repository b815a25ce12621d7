#include "apcauchy/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "apcauchy/parallel.hpp"
#include "apcauchy/stepanov.hpp"

namespace apcauchy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double envelope_block_tail(const KernelEnvelope& env, int K) {
  return env.M * std::exp(-env.c * K) * std::pow(static_cast<double>(K), env.beta - 1.0) /
         (1.0 - std::exp(-env.c));
}

void require_kernel_integrable(const KernelEnvelope& env, double p, const char* who) {
  env.validate();
  if (!std::isinf(p) && !(p >= 1.0))
    throw std::invalid_argument(std::string(who) + ": Stepanov exponent p must be >= 1");
  const double q_conj = conjugate_exponent(p);
  const bool divergent = std::isinf(q_conj) ? env.beta < 1.0 : q_conj * (env.beta - 1.0) <= -1.0;
  if (divergent)
    throw std::invalid_argument(
        std::string(who) +
        ": kernel not integrable against S^p data (need q'(beta-1) > -1, 1/p + 1/q' = 1)");
}

/// Flattened quadrature rule for integral_0^T k(s) f(t-s) ds: lags, weights,
/// and per-lag kernel factors.  For the scalar kernel every cell uses
/// weighted_cell_rule, so the s^{beta-1} weight lives in the quadrature
/// weights and the factor is just M e^{-cs}.  Operator families are smooth at
/// s = 0+, so all cells use Gauss nodes and the factor is deferred to
/// family.apply.
struct LagRule {
  Eigen::VectorXd lag;
  Eigen::VectorXd weight;
  Eigen::VectorXd scalar_factor;  // empty in the operator path
};

LagRule build_lag_rule(const KernelEnvelope& env, const OperatorFamily* family, double T,
                       int n_nodes, SingularIntegralConfig scfg) {
  scfg.n_nodes = n_nodes;
  const auto cells = singular_mesh(env.beta, T, scfg);
  std::vector<double> lag, weight, factor;
  for (const auto& [a, b] : cells) {
    if (family == nullptr) {
      const QuadRule rule = weighted_cell_rule(env.beta, a, b, n_nodes);
      for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
        lag.push_back(rule.nodes(i));
        weight.push_back(rule.weights(i));
        factor.push_back(env.M * std::exp(-env.c * rule.nodes(i)));
      }
      continue;
    }
    const QuadRule rule = gauss_on(a, b, n_nodes);
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
      lag.push_back(rule.nodes(i));
      weight.push_back(rule.weights(i));
    }
  }
  LagRule out;
  out.lag = Eigen::Map<Eigen::VectorXd>(lag.data(), static_cast<Eigen::Index>(lag.size()));
  out.weight =
      Eigen::Map<Eigen::VectorXd>(weight.data(), static_cast<Eigen::Index>(weight.size()));
  if (family == nullptr)
    out.scalar_factor =
        Eigen::Map<Eigen::VectorXd>(factor.data(), static_cast<Eigen::Index>(factor.size()));
  return out;
}

Eigen::VectorXd accumulate(const LagRule& rule, const OperatorFamily* family, double t,
                           const std::function<Eigen::VectorXd(double)>& f, int dim) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index j = 0; j < rule.lag.size(); ++j) {
    const Eigen::VectorXd fval = f(t - rule.lag(j));
    if (family != nullptr)
      acc += rule.weight(j) * family->apply(rule.lag(j), fval);
    else
      acc += rule.weight(j) * rule.scalar_factor(j) * fval;
  }
  return acc;
}

int comparison_nodes(int n_b) {
  const int half = std::max(4, n_b / 2);
  return half == n_b ? std::min(16, n_b + 2) : half;
}

ConvolutionResult finite_impl(const KernelEnvelope& env, const OperatorFamily* family,
                              const GridFunction& f, const QuadratureConfig& cfg, double p) {
  cfg.validate();
  require_kernel_integrable(env, p, "finite_convolution");
  if (std::abs(f.grid().t_start()) > 1e-12)
    throw std::invalid_argument("finite_convolution: f must be sampled on [0, T]");
  if (!f.values().allFinite())
    throw std::invalid_argument("finite_convolution: f is not S^p-bounded on its window");
  if (family != nullptr && family->dim() != f.dim())
    throw std::invalid_argument("finite_convolution: family and f dimensions differ");

  const TimeGrid& grid = f.grid();
  const int dim = f.dim();
  const double t_end = grid.t_end();
  const auto f_eval = [&](double s) {
    return f.eval(std::clamp(s, 0.0, t_end));
  };

  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.node_count()),
                                                 dim);
  std::vector<double> error(grid.node_count(), 0.0);
  const int n_cmp = comparison_nodes(cfg.n_b);
  parallel_for(grid.node_count(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double t = grid.node(i);
      if (t <= 0.0) continue;
      const LagRule fine = build_lag_rule(env, family, t, cfg.n_b, cfg.singular());
      const LagRule coarse = build_lag_rule(env, family, t, n_cmp, cfg.singular());
      const Eigen::VectorXd v = accumulate(fine, family, t, f_eval, dim);
      const Eigen::VectorXd w = accumulate(coarse, family, t, f_eval, dim);
      values.row(static_cast<Eigen::Index>(i)) = v.transpose();
      error[i] = (v - w).norm();
    }
  });

  ConvolutionResult result;
  result.values = GridFunction(grid, std::move(values));
  result.error_estimate = std::move(error);
  result.tail_bound = 0.0;
  return result;
}

double signal_sp_norm(const Signal& f, double p, double lo, double hi) {
  if (std::isinf(p)) {
    const int n = std::max(64, static_cast<int>(std::ceil((hi - lo) / 0.01)));
    double sup = 0.0;
    for (int i = 0; i <= n; ++i) sup = std::max(sup, f.eval(lo + (hi - lo) * i / n).norm());
    return sup;
  }
  const int n = std::max(64, static_cast<int>(std::ceil((hi - lo) / 0.01)));
  return stepanov_norm(f, p, TimeGrid(lo, hi, (hi - lo) / n));
}

ConvolutionResult infinite_impl(const KernelEnvelope& env, const OperatorFamily* family,
                                const Signal& f, double p, const TimeGrid& out_grid,
                                const QuadratureConfig& cfg) {
  cfg.validate();
  require_kernel_integrable(env, p, "infinite_convolution");
  if (family != nullptr && family->dim() != f.dim())
    throw std::invalid_argument("infinite_convolution: family and f dimensions differ");

  const double T_tail = cfg.T_tail > 0.0 ? cfg.T_tail : default_tail_length(env);
  if (T_tail < 1.0)
    throw std::invalid_argument("infinite_convolution: T_tail must be at least 1 s");
  const double hist_lo = out_grid.t_start() - T_tail;
  if (f.t_min() > hist_lo + 1e-9 || f.t_max() < out_grid.t_end() - 1e-9)
    throw std::invalid_argument(
        "infinite_convolution: f does not cover the history window "
        "[t_start - T_tail, t_end]");

  const int dim = f.dim();
  const int n_cmp = comparison_nodes(cfg.n_b);
  const LagRule fine = build_lag_rule(env, family, T_tail, cfg.n_b, cfg.singular());
  const LagRule coarse = build_lag_rule(env, family, T_tail, n_cmp, cfg.singular());
  const auto f_eval = [&](double s) { return f.eval(s); };

  Eigen::MatrixXd values =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out_grid.node_count()), dim);
  std::vector<double> error(out_grid.node_count(), 0.0);
  parallel_for(out_grid.node_count(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double t = out_grid.node(i);
      const Eigen::VectorXd v = accumulate(fine, family, t, f_eval, dim);
      const Eigen::VectorXd w = accumulate(coarse, family, t, f_eval, dim);
      values.row(static_cast<Eigen::Index>(i)) = v.transpose();
      error[i] = (v - w).norm();
    }
  });

  ConvolutionResult result;
  result.values = GridFunction(out_grid, std::move(values));
  result.error_estimate = std::move(error);
  const int K = std::max(1, static_cast<int>(std::floor(T_tail + 1e-9)));
  result.tail_bound = signal_sp_norm(f, p, hist_lo, out_grid.t_end()) * envelope_block_tail(env, K);
  return result;
}

}  // namespace

void QuadratureConfig::validate() const {
  if (n_b < 4 || n_b > 16)
    throw std::invalid_argument("QuadratureConfig: n_b must lie in [4, 16]");
  if (sigma != 0.0 && sigma < 1.0)
    throw std::invalid_argument("QuadratureConfig: grading exponent must be >= 1");
  if (!(h0 > 0.0)) throw std::invalid_argument("QuadratureConfig: h0 must be positive");
  if (T_tail < 0.0) throw std::invalid_argument("QuadratureConfig: T_tail must be non-negative");
}

SingularIntegralConfig QuadratureConfig::singular() const {
  SingularIntegralConfig scfg;
  scfg.n_nodes = n_b;
  scfg.sigma = sigma;
  scfg.h0 = h0;
  scfg.block_width = 1.0;
  return scfg;
}

double ConvolutionResult::max_error() const {
  double worst = 0.0;
  for (double e : error_estimate) worst = std::max(worst, e);
  return worst;
}

ConvolutionResult finite_convolution(const KernelEnvelope& kernel, const GridFunction& f,
                                     const QuadratureConfig& cfg, double p) {
  return finite_impl(kernel, nullptr, f, cfg, p);
}

ConvolutionResult finite_convolution(const OperatorFamily& family, const GridFunction& f,
                                     const QuadratureConfig& cfg, double p) {
  return finite_impl(family.envelope(), &family, f, cfg, p);
}

ConvolutionResult infinite_convolution(const KernelEnvelope& kernel, const Signal& f, double p,
                                       const TimeGrid& out_grid, const QuadratureConfig& cfg) {
  return infinite_impl(kernel, nullptr, f, p, out_grid, cfg);
}

ConvolutionResult infinite_convolution(const OperatorFamily& family, const Signal& f, double p,
                                       const TimeGrid& out_grid, const QuadratureConfig& cfg) {
  return infinite_impl(family.envelope(), &family, f, p, out_grid, cfg);
}

double default_tail_length(const KernelEnvelope& env) {
  env.validate();
  const double target = 1e-10 * env.M * std::tgamma(env.beta) * std::pow(env.c, -env.beta);
  for (int K = 1; K <= 2000000; ++K) {
    if (envelope_block_tail(env, K) < target) return static_cast<double>(K);
  }
  throw std::runtime_error("default_tail_length: decay too slow for a finite history");
}

}  // namespace apcauchy
