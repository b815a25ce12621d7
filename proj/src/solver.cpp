#include "apcauchy/solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <stdexcept>

#include "apcauchy/parallel.hpp"

namespace apcauchy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Picard sweep engine.
//
// With the modal factorization T(t) = out diag(e^{-r t}) in, the convolution
// of the mode data y(s) = (in f(s, u(s)))_m obeys, per mode,
//   v(t_i) = e^{-r h} v(t_{i-1}) + int_0^h e^{-r s} y(t_i - s) ds,
// and the cell integral is exact for y linear on the cell:
//   int_0^h e^{-r s} y(t_i - s) ds = h (C_a(r h) y_i + C_b(r h) y_{i-1}),
//   C_a(z) = (z - 1 + e^{-z})/z^2,  C_b(z) = (1 - (1+z) e^{-z})/z^2.
// One sweep therefore costs O(nodes x modes), and the only discretization
// error is the piecewise-linear representation of y, O(h^2 ||y''|| / 8) per
// unit of kernel mass.  Families without a modal factorization fall back to
// direct finite_convolution per sweep.
// ---------------------------------------------------------------------------

Complex conv_coef_a(Complex z) {
  if (std::abs(z) >= 1e-3) return (z - 1.0 + std::exp(-z)) / (z * z);
  Complex sum(0.0, 0.0), zp(1.0, 0.0);
  double fact = 1.0;
  for (int k = 0; k <= 10; ++k) {
    sum += zp / (fact * (k + 1.0) * (k + 2.0));
    zp *= -z;
    fact *= k + 1.0;
  }
  return sum;
}

Complex conv_coef_b(Complex z) {
  if (std::abs(z) >= 1e-3) return (1.0 - (1.0 + z) * std::exp(-z)) / (z * z);
  Complex sum(0.0, 0.0), zp(1.0, 0.0);
  double fact = 1.0;
  for (int k = 0; k <= 10; ++k) {
    sum += zp / (fact * (k + 2.0));
    zp *= -z;
    fact *= k + 1.0;
  }
  return sum;
}

struct ModalEngine {
  bool modal = false;
  Eigen::MatrixXcd in;                    // modes x d
  Eigen::MatrixXcd out;                   // d x modes
  Eigen::RowVectorXcd decay, ca, cb;      // per-mode recursion coefficients
};

ModalEngine make_engine(const OperatorFamily& family, double h) {
  ModalEngine engine;
  engine.modal = family.has_modal();
  if (!engine.modal) return engine;
  engine.in = family.modal_in();
  engine.out = family.modal_out();
  const Eigen::VectorXcd& rates = family.modal_rates();
  const Eigen::Index m = rates.size();
  engine.decay.resize(m);
  engine.ca.resize(m);
  engine.cb.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Complex z = rates(k) * h;
    engine.decay(k) = std::exp(-z);
    engine.ca(k) = h * conv_coef_a(z);
    engine.cb(k) = h * conv_coef_b(z);
  }
  return engine;
}

/// One application of the convolution map to the iterate U (nodes x d) on the
/// internal grid; homog, when present, adds the T(t) u0 term.  f_sup, when
/// requested, receives max_i ||f(t_i, u_i)||.
Eigen::MatrixXd apply_map(const SemilinearProblem& problem, const TimeGrid& grid,
                          const ModalEngine& engine, const Eigen::MatrixXd& U,
                          const Eigen::MatrixXd* homog, double* f_sup) {
  const std::size_t n = grid.node_count();
  const int d = problem.field->dim();
  Eigen::MatrixXd F(static_cast<Eigen::Index>(n), d);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const Eigen::Index row = static_cast<Eigen::Index>(i);
      F.row(row) = problem.field->eval(grid.node(i), U.row(row).transpose()).transpose();
    }
  });
  if (f_sup != nullptr) *f_sup = F.rowwise().norm().maxCoeff();

  Eigen::MatrixXd next;
  if (engine.modal) {
    const Eigen::MatrixXcd Y = F.cast<Complex>() * engine.in.transpose();  // nodes x modes
    Eigen::MatrixXcd V(Y.rows(), Y.cols());
    if (Y.rows() > 0) V.row(0).setZero();
    for (Eigen::Index i = 1; i < Y.rows(); ++i)
      V.row(i) = V.row(i - 1).cwiseProduct(engine.decay) + Y.row(i).cwiseProduct(engine.ca) +
                 Y.row(i - 1).cwiseProduct(engine.cb);
    next = (V * engine.out.transpose()).real();
  } else {
    const TimeGrid shifted(0.0, grid.length(), grid.step());
    const ConvolutionResult conv =
        finite_convolution(*problem.family, GridFunction(shifted, F), problem.quadrature);
    next = conv.values.values();
  }
  if (homog != nullptr) next += *homog;
  return next;
}

struct IterationSpace {
  TimeGrid grid;               // internal grid; prepends the AP warm-up margin
  std::size_t report_offset;   // index of the window start within the grid
  double warmup = 0.0;
};

IterationSpace iteration_space(const SemilinearProblem& problem) {
  if (problem.mode == SolveMode::kDFP) return {problem.window, 0, 0.0};
  const KernelEnvelope& env = problem.family->envelope();
  const double h = problem.window.step();
  const double t_hist = default_tail_length(env) + 5.0 / env.c;
  const auto n_ext = static_cast<std::size_t>(std::ceil(t_hist / h - 1e-9));
  const TimeGrid grid(problem.window.t_start() - static_cast<double>(n_ext) * h,
                      problem.window.t_end(), h);
  return {grid, n_ext, static_cast<double>(n_ext) * h};
}

double window_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::size_t offset) {
  const Eigen::Index rows = a.rows() - static_cast<Eigen::Index>(offset);
  return (a.bottomRows(rows) - b.bottomRows(rows)).rowwise().norm().maxCoeff();
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  const double ratio = std::log(hi / lo);
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = lo * std::exp(ratio * i / (n - 1.0));
  return out;
}

// ---------------------------------------------------------------------------
// Diagnostics attached to a finished run.
// ---------------------------------------------------------------------------

std::optional<PeriodScanConfig> diagnostic_scan(const TimeGrid& window) {
  const double len = window.length();
  const double h = window.step();
  if (len < 12.0) return std::nullopt;
  double scan_len = std::min(30.0, std::floor(len / 3.0));
  scan_len = std::round(scan_len / h) * h;
  const double tau_max = std::floor((len - scan_len - 1.0) / h) * h;
  if (tau_max < 10.0 * h) return std::nullopt;
  PeriodScanConfig cfg;
  cfg.window = TimeGrid(window.t_start(), window.t_start() + scan_len, h);
  cfg.tau_step = std::max(h, 0.01);
  cfg.tau_max = tau_max;
  return cfg;
}

void attach_diagnostics(SolveResult& result, const SemilinearProblem& problem, double eps) {
  const auto cfg = diagnostic_scan(result.u.grid());
  if (!cfg) {
    result.note += "window too short for a period-scan diagnostic; ";
    return;
  }
  const GridSignal signal(result.u);
  try {
    if (problem.mode == SolveMode::kAP)
      result.ap_report = ap_test(signal, eps, *cfg);
    else
      result.aap_report = sp_aap_test(signal, 1.0, eps, *cfg);
  } catch (const std::exception& e) {
    result.note += std::string("diagnostic scan failed: ") + e.what() + "; ";
  }
}

// ---------------------------------------------------------------------------
// Iteration driver shared by both modes and the verification rerun.
// ---------------------------------------------------------------------------

struct RunOptions {
  double tol = 1e-8;
  int max_iter = 200;
  double diag_eps = 0.05;
  bool attach = true;
  bool ratio_guard = true;
  const Eigen::MatrixXd* init_override = nullptr;
};

Eigen::MatrixXd dfp_homogeneous(const SemilinearProblem& problem, const TimeGrid& grid) {
  const std::size_t n = grid.node_count();
  Eigen::MatrixXd homog(static_cast<Eigen::Index>(n), problem.family->dim());
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      homog.row(static_cast<Eigen::Index>(i)) =
          problem.family->apply(grid.node(i), *problem.u0).transpose();
  });
  return homog;
}

SolveResult run_iteration(const SemilinearProblem& problem, const RunOptions& opt, double rho,
                          bool certified, const char* who) {
  const IterationSpace space = iteration_space(problem);
  const ModalEngine engine = make_engine(*problem.family, space.grid.step());
  const std::size_t n = space.grid.node_count();
  const int d = problem.field->dim();

  Eigen::MatrixXd homog;
  const Eigen::MatrixXd* homog_ptr = nullptr;
  if (problem.mode == SolveMode::kDFP) {
    homog = dfp_homogeneous(problem, space.grid);
    homog_ptr = &homog;
  }

  Eigen::MatrixXd U;
  if (opt.init_override != nullptr) {
    if (opt.init_override->rows() != static_cast<Eigen::Index>(n) ||
        opt.init_override->cols() != d)
      throw std::invalid_argument(std::string(who) + ": initial iterate shape mismatch");
    U = *opt.init_override;
  } else {
    U = problem.mode == SolveMode::kDFP ? homog
                                        : Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), d);
  }

  SolveResult result;
  result.tol = opt.tol;
  result.max_iter = opt.max_iter;
  result.rho = rho;
  result.certified = certified;

  bool converged = false;
  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    Eigen::MatrixXd next = apply_map(problem, space.grid, engine, U, homog_ptr, nullptr);
    const double diff = window_diff(next, U, space.report_offset);
    result.diffs.push_back(diff);
    result.iterations = iter;
    U = std::move(next);
    if (diff < opt.tol) {
      converged = true;
      break;
    }
  }

  if (!converged) {
    double worst_ratio = 0.0;
    const std::size_t k = result.diffs.size();
    for (std::size_t i = (k > 5 ? k - 5 : 1); i < k; ++i)
      if (result.diffs[i - 1] > 1e-300)
        worst_ratio = std::max(worst_ratio, result.diffs[i] / result.diffs[i - 1]);
    if (opt.ratio_guard && certified && rho < 1.0 && worst_ratio > rho + 0.05)
      throw std::runtime_error(std::string(who) +
                               ": contraction violated numerically (measured diff ratio " +
                               std::to_string(worst_ratio) + " exceeds certificate rho " +
                               std::to_string(rho) + " + 0.05)");
    result.note += "tolerance not reached within max_iter; ";
  }

  // Residual sweep: one more application of the map against the final iterate.
  double f_sup = 0.0;
  const Eigen::MatrixXd mapped = apply_map(problem, space.grid, engine, U, homog_ptr, &f_sup);
  result.residual = window_diff(mapped, U, space.report_offset);

  const KernelEnvelope& env = problem.family->envelope();
  if (problem.mode == SolveMode::kAP)
    result.history_truncation = std::exp(-env.c * space.warmup) * env.M *
                                std::tgamma(env.beta) * std::pow(env.c, -env.beta) * f_sup;

  result.u_extended = GridFunction(space.grid, U);
  const Eigen::Index report_rows =
      static_cast<Eigen::Index>(n) - static_cast<Eigen::Index>(space.report_offset);
  result.u = GridFunction(problem.window, U.bottomRows(report_rows));

  if (opt.attach) attach_diagnostics(result, problem, opt.diag_eps);
  return result;
}

double lipschitz_sup(const LipschitzData& lip) {
  return lip.kind == LipschitzData::Kind::kConstant ? lip.constant
                                                    : lip.samples.values().maxCoeff();
}

}  // namespace

void SemilinearProblem::validate() const {
  if (!family) throw std::invalid_argument("SemilinearProblem: operator family is required");
  if (!field) throw std::invalid_argument("SemilinearProblem: nonlinearity f is required");
  if (field->dim() != family->dim())
    throw std::invalid_argument("SemilinearProblem: family and nonlinearity dimensions differ");
  if (forcing && forcing->dim() != field->dim())
    throw std::invalid_argument("SemilinearProblem: forcing dimension differs from f");
  if (window.node_count() < 2)
    throw std::invalid_argument("SemilinearProblem: window needs at least two nodes");
  lipschitz.validate();
  quadrature.validate();
  if (exponents) {
    if (!(exponents->p >= 1.0))
      throw std::invalid_argument("SemilinearProblem: Stepanov exponent p must be >= 1");
  }
  if (mode == SolveMode::kAP && u0.has_value())
    throw std::invalid_argument("SemilinearProblem: AP mode forbids an initial state");
  if (mode == SolveMode::kDFP) {
    if (!u0.has_value())
      throw std::invalid_argument("SemilinearProblem: DFP mode requires an initial state");
    if (u0->size() != family->dim())
      throw std::invalid_argument("SemilinearProblem: u0 dimension differs from the family");
    if (std::abs(window.t_start()) > 1e-12)
      throw std::invalid_argument("SemilinearProblem: DFP window must start at t = 0");
  }
}

bool ContractionReport::certified() const {
  if (rho < 1.0 && rho >= 0.0) return true;
  for (double m : m_n)
    if (m < 1.0) return true;
  return false;
}

double compute_Mn(const LipschitzData& lipschitz, double M, double c, double beta, int n,
                  std::uint64_t seed) {
  if (!(M > 0.0) || !(c > 0.0))
    throw std::invalid_argument("compute_Mn: M and c must be positive");
  if (!(beta > 0.0) || beta > 1.0)
    throw std::invalid_argument("compute_Mn: beta must lie in (0, 1]");
  if (n < 1) throw std::invalid_argument("compute_Mn: n must be at least 1");
  lipschitz.validate();

  if (lipschitz.kind == LipschitzData::Kind::kConstant)
    return std::pow(M * lipschitz.constant * std::tgamma(beta) * std::pow(c, -beta),
                    static_cast<double>(n));

  const TimeGrid& lgrid = lipschitz.samples.grid();
  const double t_hi = std::min(50.0 / c, lgrid.t_end());
  if (!(t_hi > 0.0))
    throw std::invalid_argument("compute_Mn: L_f sample window is empty");
  const auto L = [&](double s) {
    return lipschitz.eval(std::clamp(s, lgrid.t_start(), lgrid.t_end()));
  };

  if (n <= 3) {
    // Nested quadrature of J_m(t) = int_0^t M e^{-cs} s^{beta-1} L(t-s)
    // J_{m-1}(t-s) ds with J_0 = 1; M_n = sup_t J_n(t) over a dense grid.
    const int grid_n = 4000;
    const double step = t_hi / grid_n;
    Eigen::VectorXd prev = Eigen::VectorXd::Ones(grid_n + 1);
    SingularIntegralConfig scfg;
    const auto prev_eval = [&](double t) {
      const double x = std::clamp(t / step, 0.0, static_cast<double>(grid_n));
      const int i = std::min(grid_n - 1, static_cast<int>(x));
      const double frac = x - i;
      return prev(i) * (1.0 - frac) + prev(i + 1) * frac;
    };
    for (int level = 1; level <= n; ++level) {
      Eigen::VectorXd cur(grid_n + 1);
      cur(0) = 0.0;
      parallel_for(static_cast<std::size_t>(grid_n), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          const double t = static_cast<double>(i + 1) * step;
          cur(static_cast<Eigen::Index>(i + 1)) = integrate_singular(
              [&](double s) { return M * std::exp(-c * s) * L(t - s) * prev_eval(t - s); },
              beta, t, scfg);
        }
      });
      prev = std::move(cur);
    }
    return prev.maxCoeff();
  }

  // Monte Carlo with Gamma(beta, 1/c) gaps:
  //   M_n(t) = (M Gamma(beta) c^{-beta})^n E[ prod_j L(t - S_j) 1{S_n <= t} ].
  const int t_points = 24;
  const int n_samples = 40000;
  std::mt19937_64 rng(seed + 1000003ull * static_cast<unsigned long long>(n));
  std::gamma_distribution<double> gap(beta, 1.0 / c);
  const double pref = std::pow(M * std::tgamma(beta) * std::pow(c, -beta),
                               static_cast<double>(n));
  double best = 0.0, best_ci = 0.0;
  for (double t : log_spaced(t_hi / 50.0, t_hi, t_points)) {
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < n_samples; ++s) {
      double partial = 0.0, prod = 1.0;
      for (int j = 0; j < n; ++j) {
        partial += gap(rng);
        if (partial > t) {
          prod = 0.0;
          break;
        }
        prod *= L(t - partial);
      }
      sum += prod;
      sumsq += prod * prod;
    }
    const double mean = sum / n_samples;
    const double var = std::max(0.0, (sumsq - n_samples * mean * mean) / (n_samples - 1.0));
    const double ci = 1.96 * std::sqrt(var / n_samples);
    if (pref * mean > best) {
      best = pref * mean;
      best_ci = pref * ci;
    }
  }
  if (best > 0.0 && best_ci > 0.1 * best)
    throw std::runtime_error(
        "compute_Mn: Monte Carlo confidence interval exceeds 10% of the estimate; increase "
        "samples");
  return best;
}

ContractionReport contraction_report(const SemilinearProblem& problem, int n_max) {
  problem.validate();
  if (n_max < 1) throw std::invalid_argument("contraction_report: n_max must be at least 1");
  const KernelEnvelope& env = problem.family->envelope();
  env.validate();
  const LipschitzData& lip = problem.lipschitz;

  ContractionReport rep;
  rep.threshold = std::pow(env.c, env.beta) / (env.M * std::tgamma(env.beta));
  rep.lipschitz_scale = lipschitz_sup(lip);
  rep.q_conj = problem.exponents ? problem.exponents->q_conjugate() : kInf;
  rep.exponents_consistent =
      std::isinf(rep.q_conj) ? env.beta >= 1.0 : rep.q_conj * (env.beta - 1.0) > -1.0;

  try {
    rep.m_sum = block_norm_sum(env, rep.q_conj).sum;
  } catch (const std::exception&) {
    rep.m_sum = kInf;
  }

  double rho = kInf;

  // Constant-Lipschitz route: block-sup sum (q' = inf) times L; needs beta = 1.
  if (env.beta >= 1.0) {
    const double m_sup_sum =
        std::isinf(rep.q_conj) ? rep.m_sum : block_norm_sum(env, kInf).sum;
    const double rho_const = m_sup_sum * rep.lipschitz_scale;
    rep.constant_lipschitz = rho_const < 1.0 ? Verdict::kPass : Verdict::kFail;
    rho = std::min(rho, rho_const);
  } else {
    rep.constant_lipschitz = Verdict::kInconclusive;
    rep.note += "constant-Lipschitz block route needs beta = 1; ";
  }

  // Stepanov route: q'-block sum times ||L_f||_{S^r}.
  if (problem.exponents && lip.kind == LipschitzData::Kind::kSampled) {
    if (!rep.exponents_consistent) {
      rep.stepanov_lipschitz = Verdict::kFail;
      rep.note += "exponent consistency violated: q' must stay below 1/(1 - beta); ";
    } else if (std::isinf(rep.m_sum)) {
      rep.stepanov_lipschitz = Verdict::kFail;
      rep.note += "q'-block sum divergent; ";
    } else {
      rep.stepanov_scale = stepanov_norm(GridSignal(lip.samples), lip.r, lip.samples.grid());
      const double rho_step = rep.m_sum * rep.stepanov_scale;
      rep.stepanov_lipschitz = rho_step < 1.0 ? Verdict::kPass : Verdict::kFail;
      rho = std::min(rho, rho_step);
    }
  }

  rep.m_n.reserve(static_cast<std::size_t>(n_max));
  for (int k = 1; k <= n_max; ++k)
    rep.m_n.push_back(compute_Mn(lip, env.M, env.c, env.beta, k));
  rep.weissinger_sum = 0.0;
  double m_min = kInf;
  for (double m : rep.m_n) {
    rep.weissinger_sum += m;
    m_min = std::min(m_min, m);
  }
  rep.iterated_contraction = m_min < 1.0 ? Verdict::kPass : Verdict::kFail;
  // Submultiplicativity makes the tail geometric once one M_n dips below 1.
  rep.summability = m_min < 1.0 ? Verdict::kPass : Verdict::kFail;
  rep.threshold_rule =
      rep.lipschitz_scale < rep.threshold ? Verdict::kPass : Verdict::kFail;

  // rho is the product of a block sum with a Lipschitz scale; the iterated
  // M_n factors certify separately and are not folded into it.
  rep.rho = rho;
  return rep;
}

namespace {

/// Per-sweep factor used for stop-rule arithmetic: the smaller of the block
/// route and M_1 (one application of the iterated estimate), or 1 when
/// neither contracts.
double effective_rho(const ContractionReport& cert) {
  double rho = cert.rho;
  if (!cert.m_n.empty()) rho = std::min(rho, cert.m_n.front());
  return rho < 1.0 ? rho : 1.0;
}

}  // namespace

SolveResult solve_ap(const SemilinearProblem& problem, double tol, int max_iter,
                     double diag_eps) {
  problem.validate();
  if (problem.mode != SolveMode::kAP)
    throw std::invalid_argument("solve_ap: problem is not in AP mode");
  if (!(tol > 0.0) || max_iter < 1)
    throw std::invalid_argument("solve_ap: need tol > 0 and max_iter >= 1");

  const ContractionReport cert = contraction_report(problem, 3);
  if (!cert.certified())
    throw std::runtime_error("solve_ap: no contraction certificate (rho >= 1 and no M_n < 1)");

  RunOptions opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  opt.diag_eps = diag_eps;
  return run_iteration(problem, opt, effective_rho(cert), true, "solve_ap");
}

SolveResult solve_dfp(const SemilinearProblem& problem, double tol, int max_iter,
                      bool force_uncertified, double diag_eps) {
  problem.validate();
  if (problem.mode != SolveMode::kDFP)
    throw std::invalid_argument("solve_dfp: problem is not in DFP mode");
  if (!(tol > 0.0) || max_iter < 1)
    throw std::invalid_argument("solve_dfp: need tol > 0 and max_iter >= 1");
  if (!problem.family->is_semigroup())
    throw std::invalid_argument(
        "solve_dfp: family is not a semigroup; the initial-value map is undefined");

  const Eigen::MatrixXd projector = problem.family->regular_projector();
  const Eigen::VectorXd leak = *problem.u0 - projector * (*problem.u0);
  if (leak.norm() > 1e-10 * (1.0 + problem.u0->norm()))
    throw std::invalid_argument(
        "solve_dfp: u0 is not admissible (component outside the regular subspace exceeds "
        "1e-10)");

  const ContractionReport cert = contraction_report(problem, 3);
  const bool has_mn = cert.iterated_contraction == Verdict::kPass;
  const bool has_threshold = cert.threshold_rule == Verdict::kPass;
  bool certified = has_mn || has_threshold;
  if (!certified && !force_uncertified)
    throw std::runtime_error(
        "solve_dfp: no certificate; iteration refused (no M_n < 1 and the threshold rule "
        "fails; set force_uncertified to run anyway)");

  RunOptions opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  opt.diag_eps = diag_eps;
  SolveResult result = run_iteration(problem, opt, effective_rho(cert), certified, "solve_dfp");
  if (!certified) result.note += "uncertified run (forced); ";
  return result;
}

VerificationReport verify_solution(const SolveResult& result, const SemilinearProblem& problem) {
  problem.validate();
  if (result.u_extended.grid().node_count() < 2)
    throw std::invalid_argument("verify_solution: result carries no iterate");

  VerificationReport rep;

  // Residual of one map application at doubled quadrature resolution.
  const TimeGrid& coarse = result.u_extended.grid();
  const TimeGrid fine(coarse.t_start(), coarse.t_end(), coarse.step() / 2.0);
  const std::size_t n = fine.node_count();
  const int d = result.u_extended.dim();
  Eigen::MatrixXd U(static_cast<Eigen::Index>(n), d);
  for (std::size_t i = 0; i < n; ++i)
    U.row(static_cast<Eigen::Index>(i)) =
        result.u_extended
            .eval(std::clamp(fine.node(i), coarse.t_start(), coarse.t_end()))
            .transpose();

  const ModalEngine engine = make_engine(*problem.family, fine.step());
  Eigen::MatrixXd homog;
  const Eigen::MatrixXd* homog_ptr = nullptr;
  if (problem.mode == SolveMode::kDFP) {
    homog = dfp_homogeneous(problem, fine);
    homog_ptr = &homog;
  }
  const Eigen::MatrixXd mapped = apply_map(problem, fine, engine, U, homog_ptr, nullptr);
  std::size_t offset = 0;
  while (offset < n && fine.node(offset) < problem.window.t_start() - 1e-12) ++offset;
  rep.residual = window_diff(mapped, U, offset);

  const double last_diff = result.diffs.empty() ? 0.0 : result.diffs.back();
  rep.residual_bound = result.rho < 1.0 ? last_diff / (1.0 - result.rho) : kInf;
  rep.quadrature_limited = rep.residual > rep.residual_bound * (1.0 + 1e-12);
  if (rep.quadrature_limited)
    rep.note += "residual exceeds the contraction bound: quadrature-limited; ";

  // Uniqueness probe: rerun from a norm-1 perturbed initial iterate.
  const IterationSpace space = iteration_space(problem);
  Eigen::MatrixXd init;
  if (problem.mode == SolveMode::kDFP)
    init = dfp_homogeneous(problem, space.grid);
  else
    init = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(space.grid.node_count()),
                                 problem.field->dim());
  init.col(0).array() += 1.0;

  RunOptions opt;
  opt.tol = result.tol > 0.0 ? result.tol : 1e-8;
  opt.max_iter = result.max_iter > 0 ? result.max_iter : 200;
  opt.attach = false;
  opt.init_override = &init;
  const SolveResult rerun = run_iteration(problem, opt, result.rho, result.certified,
                                          "verify_solution");

  rep.uniqueness_gap =
      (rerun.u.values() - result.u.values()).rowwise().norm().maxCoeff();
  rep.uniqueness_bound = result.rho < 1.0 ? 2.0 * opt.tol / (1.0 - result.rho) : kInf;
  rep.unique_ok = rep.uniqueness_gap <= rep.uniqueness_bound;
  rep.verdict = rep.unique_ok ? Verdict::kPass : Verdict::kFail;
  if (!rep.unique_ok) rep.note += "perturbed-start rerun left the uniqueness bound; ";
  return rep;
}

}  // namespace apcauchy
