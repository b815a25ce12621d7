#include "apcauchy/stepanov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "apcauchy/parallel.hpp"

namespace apcauchy {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LiftGeometry {
  std::size_t n_win = 0;    ///< number of window start nodes
  std::size_t m = 0;        ///< cells per unit window
  std::size_t rows = 0;     ///< presampled rows
  bool midpoint = false;    ///< midpoint sampling (exact signals)
};

LiftGeometry lift_geometry(const Signal& f, const PeriodScanConfig& cfg) {
  LiftGeometry geo;
  geo.n_win = cfg.window.node_count();
  geo.m = cfg.window.nodes_per_unit();
  geo.midpoint = f.exact();
  const std::size_t shift_span = static_cast<std::size_t>(cfg.tau_count()) * cfg.stride();
  geo.rows = geo.n_win - 1 + geo.m + shift_span + (geo.midpoint ? 0 : 1);
  return geo;
}

RowMajorMatrix presample_lift(const Signal& f, const PeriodScanConfig& cfg,
                              const LiftGeometry& geo) {
  const double h = cfg.window.step();
  const double offset = geo.midpoint ? 0.5 * h : 0.0;
  const double last = cfg.window.t_start() + offset + (static_cast<double>(geo.rows) - 1.0) * h;
  if (last > f.t_max() + 1e-9 || cfg.window.t_start() < f.t_min() - 1e-9)
    throw std::invalid_argument(
        "stepanov scan: insufficient overlap (need the window plus 1 s plus tau_max)");
  RowMajorMatrix values(geo.rows, f.dim());
  for (std::size_t i = 0; i < geo.rows; ++i)
    values.row(i) = f.eval(cfg.window.t_start() + offset + static_cast<double>(i) * h).transpose();
  return values;
}

double lift_slack(const Signal& f, const PeriodScanConfig& cfg) {
  if (f.exact()) return 0.0;
  const auto* gs = dynamic_cast<const GridSignal*>(&f);
  if (!gs) return 0.0;
  const double h = gs->data().grid().step();
  const double r_step = cfg.window.step() / h;
  const double r_off = (cfg.window.t_start() - gs->data().grid().t_start()) / h;
  const bool aligned = std::abs(r_step - std::round(r_step)) < 1e-9 &&
                       std::abs(r_off - std::round(r_off)) < 1e-9;
  return aligned ? 0.0 : gs->data().interpolation_slack();
}

struct LiftScan {
  PeriodScan scan;
  std::vector<std::size_t> threshold_idx;  ///< per tau: first admissible tail start
};

/// Window integrals of ||f(.+tau) - f||^p for every scanned tau.  metric[k]
/// is the sup over window starts; threshold_idx[k] the first start index i0
/// such that every window from i0 on stays below (eps + slack)^p.
LiftScan lift_scan(const std::vector<const Signal*>& sections, double p, double eps,
                   const PeriodScanConfig& cfg) {
  cfg.validate();
  if (p < 1.0) throw std::invalid_argument("stepanov scan: p must be >= 1");

  const LiftGeometry geo = lift_geometry(*sections.front(), cfg);
  double slack = 0.0;
  std::vector<RowMajorMatrix> buffers;
  buffers.reserve(sections.size());
  for (const Signal* s : sections) {
    if (s->dim() != sections.front()->dim())
      throw std::invalid_argument("stepanov scan: section dimension mismatch");
    buffers.push_back(presample_lift(*s, cfg, geo));
    slack = std::max(slack, lift_slack(*s, cfg));
  }

  const int n_tau = cfg.tau_count();
  const std::size_t stride = static_cast<std::size_t>(cfg.stride());
  const double h = cfg.window.step();
  LiftScan out;
  out.scan.tau_step = cfg.tau_step;
  out.scan.tau_max = cfg.tau_max;
  out.scan.slack = slack;
  out.scan.metric.assign(static_cast<std::size_t>(n_tau), 0.0);
  out.threshold_idx.assign(static_cast<std::size_t>(n_tau), 0);
  const double level_p = std::pow(eps + slack, p);

  // Number of consecutive pth-power samples per unit window and start count.
  const std::size_t n_cells = geo.n_win - 1 + geo.m + (geo.midpoint ? 0 : 1);

  parallel_for(static_cast<std::size_t>(n_tau), [&](std::size_t lo, std::size_t hi) {
    std::vector<double> dists(n_cells);
    std::vector<double> integral(geo.n_win);
    for (std::size_t k = lo; k < hi; ++k) {
      const std::size_t shift = (k + 1) * stride;
      std::fill(integral.begin(), integral.end(), 0.0);
      for (const auto& v : buffers) {
        const Eigen::Index d = v.cols();
        const double* base = v.data();
        for (std::size_t i = 0; i < n_cells; ++i) {
          const double* a = base + i * d;
          const double* b = base + (i + shift) * d;
          double s = 0.0;
          for (Eigen::Index c = 0; c < d; ++c) {
            const double diff = b[c] - a[c];
            s += diff * diff;
          }
          dists[i] = std::pow(std::sqrt(s), p);
        }
        if (geo.midpoint) {
          // Midpoint rule over m cells.
          double run = 0.0;
          for (std::size_t i = 0; i < geo.m; ++i) run += dists[i];
          for (std::size_t i = 0; i < geo.n_win; ++i) {
            integral[i] = std::max(integral[i], h * run);
            if (i + 1 < geo.n_win) run += dists[i + geo.m] - dists[i];
          }
        } else {
          // Trapezoid over m+1 nodes.
          double run = 0.0;
          for (std::size_t i = 0; i <= geo.m; ++i) run += dists[i];
          for (std::size_t i = 0; i < geo.n_win; ++i) {
            const double trap = run - 0.5 * (dists[i] + dists[i + geo.m]);
            integral[i] = std::max(integral[i], h * trap);
            if (i + 1 < geo.n_win) run += dists[i + geo.m + 1] - dists[i];
          }
        }
      }
      double sup = 0.0;
      std::size_t theta = 0;
      for (std::size_t i = 0; i < geo.n_win; ++i) {
        sup = std::max(sup, integral[i]);
        if (integral[i] > level_p) theta = i + 1;
      }
      out.scan.metric[k] = std::pow(sup, 1.0 / p);
      out.threshold_idx[k] = theta;
    }
  });

  const double level = eps + slack;
  for (int k = 0; k < n_tau; ++k)
    if (out.scan.metric[static_cast<std::size_t>(k)] <= level)
      out.scan.passing.push_back(out.scan.tau_at(k));
  return out;
}

APReport density_report(const PeriodScan& scan, double eps, const PeriodScanConfig& cfg) {
  APReport report;
  report.epsilon = eps;
  report.slack = scan.slack;
  report.found_periods = scan.passing;
  const DensityResult density = relative_density(scan.passing, scan.tau_max, cfg.inclusion_limit());
  report.max_gap = density.max_gap;
  report.verdict = density.pass ? Verdict::kPass : Verdict::kFail;
  if (density.pass) report.inclusion_length = density.max_gap;
  return report;
}

}  // namespace

double StepanovExponents::q() const {
  if (!r) return p;
  return p * (*r) / (p + *r);
}

double StepanovExponents::q_conjugate() const {
  if (!r) return conjugate_exponent(p);
  const double denom = p * (*r) - p - *r;
  if (denom <= 1e-12 * p * (*r)) return kInf;
  return p * (*r) / denom;
}

double conjugate_exponent(double a) {
  if (std::isinf(a) && a > 0.0) return 1.0;
  if (a < 1.0) throw std::invalid_argument("conjugate_exponent: exponent must be >= 1");
  if (a == 1.0) return kInf;
  return a / (a - 1.0);
}

StepanovExponents composition_exponent(double p, double r) {
  if (!(p > 1.0)) throw std::invalid_argument("composition_exponent: p must exceed 1");
  const double r_min = std::max(p, p / (p - 1.0));
  if (r < r_min - 1e-12)
    throw std::invalid_argument("composition_exponent: r must be at least max(p, p/(p-1))");
  StepanovExponents exps;
  exps.p = p;
  exps.r = r;
  return exps;
}

LipschitzData LipschitzData::constant_bound(double L) {
  LipschitzData data;
  data.kind = Kind::kConstant;
  data.constant = L;
  data.validate();
  return data;
}

LipschitzData LipschitzData::sampled_bound(GridFunction L_f, double r) {
  LipschitzData data;
  data.kind = Kind::kSampled;
  data.samples = std::move(L_f);
  data.r = r;
  data.validate();
  return data;
}

double LipschitzData::eval(double t) const {
  if (kind == Kind::kConstant) return constant;
  return samples.eval(t)(0);
}

void LipschitzData::validate() const {
  if (kind == Kind::kConstant) {
    if (!(constant >= 0.0) || !std::isfinite(constant))
      throw std::invalid_argument("LipschitzData: constant must be finite and >= 0");
    return;
  }
  if (samples.dim() != 1) throw std::invalid_argument("LipschitzData: L_f samples must be scalar");
  if (samples.values().minCoeff() < 0.0)
    throw std::invalid_argument("LipschitzData: L_f samples must be non-negative");
  if (!(r >= 1.0)) throw std::invalid_argument("LipschitzData: Stepanov exponent r must be >= 1");
}

double stepanov_norm(const Signal& f, double p, const TimeGrid& window) {
  if (p < 1.0) throw std::invalid_argument("stepanov_norm: p must be >= 1");
  if (window.length() < 1.0 - 1e-9)
    throw std::invalid_argument("stepanov_norm: window must span at least 1 s");
  const std::size_t m = window.nodes_per_unit();
  const double h = window.step();

  if (f.exact()) {
    const Eigen::MatrixXd mid = f.sample_midpoints(window);
    const std::size_t cells = static_cast<std::size_t>(mid.rows());
    std::vector<double> d(cells);
    for (std::size_t i = 0; i < cells; ++i) d[i] = std::pow(mid.row(i).norm(), p);
    double run = 0.0;
    for (std::size_t i = 0; i < m; ++i) run += d[i];
    double best = run;
    for (std::size_t i = 0; i + m < cells; ++i) {
      run += d[i + m] - d[i];
      best = std::max(best, run);
    }
    return std::pow(h * best, 1.0 / p);
  }

  const GridFunction samples = f.sample(window);
  const std::size_t n = window.node_count();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = std::pow(samples.values().row(i).norm(), p);
  double run = 0.0;
  for (std::size_t i = 0; i <= m; ++i) run += d[i];
  double best = run - 0.5 * (d[0] + d[m]);
  for (std::size_t i = 0; i + m + 1 < n; ++i) {
    run += d[i + m + 1] - d[i];
    best = std::max(best, run - 0.5 * (d[i + 1] + d[i + m + 1]));
  }
  return std::pow(h * best, 1.0 / p);
}

StepanovReport sp_ap_test(const Signal& f, double p, double eps, const PeriodScanConfig& cfg) {
  StepanovReport report;
  report.p = p;
  report.norm = stepanov_norm(f, p, cfg.window);
  const LiftScan lifted = lift_scan({&f}, p, eps, cfg);
  report.scan = density_report(lifted.scan, eps, cfg);
  return report;
}

StepanovReport sp_aap_test(const Signal& f, double p, double eps, const PeriodScanConfig& cfg) {
  StepanovReport report;
  report.p = p;
  report.norm = stepanov_norm(f, p, cfg.window);
  const LiftScan lifted = lift_scan({&f}, p, eps, cfg);

  // tau is accepted when the lift metric stays below eps from a threshold in
  // the first half of the window.
  const std::size_t half = cfg.window.node_count() / 2;
  PeriodScan accepted;
  accepted.tau_step = lifted.scan.tau_step;
  accepted.tau_max = lifted.scan.tau_max;
  accepted.slack = lifted.scan.slack;
  accepted.metric = lifted.scan.metric;
  double threshold_time = 0.0;
  for (std::size_t k = 0; k < lifted.scan.metric.size(); ++k) {
    if (lifted.threshold_idx[k] <= half) {
      accepted.passing.push_back(accepted.tau_at(k));
      threshold_time =
          std::max(threshold_time, cfg.window.node(lifted.threshold_idx[k]) - cfg.window.t_start());
    }
  }
  report.scan = density_report(accepted, eps, cfg);
  report.aap_threshold = threshold_time;
  return report;
}

CompositionReport compose_and_verify(const VectorField& f, const SignalPtr& trajectory,
                                     const StepanovExponents& exponents,
                                     const LipschitzData& lipschitz, double eps,
                                     CompositionMode mode, const ComposeConfig& cfg) {
  cfg.scan.validate();
  lipschitz.validate();
  if (!trajectory) throw std::invalid_argument("compose_and_verify: null trajectory");
  if (lipschitz.kind == LipschitzData::Kind::kSampled && !exponents.has_r())
    throw std::invalid_argument(
        "compose_and_verify: sampled Lipschitz data requires composition exponents (p, r)");

  CompositionReport report;
  report.exponents = exponents;
  report.conclusion_exponent =
      lipschitz.kind == LipschitzData::Kind::kSampled ? exponents.q() : exponents.p;

  // Trajectory subsample forming the compact state set K.
  const GridFunction x_samples = trajectory->sample(cfg.scan.window);
  std::vector<Eigen::VectorXd> K;
  const std::size_t n = x_samples.grid().node_count();
  const std::size_t k_points = std::max<std::size_t>(2, static_cast<std::size_t>(cfg.k_points));
  for (std::size_t j = 0; j < k_points; ++j)
    K.push_back(x_samples.at_node(j * (n - 1) / (k_points - 1)));

  // Hypothesis 1: two-parameter Stepanov almost periodicity of f over K.
  {
    std::vector<std::shared_ptr<Signal>> owned;
    std::vector<const Signal*> sections;
    for (const auto& y : K) {
      owned.push_back(std::make_shared<LambdaSignal>(
          f.dim(), [&f, y](double t) { return f.eval(t, y); }));
      sections.push_back(owned.back().get());
    }
    const LiftScan lifted = lift_scan(sections, exponents.p, eps, cfg.scan);
    if (mode == CompositionMode::kAP) {
      report.hyp_two_param = density_report(lifted.scan, eps, cfg.scan).verdict;
    } else {
      const std::size_t half = cfg.scan.window.node_count() / 2;
      PeriodScan accepted;
      accepted.tau_step = lifted.scan.tau_step;
      accepted.tau_max = lifted.scan.tau_max;
      accepted.slack = lifted.scan.slack;
      accepted.metric = lifted.scan.metric;
      for (std::size_t k = 0; k < lifted.scan.metric.size(); ++k)
        if (lifted.threshold_idx[k] <= half) accepted.passing.push_back(accepted.tau_at(k));
      report.hyp_two_param = density_report(accepted, eps, cfg.scan).verdict;
    }
  }

  // Hypothesis 2: the declared Lipschitz bound, probed on random pairs drawn
  // from the sampled trajectory range.
  {
    std::mt19937 rng(cfg.seed);
    std::uniform_int_distribution<std::size_t> pick_node(0, n - 1);
    std::uniform_int_distribution<std::size_t> pick_k(0, K.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int s = 0; s < cfg.lipschitz_pairs; ++s) {
      const Eigen::VectorXd& a = K[pick_k(rng)];
      const Eigen::VectorXd& b = K[pick_k(rng)];
      const Eigen::VectorXd y1 = a + unit(rng) * (b - a);
      const Eigen::VectorXd y2 = a + unit(rng) * (b - a);
      const double gap = (y1 - y2).norm();
      if (gap < 1e-12) continue;
      const double t = cfg.scan.window.node(pick_node(rng));
      const double bound = lipschitz.eval(t) * gap;
      const double actual = (f.eval(t, y1) - f.eval(t, y2)).norm();
      if (bound > 0.0)
        worst = std::max(worst, actual / bound);
      else if (actual > 1e-12)
        worst = std::max(worst, kInf);
    }
    report.lipschitz_worst_ratio = worst;
    report.hyp_lipschitz = worst <= 1.0 + 1e-6 ? Verdict::kPass : Verdict::kFail;
  }

  // Hypothesis 3 (AAP mode): the trajectory splits into an AP part plus a
  // vanishing tail.
  if (mode == CompositionMode::kAAP) {
    try {
      const AAPDecomposition split = aap_decompose(x_samples, eps);
      const C0TailReport tail = c0_tail_test(split.phi, std::max(eps, 10.0 * split.detect_slack));
      report.hyp_decomposition = tail.verdict;
    } catch (const std::exception&) {
      report.hyp_decomposition = Verdict::kFail;
      report.note = "trajectory decomposition failed; ";
    }
  }

  // Conclusion: the composed signal tested in S^q.
  const ComposedSignal composed(std::shared_ptr<const VectorField>(&f, [](const VectorField*) {}),
                                trajectory);
  report.composed = mode == CompositionMode::kAP
                        ? sp_ap_test(composed, report.conclusion_exponent, eps, cfg.scan)
                        : sp_aap_test(composed, report.conclusion_exponent, eps, cfg.scan);

  const bool hypotheses_ok =
      report.hyp_two_param == Verdict::kPass && report.hyp_lipschitz == Verdict::kPass &&
      (mode == CompositionMode::kAP || report.hyp_decomposition != Verdict::kFail);
  if (hypotheses_ok) {
    report.conclusion = report.composed.scan.verdict;
  } else {
    report.conclusion = Verdict::kInconclusive;
    report.note += "hypotheses not established; conclusion not asserted";
  }
  return report;
}

}  // namespace apcauchy
