#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "apcauchy/signal.hpp"
#include "apcauchy/time_grid.hpp"

namespace apcauchy {

enum class Verdict { kPass, kFail, kInconclusive };
const char* to_string(Verdict v);

/// Scan parameters shared by the sup-metric and Stepanov-metric period scans.
///
/// Candidate periods are tau = k * tau_step for k = 1..floor(tau_max/tau_step);
/// sups over t range over the window nodes.  tau_step must be an integer
/// multiple of the window step so shifted evaluation stays node-aligned.
struct PeriodScanConfig {
  TimeGrid window;
  double tau_step = 0.01;
  double tau_max = 0.0;
  /// Density criterion: pass when the minimal admissible inclusion length is
  /// at most this; 0 selects tau_max / 3.
  double max_inclusion_length = 0.0;

  void validate() const;
  int tau_count() const;
  int stride() const;  ///< window nodes per tau step
  double inclusion_limit() const;
};

/// Raw scan output: the sup metric for every scanned tau.
struct PeriodScan {
  double tau_step = 0.0;
  double tau_max = 0.0;
  double slack = 0.0;               ///< interpolation slack folded into eps
  std::vector<double> metric;       ///< metric[k] is the sup for tau=(k+1)*tau_step
  std::vector<double> passing;      ///< taus with metric <= eps + slack

  double tau_at(std::size_t k) const { return (static_cast<double>(k) + 1.0) * tau_step; }
};

/// Deduplicates contiguous runs of passing taus into their local minimizers.
std::vector<double> cluster_representatives(const PeriodScan& scan, double eps);

/// sup-metric epsilon-period scan of one signal.
PeriodScan epsilon_periods(const Signal& f, double eps, const PeriodScanConfig& cfg);

/// Two-parameter variant: sup over t and over the finite state set K of
/// ||f(t+tau, y) - f(t, y)||.
PeriodScan epsilon_periods(const VectorField& f, const std::vector<Eigen::VectorXd>& K,
                           double eps, const PeriodScanConfig& cfg);

/// Relative density of a tau set inside (0, span]: pass iff every closed
/// subinterval of length l meets the set.  max_gap is the minimal admissible
/// l (largest of first tau, consecutive gaps, and span - last tau).
struct DensityResult {
  bool pass = false;
  double max_gap = 0.0;
};
DensityResult relative_density(const std::vector<double>& taus, double span, double l);

/// Bohr-style almost-periodicity report.
struct APReport {
  Verdict verdict = Verdict::kInconclusive;
  double epsilon = 0.0;
  double slack = 0.0;
  std::vector<double> found_periods;
  double max_gap = 0.0;
  std::optional<double> inclusion_length;  ///< set on pass
  bool continuity_checked = false;
  double jump_estimate = 0.0;
  std::string note;
};

/// Scans epsilon-periods and checks their relative density.  Exact signals
/// are probed for discontinuities first (a jump larger than eps fails the
/// test: uniform continuity is part of the definition).
APReport ap_test(const Signal& f, double eps, const PeriodScanConfig& cfg);
APReport ap_test(const VectorField& f, const std::vector<Eigen::VectorXd>& K, double eps,
                 const PeriodScanConfig& cfg);

/// Largest persistent jump found by dyadic refinement of the worst sample
/// pairs; 0 for (numerically) continuous signals.
double estimate_jump(const Signal& f, const TimeGrid& grid);

/// Asymptotic decomposition f = g + phi with g the almost periodic part.
struct AAPDecomposeConfig {
  double burn_in = 0.0;        ///< 0 selects window length / 6
  double test_window = 0.0;    ///< sup-window length for detection; 0 = length / 6
  double tau_step = 0.0;       ///< 0 selects the grid step
  int translates = 3;          ///< how many translates feed the median
};

struct AAPDecomposition {
  GridFunction g;
  GridFunction phi;
  double residual = 0.0;         ///< sup ||f - (g + phi)|| on the overlap
  double phi_tail_sup = 0.0;     ///< sup ||phi|| on the last third of its window
  std::vector<double> translates;
  double detect_slack = 0.0;     ///< worst scan metric among selected translates
};

/// Translate-median estimate of the AP part: the selected translates are the
/// best-scoring `translates` near-periods detected above the burn-in time,
/// and g is their pointwise componentwise median.  Throws when fewer than the
/// required number of near-periods is detected.
AAPDecomposition aap_decompose(const GridFunction& f, double eps,
                               const AAPDecomposeConfig& cfg = {});

/// Extension of a windowed sample to earlier times via one detected
/// near-period shift.
struct ExtensionResult {
  GridSignal signal;
  double tau = 0.0;
  double slack = 0.0;  ///< scan metric of the chosen near-period
};

/// Picks the best near-period tau >= min_shift and wraps f so that times in
/// [t_start - (tau - needed overlap), t_start) evaluate through the shift.
/// Throws when no near-period of at least min_shift is detected at eps.
ExtensionResult extend_to_line(const GridFunction& f, double min_shift, double eps,
                               double tau_step = 0.0);

/// Vanishing-at-infinity check over trailing blocks of the window.
struct C0TailReport {
  Verdict verdict = Verdict::kInconclusive;
  std::vector<double> block_sups;
  double final_sup = 0.0;
  bool monotone_ok = false;  ///< block sups non-increasing within factor 2
};

C0TailReport c0_tail_test(const GridFunction& phi, double tol, int n_blocks = 8);

}  // namespace apcauchy
