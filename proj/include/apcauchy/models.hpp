#pragma once

#include <functional>
#include <map>
#include <string>

#include "apcauchy/solver.hpp"

namespace apcauchy {

/// Regularity class a library forcing declares for itself.
enum class ForcingClass { kAP, kSpAP, kAAP, kSpAAP };

std::string to_string(ForcingClass c);

/// A named forcing with its declared class.  The builder verifies the class
/// at construction time (memoized per process) with the matching test at
/// eps = 0.05 and refuses to hand out a signal that fails its own label.
struct ForcingSpec {
  std::string name;
  std::string kind;  ///< "trig" | "pulse_train" | "aap_composite"
  ForcingClass declared = ForcingClass::kAP;
  SignalPtr signal;
  std::map<std::string, double> parameters;
  bool verified = false;
};

/// Built-ins: "sin"; "trig(1,sqrt2)" (also accepts the radical spelled out);
/// "pulse2" (period-2 unit pulses, Stepanov almost periodic but famously not
/// Bohr almost periodic); "aap(trig,2,tau=2)" (the trig pair plus
/// 2 e^{-t/2}).  Unknown names throw.
ForcingSpec forcing_library(const std::string& name);

/// Scalar testbed: family e^{-at} (M = 1, c = a, beta = 1) and
/// f(t, u) = forcing(t) + k sin(u), Lipschitz constant k.
SemilinearProblem scalar_model(double a, const ForcingSpec& forcing, double k,
                               const TimeGrid& window, SolveMode mode = SolveMode::kAP);

/// Degenerate heat pencil on (0, pi): mass-weighted time derivative
/// m(x) d/dt v = (Laplacian - b) v + forcing, discretized with second-order
/// central differences on n interior nodes.  Nodes where m vanishes carry no
/// dynamics and land in the singular subspace of the pencil.
struct HeatModelSpec {
  int n = 64;
  double b = 1.0;
  std::function<double(double)> m;  ///< degeneracy profile; empty selects m = 1
  double p = 2.0;                   ///< declared exponent; reports beta = 1/p

  void validate() const;
};

struct HeatModel {
  SemilinearProblem problem;
  PencilModel pencil;
  ConditionPReport condition_p;   ///< fit at the declared beta = 1/p
  int singular_dim = 0;
  double declared_beta = 0.5;
  double measured_beta = 1.0;     ///< a finite-dimensional pencil cannot blow up at 0+
  double h_x = 0.0;
  Eigen::VectorXd x_nodes;
  Eigen::VectorXd m_values;
  std::string note;
};

/// Builds the pencil, its semigroup, and a DFP/AP problem with
/// f(t, u)_i = forcing(t) sin(x_i) + k sin(u_i).  A failing condition-(P)
/// sample or a declared/measured beta gap is reported in the notes, never
/// hidden; pencil reduction failures still throw.
HeatModel poisson_heat_model(const HeatModelSpec& spec, const ForcingSpec& forcing, double k,
                             const TimeGrid& window, SolveMode mode = SolveMode::kDFP);

}  // namespace apcauchy
