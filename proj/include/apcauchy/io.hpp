#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"

#include "apcauchy/convolution.hpp"
#include "apcauchy/models.hpp"
#include "apcauchy/solver.hpp"

namespace apcauchy {

/// All emitted documents use insertion order so identical inputs serialize to
/// identical bytes.
using ordered_json = nlohmann::ordered_json;

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

/// CSV with header `t,v0,...,v{d-1}`, one row per node, round-trip floats.
void write_grid_function_csv(const GridFunction& f, std::ostream& os);
void write_grid_function_csv(const GridFunction& f, const std::string& path);
GridFunction read_grid_function_csv(std::istream& is);
GridFunction read_grid_function_csv(const std::string& path);

/// {dim, terms: [{lambda, re: [...], im: [...]}]}
ordered_json trig_polynomial_to_json(const TrigPolynomial& poly);
TrigPolynomial trig_polynomial_from_json(const ordered_json& j);

Verdict verdict_from_string(const std::string& s);

ordered_json to_json(const APReport& r);
ordered_json to_json(const StepanovReport& r);
ordered_json to_json(const CompositionReport& r);
ordered_json to_json(const ContractionReport& r);
ordered_json to_json(const VerificationReport& r);
ordered_json to_json(const ConditionPReport& r);
ordered_json to_json(const BlockSumResult& r);
ordered_json to_json(const C0TailReport& r);

/// Solve metadata; the trajectory itself goes to CSV.
ordered_json to_json(const SolveResult& r);

/// Sidecar for convolution outputs.
ordered_json convolution_summary(const ConvolutionResult& r);

/// Model report: pencil shape, singular dimension, declared/measured beta,
/// condition-(P) sample.
ordered_json to_json(const HeatModel& m);

/// Serialize with a trailing newline; parents must exist.
void write_json_file(const ordered_json& j, const std::string& path);
ordered_json read_json_file(const std::string& path);

/// A problem document:
///   {family_ref, forcing_ref, lipschitz, exponents?, u0?, window, mode, tol?}
/// family_ref is {kind: "scalar", parameters: {a, k}} or
/// {kind: "heat", parameters: {n, b, p, profile, k}}; profile names a built-in
/// m(x) ("one", "ramp", "half").  Unknown keys anywhere are rejected with the
/// offending field named.
struct LoadedProblem {
  SemilinearProblem problem;
  double tol = 1e-8;
  std::string family_kind;
  std::optional<HeatModel> heat;  ///< present when family_ref.kind == "heat"
  ForcingSpec forcing;
};

LoadedProblem load_problem(const ordered_json& j);
LoadedProblem load_problem_file(const std::string& path);

/// Named degeneracy profiles usable from problem files.
std::function<double(double)> heat_profile(const std::string& name);

}  // namespace apcauchy
