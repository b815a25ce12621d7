#include "apcauchy/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <vector>

namespace apcauchy {
namespace {

constexpr double kPi = 3.14159265358979323846;

/// JSON has no inf/nan literals; keep them as strings so reports stay honest.
ordered_json json_num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double num_from_json(const ordered_json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw std::invalid_argument(where + ": expected a number");
}

void require_object(const ordered_json& j, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
}

/// Unknown keys are configuration bugs; reject them by name.
void require_keys(const ordered_json& j, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  require_object(j, where);
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
  }
}

const ordered_json& require_field(const ordered_json& j, const std::string& where,
                                  const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw std::invalid_argument(where + ": missing required field '" + std::string(key) + "'");
  return *it;
}

double parse_double_token(const std::string& token, const std::string& where) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  double v = 0.0;
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw std::invalid_argument(where + ": malformed number '" + token + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_grid_function_csv(const GridFunction& f, std::ostream& os) {
  os << 't';
  for (int j = 0; j < f.dim(); ++j) os << ",v" << j;
  os << '\n';
  const TimeGrid& grid = f.grid();
  for (int i = 0; i < grid.node_count(); ++i) {
    os << format_double(grid.node(i));
    for (int j = 0; j < f.dim(); ++j) os << ',' << format_double(f.values()(i, j));
    os << '\n';
  }
}

void write_grid_function_csv(const GridFunction& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_grid_function_csv(f, os);
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

GridFunction read_grid_function_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("CSV: empty input");
  if (line.size() >= 1 && line.back() == '\r') line.pop_back();
  if (line.rfind("t", 0) != 0)
    throw std::invalid_argument("CSV: header must start with 't'");

  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  int dim = -1;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      const std::string token =
          line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      row.push_back(parse_double_token(token, "CSV line " + std::to_string(lineno)));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (row.size() < 2)
      throw std::invalid_argument("CSV line " + std::to_string(lineno) +
                                  ": need a time and at least one component");
    if (dim < 0)
      dim = static_cast<int>(row.size()) - 1;
    else if (static_cast<int>(row.size()) - 1 != dim)
      throw std::invalid_argument("CSV line " + std::to_string(lineno) +
                                  ": inconsistent column count");
    times.push_back(row[0]);
    rows.push_back(std::move(row));
  }
  if (times.size() < 2) throw std::invalid_argument("CSV: need at least two data rows");

  const double step = times[1] - times[0];
  TimeGrid grid(times.front(), times.back(), step);
  if (grid.node_count() != static_cast<int>(times.size()))
    throw std::invalid_argument("CSV: rows do not form a uniform time grid");
  Eigen::MatrixXd values(times.size(), dim);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - grid.node(static_cast<int>(i))) > 1e-9)
      throw std::invalid_argument("CSV: non-uniform time column near row " +
                                  std::to_string(i + 2));
    for (int j = 0; j < dim; ++j) values(static_cast<int>(i), j) = rows[i][j + 1];
  }
  return GridFunction(grid, std::move(values));
}

GridFunction read_grid_function_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "' for reading");
  return read_grid_function_csv(is);
}

ordered_json trig_polynomial_to_json(const TrigPolynomial& poly) {
  ordered_json j;
  j["dim"] = poly.dim();
  ordered_json terms = ordered_json::array();
  for (const TrigTerm& term : poly.terms()) {
    ordered_json t;
    t["lambda"] = json_num(term.lambda);
    ordered_json re = ordered_json::array();
    ordered_json im = ordered_json::array();
    for (int i = 0; i < term.coeff.size(); ++i) {
      re.push_back(json_num(term.coeff(i).real()));
      im.push_back(json_num(term.coeff(i).imag()));
    }
    t["re"] = std::move(re);
    t["im"] = std::move(im);
    terms.push_back(std::move(t));
  }
  j["terms"] = std::move(terms);
  return j;
}

TrigPolynomial trig_polynomial_from_json(const ordered_json& j) {
  require_keys(j, "trig polynomial", {"dim", "terms"});
  const int dim = require_field(j, "trig polynomial", "dim").get<int>();
  std::vector<TrigTerm> terms;
  for (const ordered_json& t : require_field(j, "trig polynomial", "terms")) {
    require_keys(t, "trig polynomial term", {"lambda", "re", "im"});
    TrigTerm term;
    term.lambda = num_from_json(require_field(t, "term", "lambda"), "term.lambda");
    const ordered_json& re = require_field(t, "term", "re");
    const ordered_json& im = require_field(t, "term", "im");
    if (!re.is_array() || !im.is_array() || re.size() != im.size())
      throw std::invalid_argument("trig polynomial term: re/im must be arrays of equal size");
    term.coeff = Eigen::VectorXcd::Zero(static_cast<int>(re.size()));
    for (std::size_t i = 0; i < re.size(); ++i)
      term.coeff(static_cast<int>(i)) = {num_from_json(re[i], "term.re"),
                                         num_from_json(im[i], "term.im")};
    terms.push_back(std::move(term));
  }
  return TrigPolynomial(dim, std::move(terms), false);
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "pass") return Verdict::kPass;
  if (s == "fail") return Verdict::kFail;
  if (s == "inconclusive") return Verdict::kInconclusive;
  throw std::invalid_argument("unknown verdict '" + s + "'");
}

ordered_json to_json(const APReport& r) {
  ordered_json j;
  j["verdict"] = to_string(r.verdict);
  j["epsilon"] = json_num(r.epsilon);
  j["slack"] = json_num(r.slack);
  ordered_json periods = ordered_json::array();
  for (double tau : r.found_periods) periods.push_back(json_num(tau));
  j["found_periods"] = std::move(periods);
  j["max_gap"] = json_num(r.max_gap);
  j["inclusion_length"] =
      r.inclusion_length ? json_num(*r.inclusion_length) : ordered_json(nullptr);
  j["continuity_checked"] = r.continuity_checked;
  j["jump_estimate"] = json_num(r.jump_estimate);
  j["note"] = r.note;
  return j;
}

ordered_json to_json(const StepanovReport& r) {
  ordered_json j;
  j["p"] = json_num(r.p);
  j["norm"] = json_num(r.norm);
  j["aap_threshold"] = json_num(r.aap_threshold);
  j["scan"] = to_json(r.scan);
  return j;
}

ordered_json to_json(const CompositionReport& r) {
  ordered_json j;
  ordered_json e;
  e["p"] = json_num(r.exponents.p);
  e["r"] = r.exponents.has_r() ? json_num(*r.exponents.r) : ordered_json(nullptr);
  e["q"] = json_num(r.exponents.q());
  e["q_conjugate"] = json_num(r.exponents.q_conjugate());
  j["exponents"] = std::move(e);
  j["conclusion_exponent"] = json_num(r.conclusion_exponent);
  j["hyp_two_param"] = to_string(r.hyp_two_param);
  j["hyp_lipschitz"] = to_string(r.hyp_lipschitz);
  j["lipschitz_worst_ratio"] = json_num(r.lipschitz_worst_ratio);
  j["hyp_decomposition"] = to_string(r.hyp_decomposition);
  j["conclusion"] = to_string(r.conclusion);
  j["composed"] = to_json(r.composed);
  j["note"] = r.note;
  return j;
}

ordered_json to_json(const ContractionReport& r) {
  ordered_json j;
  j["q_conj"] = json_num(r.q_conj);
  j["m_sum"] = json_num(r.m_sum);
  j["lipschitz_scale"] = json_num(r.lipschitz_scale);
  j["stepanov_scale"] = json_num(r.stepanov_scale);
  j["rho"] = json_num(r.rho);
  j["threshold"] = json_num(r.threshold);
  ordered_json mn = ordered_json::array();
  for (double m : r.m_n) mn.push_back(json_num(m));
  j["m_n"] = std::move(mn);
  j["weissinger_sum"] = json_num(r.weissinger_sum);
  j["constant_lipschitz"] = to_string(r.constant_lipschitz);
  j["stepanov_lipschitz"] = to_string(r.stepanov_lipschitz);
  j["iterated_contraction"] = to_string(r.iterated_contraction);
  j["threshold_rule"] = to_string(r.threshold_rule);
  j["summability"] = to_string(r.summability);
  j["exponents_consistent"] = r.exponents_consistent;
  j["certified"] = r.certified();
  j["note"] = r.note;
  return j;
}

ordered_json to_json(const VerificationReport& r) {
  ordered_json j;
  j["residual"] = json_num(r.residual);
  j["residual_bound"] = json_num(r.residual_bound);
  j["quadrature_limited"] = r.quadrature_limited;
  j["uniqueness_gap"] = json_num(r.uniqueness_gap);
  j["uniqueness_bound"] = json_num(r.uniqueness_bound);
  j["unique_ok"] = r.unique_ok;
  j["verdict"] = to_string(r.verdict);
  j["note"] = r.note;
  return j;
}

ordered_json to_json(const ConditionPReport& r) {
  ordered_json j;
  j["verdict"] = to_string(r.verdict);
  j["c"] = json_num(r.c);
  j["beta"] = json_num(r.beta);
  j["M"] = json_num(r.M);
  j["fitted"] = r.fitted;
  j["worst_ratio"] = json_num(r.worst_ratio);
  j["worst_lambda"] = {{"re", json_num(r.worst_lambda.real())},
                       {"im", json_num(r.worst_lambda.imag())}};
  j["note"] = r.note;
  return j;
}

ordered_json to_json(const BlockSumResult& r) {
  ordered_json j;
  j["sum"] = json_num(r.sum);
  j["tail_bound"] = json_num(r.tail_bound);
  j["blocks"] = r.blocks;
  return j;
}

ordered_json to_json(const C0TailReport& r) {
  ordered_json j;
  j["verdict"] = to_string(r.verdict);
  ordered_json sups = ordered_json::array();
  for (double s : r.block_sups) sups.push_back(json_num(s));
  j["block_sups"] = std::move(sups);
  j["final_sup"] = json_num(r.final_sup);
  j["monotone_ok"] = r.monotone_ok;
  return j;
}

ordered_json to_json(const SolveResult& r) {
  ordered_json j;
  j["iterations"] = r.iterations;
  ordered_json diffs = ordered_json::array();
  for (double d : r.diffs) diffs.push_back(json_num(d));
  j["diffs"] = std::move(diffs);
  j["residual"] = json_num(r.residual);
  j["rho"] = json_num(r.rho);
  j["certified"] = r.certified;
  j["tol"] = json_num(r.tol);
  j["max_iter"] = r.max_iter;
  j["history_truncation"] = json_num(r.history_truncation);
  j["ap_report"] = r.ap_report ? to_json(*r.ap_report) : ordered_json(nullptr);
  j["aap_report"] = r.aap_report ? to_json(*r.aap_report) : ordered_json(nullptr);
  j["note"] = r.note;
  return j;
}

ordered_json convolution_summary(const ConvolutionResult& r) {
  ordered_json j;
  j["tail_bound"] = json_num(r.tail_bound);
  j["max_quadrature_error"] = json_num(r.max_error());
  return j;
}

ordered_json to_json(const HeatModel& m) {
  ordered_json j;
  j["dim"] = m.pencil.dim;
  j["rank"] = m.pencil.rank;
  j["singular_dim"] = m.singular_dim;
  j["h_x"] = json_num(m.h_x);
  j["declared_beta"] = json_num(m.declared_beta);
  j["measured_beta"] = json_num(m.measured_beta);
  j["condition_p"] = to_json(m.condition_p);
  j["note"] = m.note;
  return j;
}

void write_json_file(const ordered_json& j, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << j.dump(2) << '\n';
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

ordered_json read_json_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "' for reading");
  return ordered_json::parse(is);
}

std::function<double(double)> heat_profile(const std::string& name) {
  if (name == "one") return [](double) { return 1.0; };
  if (name == "ramp") return [](double x) { return x / kPi; };
  if (name == "half") return [](double x) { return x < kPi / 2.0 ? 0.0 : 1.0; };
  throw std::invalid_argument("unknown heat profile '" + name +
                              "'; known profiles: one, ramp, half");
}

LoadedProblem load_problem(const ordered_json& j) {
  require_keys(j, "problem", {"family_ref", "forcing_ref", "lipschitz", "exponents", "u0",
                              "window", "mode", "tol"});

  const ordered_json& fam = require_field(j, "problem", "family_ref");
  require_keys(fam, "family_ref", {"kind", "parameters"});
  const std::string kind = require_field(fam, "family_ref", "kind").get<std::string>();

  const std::string forcing_ref =
      require_field(j, "problem", "forcing_ref").get<std::string>();
  ForcingSpec forcing = forcing_library(forcing_ref);

  const ordered_json& lip = require_field(j, "problem", "lipschitz");
  require_keys(lip, "lipschitz", {"kind", "value"});
  const std::string lip_kind = require_field(lip, "lipschitz", "kind").get<std::string>();
  if (lip_kind != "constant")
    throw std::invalid_argument(
        "lipschitz.kind: built-in models take a constant bound; got '" + lip_kind + "'");
  const double k = num_from_json(require_field(lip, "lipschitz", "value"), "lipschitz.value");

  const ordered_json& win = require_field(j, "problem", "window");
  require_keys(win, "window", {"t_start", "t_end", "step"});
  TimeGrid window(num_from_json(require_field(win, "window", "t_start"), "window.t_start"),
                  num_from_json(require_field(win, "window", "t_end"), "window.t_end"),
                  num_from_json(require_field(win, "window", "step"), "window.step"));

  const std::string mode_name = require_field(j, "problem", "mode").get<std::string>();
  SolveMode mode;
  if (mode_name == "ap")
    mode = SolveMode::kAP;
  else if (mode_name == "dfp")
    mode = SolveMode::kDFP;
  else
    throw std::invalid_argument("mode: expected 'ap' or 'dfp', got '" + mode_name + "'");

  LoadedProblem out;
  out.family_kind = kind;
  out.forcing = forcing;
  const ordered_json params =
      fam.contains("parameters") ? fam.at("parameters") : ordered_json::object();
  if (kind == "scalar") {
    require_keys(params, "family_ref.parameters", {"a"});
    const double a = num_from_json(require_field(params, "parameters", "a"), "parameters.a");
    out.problem = scalar_model(a, forcing, k, window, mode);
  } else if (kind == "heat") {
    require_keys(params, "family_ref.parameters", {"n", "b", "p", "profile"});
    HeatModelSpec spec;
    spec.n = require_field(params, "parameters", "n").get<int>();
    spec.b = num_from_json(require_field(params, "parameters", "b"), "parameters.b");
    spec.p = num_from_json(require_field(params, "parameters", "p"), "parameters.p");
    const std::string profile =
        params.contains("profile") ? params.at("profile").get<std::string>()
                                   : std::string("one");
    spec.m = heat_profile(profile);
    out.heat = poisson_heat_model(spec, forcing, k, window, mode);
    out.problem = out.heat->problem;
  } else {
    throw std::invalid_argument("family_ref.kind: expected 'scalar' or 'heat', got '" + kind +
                                "'");
  }

  if (j.contains("exponents")) {
    const ordered_json& exp = j.at("exponents");
    require_keys(exp, "exponents", {"p", "r"});
    StepanovExponents e;
    e.p = num_from_json(require_field(exp, "exponents", "p"), "exponents.p");
    if (exp.contains("r")) e.r = num_from_json(exp.at("r"), "exponents.r");
    out.problem.exponents = e;
  }
  if (j.contains("u0")) {
    const ordered_json& u0 = j.at("u0");
    if (!u0.is_array()) throw std::invalid_argument("u0: expected an array");
    Eigen::VectorXd v(static_cast<int>(u0.size()));
    for (std::size_t i = 0; i < u0.size(); ++i)
      v(static_cast<int>(i)) = num_from_json(u0[i], "u0");
    if (v.size() != out.problem.family->dim())
      throw std::invalid_argument("u0: dimension does not match the family");
    out.problem.u0 = std::move(v);
  }
  if (j.contains("tol")) out.tol = num_from_json(j.at("tol"), "tol");
  return out;
}

LoadedProblem load_problem_file(const std::string& path) {
  ordered_json j;
  try {
    j = read_json_file(path);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("problem file '" + path + "': " + e.what());
  }
  return load_problem(j);
}

}  // namespace apcauchy
