#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"

#include "apcauchy/io.hpp"

namespace {

using apcauchy::ordered_json;
using apcauchy::Verdict;

/// Exit contract: 0 pass, 2 hypothesis/certificate failure, 1 usage error.
constexpr int kExitPass = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFail = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOpts {
  std::string config;
  std::string out = ".";
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<double> eps;
};

ordered_json load_config(const CommonOpts& opts) {
  if (opts.config.empty()) return ordered_json::object();
  try {
    return apcauchy::read_json_file(opts.config);
  } catch (const std::exception& e) {
    throw UsageError(std::string("--config: ") + e.what());
  }
}

std::string out_path(const CommonOpts& opts, const std::string& name) {
  std::filesystem::create_directories(opts.out);
  return (std::filesystem::path(opts.out) / name).string();
}

const ordered_json& require_field(const ordered_json& j, const std::string& where,
                                  const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw std::invalid_argument(where + ": missing required field '" + std::string(key) + "'");
  return *it;
}

void require_keys(const ordered_json& j, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
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

double number_field(const ordered_json& j, const std::string& where, const char* key) {
  const ordered_json& v = require_field(j, where, key);
  if (!v.is_number()) throw std::invalid_argument(where + "." + key + ": expected a number");
  return v.get<double>();
}

double number_or(const ordered_json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number())
    throw std::invalid_argument(std::string(key) + ": expected a number");
  return j.at(key).get<double>();
}

apcauchy::TimeGrid parse_window(const ordered_json& j, const std::string& where) {
  require_keys(j, where, {"t_start", "t_end", "step"});
  return apcauchy::TimeGrid(number_field(j, where, "t_start"), number_field(j, where, "t_end"),
                            number_field(j, where, "step"));
}

/// {"forcing": name} or {"csv": path, "tau_ext"?: period for below-window
/// evaluation}.
apcauchy::SignalPtr parse_source(const ordered_json& j) {
  require_keys(j, "source", {"forcing", "csv", "tau_ext"});
  const bool has_forcing = j.contains("forcing");
  const bool has_csv = j.contains("csv");
  if (has_forcing == has_csv)
    throw std::invalid_argument("source: give exactly one of 'forcing' or 'csv'");
  if (has_forcing)
    return apcauchy::forcing_library(j.at("forcing").get<std::string>()).signal;
  apcauchy::GridFunction g =
      apcauchy::read_grid_function_csv(j.at("csv").get<std::string>());
  return std::make_shared<apcauchy::GridSignal>(std::move(g), number_or(j, "tau_ext", 0.0));
}

apcauchy::PeriodScanConfig parse_scan(const ordered_json& j, const std::string& where) {
  require_keys(j, where, {"window", "tau_step", "tau_max", "max_inclusion_length"});
  apcauchy::PeriodScanConfig cfg;
  cfg.window = parse_window(require_field(j, where, "window"), where + ".window");
  cfg.tau_step = number_field(j, where, "tau_step");
  cfg.tau_max = number_field(j, where, "tau_max");
  cfg.max_inclusion_length = number_or(j, "max_inclusion_length", 0.0);
  return cfg;
}

apcauchy::LoadedProblem load_problem_config(const CommonOpts& opts) {
  if (opts.config.empty()) throw UsageError("--config: a problem document is required");
  apcauchy::LoadedProblem loaded;
  try {
    loaded = apcauchy::load_problem_file(opts.config);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  if (opts.tol) loaded.tol = *opts.tol;
  return loaded;
}

int verdict_exit(Verdict v) { return v == Verdict::kPass ? kExitPass : kExitFail; }

int run_ap_test(const CommonOpts& opts) {
  ordered_json cfg = load_config(opts);
  apcauchy::SignalPtr signal;
  apcauchy::PeriodScanConfig scan;
  double eps = 0.05;
  try {
    require_keys(cfg, "ap-test config", {"source", "eps", "scan"});
    signal = parse_source(require_field(cfg, "ap-test config", "source"));
    scan = parse_scan(require_field(cfg, "ap-test config", "scan"), "scan");
    eps = opts.eps ? *opts.eps : number_or(cfg, "eps", eps);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }

  apcauchy::APReport report = apcauchy::ap_test(*signal, eps, scan);
  apcauchy::write_json_file(apcauchy::to_json(report), out_path(opts, "ap_report.json"));
  std::cout << "ap-test: verdict=" << apcauchy::to_string(report.verdict) << " periods="
            << report.found_periods.size() << " max_gap=" << report.max_gap << "\n";
  return verdict_exit(report.verdict);
}

int run_stepanov(const CommonOpts& opts) {
  ordered_json cfg = load_config(opts);
  apcauchy::SignalPtr signal;
  apcauchy::PeriodScanConfig scan;
  double eps = 0.05;
  double p = 1.0;
  bool asymptotic = false;
  try {
    require_keys(cfg, "stepanov config", {"source", "eps", "p", "asymptotic", "scan"});
    signal = parse_source(require_field(cfg, "stepanov config", "source"));
    scan = parse_scan(require_field(cfg, "stepanov config", "scan"), "scan");
    eps = opts.eps ? *opts.eps : number_or(cfg, "eps", eps);
    p = number_or(cfg, "p", p);
    if (cfg.contains("asymptotic")) asymptotic = cfg.at("asymptotic").get<bool>();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }

  apcauchy::StepanovReport report = asymptotic ? apcauchy::sp_aap_test(*signal, p, eps, scan)
                                               : apcauchy::sp_ap_test(*signal, p, eps, scan);
  apcauchy::write_json_file(apcauchy::to_json(report), out_path(opts, "stepanov_report.json"));
  std::cout << "stepanov: verdict=" << apcauchy::to_string(report.scan.verdict)
            << " p=" << p << " norm=" << report.norm << "\n";
  return verdict_exit(report.scan.verdict);
}

int run_compose(const CommonOpts& opts) {
  ordered_json cfg = load_config(opts);
  apcauchy::LoadedProblem loaded;
  apcauchy::SignalPtr trajectory;
  apcauchy::ComposeConfig compose_cfg;
  apcauchy::CompositionMode mode = apcauchy::CompositionMode::kAP;
  double eps = 0.05;
  try {
    require_keys(cfg, "compose config",
                 {"problem", "trajectory", "eps", "mode", "scan", "k_points",
                  "lipschitz_pairs", "seed"});
    loaded = apcauchy::load_problem(require_field(cfg, "compose config", "problem"));
    trajectory = parse_source(require_field(cfg, "compose config", "trajectory"));
    compose_cfg.scan = parse_scan(require_field(cfg, "compose config", "scan"), "scan");
    eps = opts.eps ? *opts.eps : number_or(cfg, "eps", eps);
    if (cfg.contains("mode")) {
      const std::string m = cfg.at("mode").get<std::string>();
      if (m == "ap")
        mode = apcauchy::CompositionMode::kAP;
      else if (m == "aap")
        mode = apcauchy::CompositionMode::kAAP;
      else
        throw std::invalid_argument("mode: expected 'ap' or 'aap', got '" + m + "'");
    }
    compose_cfg.k_points = static_cast<int>(number_or(cfg, "k_points", compose_cfg.k_points));
    compose_cfg.lipschitz_pairs =
        static_cast<int>(number_or(cfg, "lipschitz_pairs", compose_cfg.lipschitz_pairs));
    compose_cfg.seed = static_cast<unsigned>(
        opts.seed ? *opts.seed : number_or(cfg, "seed", compose_cfg.seed));
    if (!loaded.problem.exponents)
      throw std::invalid_argument("compose: the problem must declare Stepanov exponents");
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }

  apcauchy::CompositionReport report = apcauchy::compose_and_verify(
      *loaded.problem.field, trajectory, *loaded.problem.exponents, loaded.problem.lipschitz,
      eps, mode, compose_cfg);
  apcauchy::write_json_file(apcauchy::to_json(report),
                            out_path(opts, "composition_report.json"));
  std::cout << "compose: conclusion=" << apcauchy::to_string(report.conclusion)
            << " exponent=" << report.conclusion_exponent << "\n";
  return verdict_exit(report.conclusion);
}

int run_conv(const CommonOpts& opts) {
  ordered_json cfg = load_config(opts);
  apcauchy::KernelEnvelope env;
  apcauchy::SignalPtr signal;
  std::optional<apcauchy::GridFunction> grid_input;
  apcauchy::QuadratureConfig quad;
  std::string mode = "infinite";
  double p = std::numeric_limits<double>::infinity();
  std::optional<apcauchy::TimeGrid> window;
  try {
    require_keys(cfg, "conv config", {"kernel", "source", "mode", "p", "window", "quadrature"});
    const ordered_json& kj = require_field(cfg, "conv config", "kernel");
    require_keys(kj, "kernel", {"M", "c", "beta"});
    env.M = number_field(kj, "kernel", "M");
    env.c = number_field(kj, "kernel", "c");
    env.beta = number_field(kj, "kernel", "beta");
    env.validate();
    if (cfg.contains("mode")) mode = cfg.at("mode").get<std::string>();
    if (mode != "finite" && mode != "infinite")
      throw std::invalid_argument("mode: expected 'finite' or 'infinite', got '" + mode + "'");
    window = parse_window(require_field(cfg, "conv config", "window"), "window");
    if (cfg.contains("p")) {
      const ordered_json& pv = cfg.at("p");
      p = pv.is_string() && pv.get<std::string>() == "inf"
              ? std::numeric_limits<double>::infinity()
              : pv.get<double>();
    }
    if (cfg.contains("quadrature")) {
      const ordered_json& qj = cfg.at("quadrature");
      require_keys(qj, "quadrature", {"n_b", "sigma", "h0", "T_tail"});
      quad.n_b = static_cast<int>(number_or(qj, "n_b", quad.n_b));
      quad.sigma = number_or(qj, "sigma", quad.sigma);
      quad.h0 = number_or(qj, "h0", quad.h0);
      quad.T_tail = number_or(qj, "T_tail", quad.T_tail);
    }
    const ordered_json& src = require_field(cfg, "conv config", "source");
    if (mode == "finite" && src.contains("csv")) {
      grid_input = apcauchy::read_grid_function_csv(src.at("csv").get<std::string>());
    } else {
      signal = parse_source(src);
    }
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }

  apcauchy::ConvolutionResult result =
      mode == "finite"
          ? apcauchy::finite_convolution(
                env, grid_input ? *grid_input : signal->sample(*window), quad, p)
          : apcauchy::infinite_convolution(env, *signal, p, *window, quad);
  apcauchy::write_grid_function_csv(result.values, out_path(opts, "conv.csv"));
  apcauchy::write_json_file(apcauchy::convolution_summary(result),
                            out_path(opts, "conv_summary.json"));
  std::cout << "conv: nodes=" << result.values.grid().node_count()
            << " max_error=" << result.max_error() << " tail_bound=" << result.tail_bound
            << "\n";
  return kExitPass;
}

int run_certify(const CommonOpts& opts) {
  apcauchy::LoadedProblem loaded = load_problem_config(opts);
  apcauchy::ContractionReport report = apcauchy::contraction_report(loaded.problem, 3);
  apcauchy::write_json_file(apcauchy::to_json(report), out_path(opts, "certificate.json"));
  std::cout << "certify: rho=" << report.rho << " threshold=" << report.threshold
            << " certified=" << (report.certified() ? "yes" : "no") << "\n";
  return report.certified() ? kExitPass : kExitFail;
}

int run_solve(const CommonOpts& opts, apcauchy::SolveMode mode) {
  apcauchy::LoadedProblem loaded = load_problem_config(opts);
  const char* name = mode == apcauchy::SolveMode::kAP ? "solve-ap" : "solve-dfp";
  if (loaded.problem.mode != mode)
    throw UsageError(std::string(name) + ": problem mode does not match the subcommand");

  apcauchy::ContractionReport cert = apcauchy::contraction_report(loaded.problem, 3);
  apcauchy::SolveResult result =
      mode == apcauchy::SolveMode::kAP
          ? apcauchy::solve_ap(loaded.problem, loaded.tol)
          : apcauchy::solve_dfp(loaded.problem, loaded.tol);
  apcauchy::VerificationReport ver = apcauchy::verify_solution(result, loaded.problem);

  apcauchy::write_grid_function_csv(result.u, out_path(opts, "trajectory.csv"));
  apcauchy::write_json_file(apcauchy::to_json(cert), out_path(opts, "certificate.json"));
  apcauchy::write_json_file(apcauchy::to_json(result), out_path(opts, "solve.json"));
  apcauchy::write_json_file(apcauchy::to_json(ver), out_path(opts, "verification.json"));
  if (loaded.heat)
    apcauchy::write_json_file(apcauchy::to_json(*loaded.heat),
                              out_path(opts, "model_report.json"));

  const bool converged = !result.diffs.empty() && result.diffs.back() < result.tol;
  std::cout << name << ": iterations=" << result.iterations
            << " residual=" << result.residual << " certified="
            << (result.certified ? "yes" : "no")
            << " verification=" << apcauchy::to_string(ver.verdict) << "\n";
  return (converged && result.certified && ver.verdict == Verdict::kPass) ? kExitPass
                                                                          : kExitFail;
}

int run_mn(const CommonOpts& opts) {
  ordered_json cfg = load_config(opts);
  apcauchy::LipschitzData lip;
  double M = 1.0, c = 1.0, beta = 1.0;
  int n_max = 3;
  std::uint64_t seed = apcauchy::kMnSeed;
  try {
    require_keys(cfg, "mn config", {"lipschitz", "M", "c", "beta", "n_max", "seed"});
    M = number_field(cfg, "mn config", "M");
    c = number_field(cfg, "mn config", "c");
    beta = number_field(cfg, "mn config", "beta");
    n_max = static_cast<int>(number_or(cfg, "n_max", 3));
    const ordered_json& lj = require_field(cfg, "mn config", "lipschitz");
    require_keys(lj, "lipschitz", {"kind", "value", "csv", "r"});
    const std::string kind = require_field(lj, "lipschitz", "kind").get<std::string>();
    if (kind == "constant") {
      lip = apcauchy::LipschitzData::constant_bound(number_field(lj, "lipschitz", "value"));
    } else if (kind == "sampled") {
      apcauchy::GridFunction samples =
          apcauchy::read_grid_function_csv(require_field(lj, "lipschitz", "csv")
                                               .get<std::string>());
      lip = apcauchy::LipschitzData::sampled_bound(std::move(samples),
                                                   number_field(lj, "lipschitz", "r"));
    } else {
      throw std::invalid_argument("lipschitz.kind: expected 'constant' or 'sampled'");
    }
    if (opts.seed)
      seed = *opts.seed;
    else if (cfg.contains("seed"))
      seed = cfg.at("seed").get<std::uint64_t>();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }

  ordered_json j;
  j["M"] = M;
  j["c"] = c;
  j["beta"] = beta;
  ordered_json mn = ordered_json::array();
  double best = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= n_max; ++n) {
    const double v = apcauchy::compute_Mn(lip, M, c, beta, n, seed);
    mn.push_back(v);
    best = std::min(best, v);
  }
  j["m_n"] = std::move(mn);
  j["min"] = best;
  j["contractive"] = best < 1.0;
  apcauchy::write_json_file(j, out_path(opts, "mn.json"));
  std::cout << "mn: min=" << best << " contractive=" << (best < 1.0 ? "yes" : "no") << "\n";
  return best < 1.0 ? kExitPass : kExitFail;
}

int run_heat_demo(const CommonOpts& opts) {
  ordered_json cfg = load_config(opts);
  apcauchy::HeatModelSpec spec;
  std::string profile = "one";
  std::string forcing_name = "sin";
  double k = 0.0;
  double t_end = 10.0, step = 0.01;
  try {
    require_keys(cfg, "heat-demo config",
                 {"n", "b", "p", "profile", "forcing", "k", "t_end", "step"});
    spec.n = static_cast<int>(number_or(cfg, "n", 64));
    spec.b = number_or(cfg, "b", 1.0);
    spec.p = number_or(cfg, "p", 2.0);
    if (cfg.contains("profile")) profile = cfg.at("profile").get<std::string>();
    if (cfg.contains("forcing")) forcing_name = cfg.at("forcing").get<std::string>();
    k = number_or(cfg, "k", 0.0);
    t_end = number_or(cfg, "t_end", t_end);
    step = number_or(cfg, "step", step);
    spec.m = apcauchy::heat_profile(profile);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }

  apcauchy::ForcingSpec forcing = apcauchy::forcing_library(forcing_name);
  apcauchy::HeatModel model =
      apcauchy::poisson_heat_model(spec, forcing, k, apcauchy::TimeGrid(0.0, t_end, step),
                                   apcauchy::SolveMode::kDFP);
  apcauchy::SolveResult result =
      apcauchy::solve_dfp(model.problem, opts.tol ? *opts.tol : 1e-8);

  apcauchy::write_json_file(apcauchy::to_json(model), out_path(opts, "heat_model.json"));
  apcauchy::write_grid_function_csv(result.u, out_path(opts, "trajectory.csv"));
  apcauchy::write_json_file(apcauchy::to_json(result), out_path(opts, "solve.json"));

  const bool converged = !result.diffs.empty() && result.diffs.back() < result.tol;
  const bool pass = converged && model.condition_p.verdict == Verdict::kPass;
  std::cout << "heat-demo: n=" << spec.n << " singular_dim=" << model.singular_dim
            << " condition_P=" << apcauchy::to_string(model.condition_p.verdict)
            << " iterations=" << result.iterations << "\n";
  return pass ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"almost periodic solutions of semilinear evolution problems"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto add_common = [&opts](CLI::App* sub) {
    sub->add_option("--config", opts.config, "JSON configuration document");
    sub->add_option("--out", opts.out, "output directory (default: current)");
    sub->add_option("--tol", opts.tol, "tolerance override");
    sub->add_option("--seed", opts.seed, "Monte Carlo seed override");
    sub->add_option("--eps", opts.eps, "epsilon override for period scans");
  };

  CLI::App* ap = app.add_subcommand("ap-test", "Bohr almost-periodicity scan of a signal");
  CLI::App* st = app.add_subcommand("stepanov", "Stepanov norm and S^p-(A)AP scan");
  CLI::App* co = app.add_subcommand("compose", "composition-principle hypothesis check");
  CLI::App* cv = app.add_subcommand("conv", "weakly singular kernel convolution");
  CLI::App* ce = app.add_subcommand("certify", "contraction certificate for a problem");
  CLI::App* sa = app.add_subcommand("solve-ap", "almost periodic mild solution (whole line)");
  CLI::App* sd = app.add_subcommand("solve-dfp", "initial-value mild solution on [0, T]");
  CLI::App* mn = app.add_subcommand("mn", "iterated contraction factors M_n");
  CLI::App* hd = app.add_subcommand("heat-demo", "degenerate heat pencil end to end");
  for (CLI::App* sub : {ap, st, co, cv, ce, sa, sd, mn, hd}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(ap)) return run_ap_test(opts);
    if (app.got_subcommand(st)) return run_stepanov(opts);
    if (app.got_subcommand(co)) return run_compose(opts);
    if (app.got_subcommand(cv)) return run_conv(opts);
    if (app.got_subcommand(ce)) return run_certify(opts);
    if (app.got_subcommand(sa)) return run_solve(opts, apcauchy::SolveMode::kAP);
    if (app.got_subcommand(sd)) return run_solve(opts, apcauchy::SolveMode::kDFP);
    if (app.got_subcommand(mn)) return run_mn(opts);
    if (app.got_subcommand(hd)) return run_heat_demo(opts);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return kExitFail;
  }
  std::cerr << "error: no subcommand\n";
  return kExitUsage;
}
