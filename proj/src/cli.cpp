#include "dspg/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dspg/generators.hpp"
#include "dspg/io.hpp"
#include "dspg/metrics.hpp"
#include "dspg/solver.hpp"
#include "dspg/sweep.hpp"

namespace dspg {

namespace fs = std::filesystem;

namespace {

struct SolveArgs {
  std::string instance;
  std::string out;
  double eps = SolverConfig{}.eps;
  int max_iter = SolverConfig{}.max_outer;
  bool no_cleanup = false;
  std::string init;
  std::string trace;
};

struct GenerateArgs {
  std::string family = "random";
  Index n = 0;
  double density = 0.0;
  std::uint64_t seed = 0;
  Index samples = 0;
  double constraint_fraction = 0.0;
  double rho = 0.1;
  double mu = 1.0;
  std::string out_dir;
};

struct EvaluateArgs {
  std::string solution;
  std::string truth;
  double threshold = kDefaultSupportThreshold;
};

struct SweepArgs {
  std::string instance;
  std::string grid;
  std::string out;
  double threshold = kDefaultSupportThreshold;
  int parallel = 1;
  bool timing = false;
  double eps = SolverConfig{}.eps;
  int max_iter = SolverConfig{}.max_outer;
};

int exit_for(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return kExitOk;
    case SolveStatus::Infeasible: return kExitInfeasible;
    default: return kExitNotConverged;
  }
}

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const ProblemInstance inst = read_instance(a.instance);
  SolverConfig cfg;
  cfg.eps = a.eps;
  cfg.max_outer = a.max_iter;
  cfg.cleanup = !a.no_cleanup;
  cfg.validate();

  std::optional<std::pair<Vector, SymMat>> init;
  if (!a.init.empty()) init = read_init(a.init, inst);

  const SolveReport report = solve(inst, cfg, init);
  write_report(a.out, report, inst, cfg);
  if (!a.trace.empty()) {
    std::ofstream t(a.trace, std::ios::binary);
    if (!t) throw std::runtime_error("cannot write " + a.trace);
    write_trace_csv(t, report.trace);
  }

  out << "status " << to_string(report.status) << '\n';
  if (report.status == SolveStatus::Infeasible) {
    out << "reason " << report.message << '\n';
  } else {
    out << "iterations " << report.iterations << '\n'
        << "primal_obj " << format_display(report.primal_obj) << '\n'
        << "dual_obj " << format_display(report.dual_obj) << '\n'
        << "gap " << format_display(report.gap) << '\n'
        << "time_s " << format_display(report.wall_time) << '\n';
  }
  return exit_for(report.status);
}

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const auto family = parse_family(a.family);
  if (!family) throw std::invalid_argument("unknown family '" + a.family + "'");
  GenSpec spec;
  spec.n = a.n;
  spec.density = a.density;
  spec.seed = a.seed;
  spec.family = family->first;
  spec.band = family->second;
  spec.samples = a.samples;
  spec.validate();
  if (!(a.constraint_fraction >= 0.0 && a.constraint_fraction <= 1.0)) {
    throw std::invalid_argument("--constraint-fraction must lie in [0,1]");
  }
  if (!(a.rho >= 0.0)) throw std::invalid_argument("--rho must be >= 0");
  if (!(a.mu > 0.0)) throw std::invalid_argument("--mu must be > 0");

  const SymMat truth = gen_precision(spec);
  const SymMat c = sample_covariance(truth, spec.sample_count(), spec.seed);

  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  write_matrix_file(dir / "C.mtx", c);
  write_matrix_file(dir / "truth.mtx", truth);

  InstanceManifest m;
  m.n = spec.n;
  m.mu = a.mu;
  m.rho_uniform = a.rho;
  m.c_path = "C.mtx";
  m.truth_path = "truth.mtx";

  Index zeros = 0;
  Index bandwidth = 0;
  Index offdiag = 0;
  for (Index i = 0; i < spec.n; ++i) {
    for (Index j = i + 1; j < spec.n; ++j) {
      if (truth(i, j) == 0.0) {
        ++zeros;
      } else {
        ++offdiag;
        bandwidth = std::max(bandwidth, j - i);
      }
    }
  }
  if (a.constraint_fraction > 0.0) {
    m.zero_pattern = build_zero_constraints(truth, a.constraint_fraction, spec.seed).pattern;
  }

  nlohmann::ordered_json gen;
  gen["family"] = family_name(spec.family, spec.band);
  gen["variant"] = spec.family == Family::Random ? "repo-defined random construction"
                                                 : "repo-defined variant";
  gen["n"] = spec.n;
  gen["density"] = spec.density;
  gen["seed"] = spec.seed;
  gen["samples"] = spec.sample_count();
  gen["constraint_fraction"] = a.constraint_fraction;
  m.metadata["generator"] = std::move(gen);
  m.metadata["truth"] = {{"offdiag_nonzeros", offdiag},
                         {"offdiag_zeros", zeros},
                         {"bandwidth", bandwidth}};
  m.metadata["repo_version"] = kVersion;
  write_manifest(dir / "manifest.json", m);

  out << "wrote " << (dir / "manifest.json").string() << '\n';
  return kExitOk;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const SymMat x = read_matrix_file(a.solution);
  const SymMat truth = read_matrix_file(a.truth);
  if (x.n() != truth.n()) {
    throw ValidationError("solution is " + std::to_string(x.n()) + "x" + std::to_string(x.n()) +
                          " but truth is " + std::to_string(truth.n()) + "x" +
                          std::to_string(truth.n()));
  }
  const RecoveryReport r = evaluate_recovery(truth, x, a.threshold);
  out << "key,value\n"
      << "loss_e," << format_display(r.loss_e) << '\n'
      << "loss_q," << format_display(r.loss_q) << '\n'
      << "sensitivity," << format_display(r.sensitivity) << '\n'
      << "specificity," << format_display(r.specificity) << '\n'
      << "tp," << r.tp << '\n'
      << "tn," << r.tn << '\n'
      << "fp," << r.fp << '\n'
      << "fn," << r.fn << '\n'
      << "nnz," << r.nnz << '\n'
      << "threshold," << format_display(r.threshold) << '\n';
  return kExitOk;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  const InstanceManifest manifest = read_manifest(a.instance);
  if (!manifest.rho_uniform) {
    throw ValidationError("sweep requires a uniform rho; matrix-valued rho cannot be swept");
  }
  const std::vector<double> grid = parse_grid(a.grid);
  if (a.parallel < 1) throw std::invalid_argument("--parallel must be >= 1");
  if (!(a.threshold >= 0.0)) throw std::invalid_argument("--threshold must be >= 0");
  const ProblemInstance base = load_instance(manifest);

  SolverConfig cfg;
  cfg.eps = a.eps;
  cfg.max_outer = a.max_iter;
  cfg.validate();

  const auto rows = run_sweep(base, grid, cfg, a.threshold, a.parallel);
  std::ofstream csv(a.out, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + a.out);
  write_sweep_csv(csv, rows, a.timing);

  bool all_ok = true;
  for (const auto& r : rows) all_ok = all_ok && r.ok();
  out << "rows " << rows.size() << (all_ok ? " all converged" : " with failures") << '\n';
  return all_ok ? kExitOk : kExitNotConverged;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual spectral projected gradient solver for l1-penalized log-det problems",
               "dspg"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "Solve an instance");
  solve_cmd->add_option("--instance", sa.instance, "Instance manifest")->required();
  solve_cmd->add_option("--out", sa.out, "Report path (JSON)")->required();
  solve_cmd->add_option("--eps", sa.eps, "Stopping tolerance")->capture_default_str();
  solve_cmd->add_option("--max-iter", sa.max_iter, "Outer iteration cap")->capture_default_str();
  solve_cmd->add_flag("--no-cleanup", sa.no_cleanup, "Keep zero-pattern entries of X");
  solve_cmd->add_option("--init", sa.init, "Initial point (y, W_path JSON)");
  solve_cmd->add_option("--trace", sa.trace, "Per-iteration trace CSV");

  GenerateArgs ga;
  auto* gen_cmd = app.add_subcommand("generate", "Generate a synthetic instance");
  gen_cmd->add_option("--family", ga.family, "random|ar1|ar2|ar3|ar4|decay|star|circle|full")
      ->required();
  gen_cmd->add_option("--n", ga.n, "Dimension")->required();
  gen_cmd->add_option("--density", ga.density, "Off-diagonal density (random family)");
  gen_cmd->add_option("--seed", ga.seed, "Seed")->capture_default_str();
  gen_cmd->add_option("--samples", ga.samples, "Gaussian draws for C (default 2n)");
  gen_cmd->add_option("--constraint-fraction", ga.constraint_fraction,
                      "Fraction of truth zeros imposed as X_ij = 0");
  gen_cmd->add_option("--rho", ga.rho, "Uniform penalty written to the manifest")
      ->capture_default_str();
  gen_cmd->add_option("--mu", ga.mu, "Barrier weight")->capture_default_str();
  gen_cmd->add_option("--out-dir", ga.out_dir, "Output directory")->required();

  EvaluateArgs ea;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a solution against the truth");
  eval_cmd->add_option("--solution", ea.solution, "Estimated precision matrix file")->required();
  eval_cmd->add_option("--truth", ea.truth, "True precision matrix file")->required();
  eval_cmd->add_option("--threshold", ea.threshold, "Nonzero threshold")->capture_default_str();

  SweepArgs wa;
  auto* sweep_cmd = app.add_subcommand("sweep", "Solve over a grid of uniform rho values");
  sweep_cmd->add_option("--instance", wa.instance, "Instance manifest")->required();
  sweep_cmd->add_option("--rho-grid", wa.grid, "Comma-separated rho values")->required();
  sweep_cmd->add_option("--out", wa.out, "CSV path")->required();
  sweep_cmd->add_option("--threshold", wa.threshold, "Nonzero threshold")->capture_default_str();
  sweep_cmd->add_option("--parallel", wa.parallel, "Worker threads")->capture_default_str();
  sweep_cmd->add_flag("--timing", wa.timing, "Fill the time_s column (wall clock)");
  sweep_cmd->add_option("--eps", wa.eps, "Stopping tolerance")->capture_default_str();
  sweep_cmd->add_option("--max-iter", wa.max_iter, "Outer iteration cap")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "dspg: " << e.what() << '\n';
    return kExitBadInput;
  }

  try {
    if (*solve_cmd) return cmd_solve(sa, out);
    if (*gen_cmd) return cmd_generate(ga, out);
    if (*eval_cmd) return cmd_evaluate(ea, out);
    if (*sweep_cmd) return cmd_sweep(wa, out);
  } catch (const ParseError& e) {
    err << "dspg: parse error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const ValidationError& e) {
    err << "dspg: invalid input: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const NotPositiveDefinite& e) {
    err << "dspg: invalid input: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::invalid_argument& e) {
    err << "dspg: invalid argument: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "dspg: error: " << e.what() << '\n';
    return kExitBadInput;
  }
  return kExitBadInput;
}

}  // namespace dspg
