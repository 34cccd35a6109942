// nvfem: command line driver for convergence, conditioning, comparison and
// quasilinear studies, plus single solves with full data dumps.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nvfem/experiments.hpp"

namespace fs = std::filesystem;
using namespace nvfem;

namespace {

struct Options {
  std::string problem;  // empty: per-command default
  int degree = 1;
  std::vector<int> levels;
  double K = 5000.0;
  double tol = 1e-10;
  int restart = 50;
  int maxiter = 0;
  std::string mode;
  std::string precond = "block";
  std::string out;
  double tol_factor = 1.0;
  std::vector<int> convergence_levels;
  bool check = false;
  bool deterministic = false;
  int n = 8;
};

RunConfig make_config(const Options& o, RunMode default_mode, std::vector<int> default_levels,
                      const std::string& default_problem = "test41") {
  RunConfig cfg;
  cfg.problem = o.problem.empty() ? default_problem : o.problem;
  cfg.params.K = o.K;
  cfg.degree = o.degree;
  cfg.levels = o.levels.empty() ? std::move(default_levels) : o.levels;
  cfg.solver.tol = o.tol;
  cfg.solver.restart = o.restart;
  cfg.solver.max_iterations = o.maxiter;
  static const std::map<std::string, Preconditioner> kinds = {
      {"none", Preconditioner::none},
      {"lumped", Preconditioner::lumped_mass},
      {"block", Preconditioner::block_triangular}};
  cfg.solver.preconditioner = kinds.at(o.precond);
  cfg.mode = o.mode.empty() ? default_mode : parse_run_mode(o.mode);
  cfg.tol_factor = o.tol_factor;
  cfg.convergence_levels = o.convergence_levels;
  cfg.output_dir = o.out;
  cfg.deterministic = o.deterministic;
  cfg.validate();
  return cfg;
}

// Prints gate lines to stderr, rewrites the manifest with them, and returns
// the process exit code.
int finish(const RunConfig& cfg, const std::string& command,
           const std::vector<std::string>& status, const std::vector<GateResult>& gates) {
  bool ok = true;
  for (const auto& g : gates) {
    std::cerr << (g.passed ? "PASS " : "FAIL ") << g.name << ": " << g.detail << '\n';
    ok = ok && g.passed;
  }
  if (!cfg.output_dir.empty()) write_manifest(cfg, command, status, gates);
  return ok ? 0 : 1;
}

int cmd_convergence(const Options& o) {
  const RunConfig cfg = make_config(o, RunMode::nvfem, default_levels(o.degree));
  const auto rows = run_convergence(cfg);
  write_convergence_csv(std::cout, rows);
  std::vector<std::string> status;
  for (const auto& r : rows) status.push_back(r.status);
  std::vector<GateResult> gates;
  if (o.check) gates.push_back(check_optimal_rates(rows, cfg.degree));
  return finish(cfg, "convergence", status, gates);
}

int cmd_condition(const Options& o) {
  const RunConfig cfg = make_config(o, RunMode::condition, {2, 4, 8, 16, 32});
  const ConditionTable table = run_condition(cfg);
  write_condition_csv(std::cout, table);
  if (table.truncated) {
    std::cerr << "note: levels from n=" << table.first_skipped << " exceed the dense guard\n";
  }
  std::vector<std::string> status(table.rows.size(), "ok");
  std::vector<GateResult> gates;
  if (o.check) gates.push_back(check_condition(table));
  return finish(cfg, "condition", status, gates);
}

int cmd_compare(const Options& o) {
  const RunConfig cfg = make_config(o, RunMode::nvfem, {32}, "test42");
  const CompareSummary s = run_compare(cfg);
  std::cout << "n,K,nvfem_max_error,fem_max_error,ratio,fem_status\n";
  std::cout.precision(10);
  std::cout << s.n << ',' << s.K << ',' << s.nvfem_max_error << ',' << s.fem_max_error << ','
            << s.ratio << ',' << (s.fem_diverged ? "diverged" : "ok") << '\n';
  std::vector<GateResult> gates;
  if (o.check) gates.push_back(check_compare(s));
  return finish(cfg, "compare", {s.fem_diverged ? "fem diverged" : "ok"}, gates);
}

int cmd_quasilinear(const Options& o) {
  const RunConfig cfg = make_config(o, RunMode::nvfem, {10, 20, 40, 80}, "mean_curvature");
  const QuasilinearReport report = run_quasilinear(cfg);
  write_quasilinear_csv(std::cout, report);
  if (!report.convergence.empty()) {
    std::cout << '\n';
    write_convergence_csv(std::cout, report.convergence);
  }
  std::vector<std::string> status;
  for (const auto& r : report.rows) status.push_back(r.status);
  std::vector<GateResult> gates;
  if (o.check) gates = check_quasilinear(report);
  return finish(cfg, "quasilinear", status, gates);
}

int cmd_solve(const Options& o) {
  Options single = o;
  single.levels = {o.n};
  const RunConfig cfg = make_config(single, RunMode::nvfem, {});
  if (cfg.output_dir.empty()) throw CLI::ValidationError("--out", "solve needs an output directory");
  const ProblemSpec problem = make_problem(parse_problem_id(cfg.problem), cfg.params);
  auto mesh = std::make_shared<const Mesh>(uniform_square_mesh(o.n));
  auto space = build_space(mesh, cfg.degree);
  const NvSystem sys =
      assemble_system(space, problem.coefficient_field(), problem.rhs, problem.boundary);
  const Solution sol = nvfem_solve(sys, cfg.solver);
  const Eigen::VectorXd u = sol.coefficients();

  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  write_mesh(dir / "mesh.txt", *mesh);
  {
    std::ofstream out(dir / "solution.dat");
    out.precision(17);
    out << "# x y u h11 h12 h21 h22\n";
    for (int i = 0; i < space->num_dofs(); ++i) {
      const Point& x = space->dof_coords()[i];
      out << x.x() << ' ' << x.y() << ' ' << u[i];
      for (const auto& h : sol.hessian) out << ' ' << h[i];
      out << '\n';
    }
  }
  write_coordinate(dir / "M.coo", sys.mass);
  for (int a = 0; a < kDim; ++a) {
    for (int b = 0; b < kDim; ++b) {
      const std::string ab = std::to_string(a + 1) + std::to_string(b + 1);
      write_coordinate(dir / ("B" + ab + ".coo"), sys.B[hessian_block(a, b)]);
      write_coordinate(dir / ("C" + ab + ".coo"), sys.C[hessian_block(a, b)]);
      write_coordinate(dir / ("Cb" + ab + ".coo"), sys.Cb[hessian_block(a, b)]);
    }
  }
  {
    std::ofstream out(dir / "load.dat");
    out.precision(17);
    out << sys.load << '\n';
    std::ofstream g(dir / "boundary.dat");
    g.precision(17);
    g << sys.boundary << '\n';
  }

  const ErrorNorms err = error_norms(*space, u, problem.exact_u, problem.exact_grad);
  std::cout << "n,p,problem,dofs,interior,iterations,residual,e0,e1\n";
  std::cout.precision(10);
  std::cout << o.n << ',' << cfg.degree << ',' << cfg.problem << ',' << space->num_dofs() << ','
            << space->num_interior() << ',' << sol.stats.iterations << ',' << sol.stats.residual
            << ',' << err.l2 << ',' << err.h1_semi << '\n';
  return finish(cfg, "solve", {"ok"}, {});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonvariational finite element experiments"};
  app.set_version_flag("--version", std::string(library_version()));
  app.set_config("--config", "", "key=value configuration file; command line flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--problem", o.problem,
                 "test41 | test42 | test43 | poisson (default test41; test42 for compare)");
  app.add_option("--p", o.degree, "polynomial degree (1 or 2)")->capture_default_str();
  app.add_option("--levels", o.levels, "comma separated subdivisions per side")->delimiter(',');
  app.add_option("--K", o.K, "steepness of the test42 coefficient")->capture_default_str();
  app.add_option("--tol", o.tol, "GMRES relative residual tolerance")->capture_default_str();
  app.add_option("--restart", o.restart, "GMRES restart length")->capture_default_str();
  app.add_option("--maxiter", o.maxiter, "GMRES iteration cap (0: 20 x system size)")->capture_default_str();
  app.add_option("--mode", o.mode,
                 "nvfem | standard-fem | quasilinear-variational | quasilinear-nonvariational");
  app.add_option("--precond", o.precond, "GMRES preconditioner")
      ->check(CLI::IsMember({"none", "lumped", "block"}))
      ->capture_default_str();
  app.add_option("--out", o.out, "output directory for data files and manifest.json");
  app.add_option("--tol-factor", o.tol_factor, "quasilinear stopping factor c in c h^2")->capture_default_str();
  app.add_option("--convergence-levels", o.convergence_levels,
                 "quasilinear: levels of the nonvariational convergence sweep")
      ->delimiter(',');
  app.add_flag("--check", o.check, "evaluate acceptance gates; exit code 1 if any fails");
  app.add_flag("--deterministic", o.deterministic, "write zero timings so outputs are reproducible");

  auto* convergence = app.add_subcommand("convergence", "error and EOC table over a refinement sweep");
  auto* condition = app.add_subcommand("condition", "condition numbers of the block matrix");
  auto* compare = app.add_subcommand("compare", "NVFEM against the divergence-form FEM (test42)");
  auto* quasilinear = app.add_subcommand("quasilinear", "fixed point stagnation table");
  auto* solve = app.add_subcommand("solve", "single solve with mesh, solution and matrix dumps");
  solve->add_option("--n", o.n, "subdivisions per side")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*convergence) return cmd_convergence(o);
    if (*condition) return cmd_condition(o);
    if (*compare) return cmd_compare(o);
    if (*quasilinear) return cmd_quasilinear(o);
    if (*solve) return cmd_solve(o);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
