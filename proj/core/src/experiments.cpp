#include "nvfem/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "nvfem/quadrature.hpp"

#ifndef NVFEM_VERSION
#define NVFEM_VERSION "unknown"
#endif

namespace nvfem {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  return out;
}

bool is_quasilinear(RunMode mode) {
  return mode == RunMode::quasilinear_variational || mode == RunMode::quasilinear_nonvariational;
}

Linearization linearization_of(RunMode mode) {
  return mode == RunMode::quasilinear_variational ? Linearization::variational
                                                  : Linearization::nonvariational;
}

std::string_view to_string(Linearization mode) {
  return mode == Linearization::variational ? "variational" : "nonvariational";
}

ProblemSpec problem_for(const RunConfig& cfg) {
  if (is_quasilinear(cfg.mode) || cfg.problem == "mean_curvature") return mean_curvature_problem();
  return make_problem(parse_problem_id(cfg.problem), cfg.params);
}

// Max of |u - U| over the dof nodes and volume quadrature points of each cell.
std::vector<double> cell_max_errors(const FeSpace& space, const Eigen::VectorXd& coeffs,
                                    const ScalarField& u) {
  const auto& quad = triangle_quadrature(space.volume_quadrature_degree());
  std::vector<double> out(space.mesh().num_cells(), 0.0);
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    double worst = 0.0;
    for (int dof : space.cell_dofs(c)) {
      worst = std::max(worst, std::abs(u(space.dof_coords()[dof]) - coeffs[dof]));
    }
    const CellGeometry geom(space.mesh(), c);
    for (const auto& bary : quad.points) {
      worst = std::max(worst, std::abs(u(geom.map(bary)) - fe_value(space, coeffs, c, bary)));
    }
    out[c] = worst;
  }
  return out;
}

double max_nodal_error(const FeSpace& space, const Eigen::VectorXd& coeffs, const ScalarField& u) {
  double worst = 0.0;
  for (int i = 0; i < space.num_dofs(); ++i) {
    worst = std::max(worst, std::abs(u(space.dof_coords()[i]) - coeffs[i]));
  }
  return worst;
}

void fill_eoc(std::vector<ConvergenceRow>& rows) {
  const ConvergenceRow* prev = nullptr;
  for (auto& row : rows) {
    if (row.status != "ok") continue;
    if (prev) {
      row.eoc0 = eoc(prev->e0, row.e0, prev->h, row.h);
      row.eoc1 = eoc(prev->e1, row.e1, prev->h, row.h);
    }
    prev = &row;
  }
}

std::string format_optional(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream s;
  s.precision(6);
  s << *v;
  return s.str();
}

nlohmann::json config_json(const RunConfig& cfg) {
  return {{"problem", cfg.problem},
          {"K", cfg.params.K},
          {"p", cfg.degree},
          {"levels", cfg.levels},
          {"mode", std::string(to_string(cfg.mode))},
          {"tol", cfg.solver.tol},
          {"restart", cfg.solver.restart},
          {"maxiter", cfg.solver.max_iterations},
          {"tol_factor", cfg.tol_factor},
          {"convergence_levels", cfg.convergence_levels},
          {"deterministic", cfg.deterministic}};
}

}  // namespace

RunMode parse_run_mode(std::string_view name) {
  if (name == "nvfem") return RunMode::nvfem;
  if (name == "standard-fem") return RunMode::standard_fem;
  if (name == "quasilinear-variational") return RunMode::quasilinear_variational;
  if (name == "quasilinear-nonvariational") return RunMode::quasilinear_nonvariational;
  if (name == "condition") return RunMode::condition;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::nvfem: return "nvfem";
    case RunMode::standard_fem: return "standard-fem";
    case RunMode::quasilinear_variational: return "quasilinear-variational";
    case RunMode::quasilinear_nonvariational: return "quasilinear-nonvariational";
    case RunMode::condition: return "condition";
  }
  return "unknown";
}

void RunConfig::validate() const {
  if (degree != 1 && degree != 2) throw std::invalid_argument("degree must be 1 or 2");
  if (levels.empty()) throw std::invalid_argument("refinement list is empty");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 1) throw std::invalid_argument("refinement levels must be positive");
    if (i > 0 && levels[i] <= levels[i - 1]) {
      throw std::invalid_argument("refinement list must be strictly increasing");
    }
  }
  for (std::size_t i = 1; i < convergence_levels.size(); ++i) {
    if (convergence_levels[i] <= convergence_levels[i - 1]) {
      throw std::invalid_argument("convergence levels must be strictly increasing");
    }
  }
}

std::vector<int> default_levels(int degree) {
  return degree == 1 ? std::vector<int>{8, 16, 32, 64} : std::vector<int>{4, 8, 16, 32};
}

std::optional<double> eoc(double e_prev, double e_curr, double h_prev, double h_curr) {
  if (!(e_prev > 0.0) || !(e_curr > 0.0) || h_prev == h_curr) return std::nullopt;
  const double value = std::log(e_prev / e_curr) / std::log(h_prev / h_curr);
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

std::vector<ConvergenceRow> run_convergence(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.mode == RunMode::condition) {
    throw std::invalid_argument("run_convergence: use run_condition for condition mode");
  }
  const ProblemSpec problem = problem_for(cfg);
  if (!problem.exact_u) throw std::invalid_argument("run_convergence: no exact solution");

  std::vector<ConvergenceRow> rows;
  for (int n : cfg.levels) {
    ConvergenceRow row;
    row.n = n;
    const auto start = Clock::now();
    try {
      auto mesh = std::make_shared<const Mesh>(uniform_square_mesh(n));
      row.h = mesh_metrics(*mesh).h;
      auto space = build_space(mesh, cfg.degree);
      row.dofs = space->num_dofs();
      row.interior = space->num_interior();

      Eigen::VectorXd coeffs;
      switch (cfg.mode) {
        case RunMode::nvfem: {
          const NvSystem sys = assemble_system(space, problem.coefficient_field(), problem.rhs,
                                               problem.boundary);
          const Solution sol = nvfem_solve(sys, cfg.solver);
          row.iterations = sol.stats.iterations;
          row.residual = sol.stats.residual;
          coeffs = sol.coefficients();
          break;
        }
        case RunMode::standard_fem:
          coeffs = standard_fem_solve(problem, *space);
          break;
        case RunMode::quasilinear_variational:
        case RunMode::quasilinear_nonvariational: {
          QuasilinearOptions opts;
          opts.mode = linearization_of(cfg.mode);
          opts.tol_factor = cfg.tol_factor;
          opts.solver = cfg.solver;
          const auto result = quasilinear_solve(space, problem.rhs, opts);
          row.iterations = result.stagnation_point;
          row.residual = result.history.back();
          coeffs = result.coefficients;
          break;
        }
        case RunMode::condition:
          break;
      }
      const ErrorNorms err = error_norms(*space, coeffs, problem.exact_u, problem.exact_grad);
      row.e0 = err.l2;
      row.e1 = err.h1_semi;
    } catch (const std::exception& e) {
      row.status = e.what();
    }
    row.seconds = cfg.deterministic ? 0.0 : elapsed(start);
    rows.push_back(row);
  }
  fill_eoc(rows);

  if (!cfg.output_dir.empty()) {
    auto csv = open_output(cfg.output_dir, "convergence.csv");
    write_convergence_csv(csv, rows);
    auto dat = open_output(cfg.output_dir, "convergence.dat");
    write_convergence_dat(dat, rows);
    auto solver = open_output(cfg.output_dir, "solver.csv");
    write_solver_csv(solver, cfg, rows);
    std::vector<std::string> status;
    for (const auto& r : rows) status.push_back(r.status);
    write_manifest(cfg, "convergence", status, {});
  }
  return rows;
}

ConditionTable run_condition(const RunConfig& cfg) {
  cfg.validate();
  const ProblemSpec problem = problem_for(cfg);
  ConditionTable table;
  for (int n : cfg.levels) {
    auto mesh = std::make_shared<const Mesh>(uniform_square_mesh(n));
    auto space = build_space(mesh, cfg.degree);
    const int size = kHessianBlocks * space->num_dofs() + space->num_interior();
    if (size > kDenseGuard) {
      table.truncated = true;
      table.first_skipped = n;
      break;
    }
    const NvSystem sys =
        assemble_system(space, problem.coefficient_field(), problem.rhs, problem.boundary);
    ConditionRow row;
    row.n = n;
    row.h = mesh_metrics(*mesh).h;
    row.dofs = space->num_dofs();
    row.size = size;
    row.kappa = condition_estimate(sys);
    row.scaled = row.h * row.h * row.kappa;
    table.rows.push_back(row);
  }
  if (!cfg.output_dir.empty()) {
    auto csv = open_output(cfg.output_dir, "condition.csv");
    write_condition_csv(csv, table);
    std::vector<std::string> status(table.rows.size(), "ok");
    if (table.truncated) status.push_back("skipped: n=" + std::to_string(table.first_skipped));
    write_manifest(cfg, "condition", status, {});
  }
  return table;
}

CompareSummary run_compare(const RunConfig& cfg) {
  cfg.validate();
  const ProblemSpec problem = problem_for(cfg);
  CompareSummary s;
  s.n = cfg.levels.back();
  s.K = cfg.params.K;
  auto space = build_space(uniform_square_mesh(s.n), cfg.degree);

  const NvSystem sys =
      assemble_system(space, problem.coefficient_field(), problem.rhs, problem.boundary);
  const Eigen::VectorXd nv = nvfem_solve(sys, cfg.solver).coefficients();
  s.nvfem_max_error = max_nodal_error(*space, nv, problem.exact_u);
  s.nvfem_cell_error = cell_max_errors(*space, nv, problem.exact_u);

  try {
    const Eigen::VectorXd fem = standard_fem_solve(problem, *space);
    s.fem_max_error = max_nodal_error(*space, fem, problem.exact_u);
    s.fem_cell_error = cell_max_errors(*space, fem, problem.exact_u);
    s.ratio = s.fem_max_error / s.nvfem_max_error;
  } catch (const Error&) {
    s.fem_diverged = true;
    s.fem_max_error = std::numeric_limits<double>::infinity();
    s.ratio = std::numeric_limits<double>::infinity();
  }

  if (!cfg.output_dir.empty()) {
    auto cells = open_output(cfg.output_dir, "cell_errors.dat");
    write_cell_errors(cells, s);
    auto csv = open_output(cfg.output_dir, "compare.csv");
    csv << "n,K,nvfem_max_error,fem_max_error,ratio,fem_status\n";
    csv.precision(10);
    csv << s.n << ',' << s.K << ',' << s.nvfem_max_error << ',' << s.fem_max_error << ','
        << s.ratio << ',' << (s.fem_diverged ? "diverged" : "ok") << '\n';
    write_manifest(cfg, "compare", {s.fem_diverged ? "fem diverged" : "ok"}, {});
  }
  return s;
}

QuasilinearReport run_quasilinear(const RunConfig& cfg) {
  cfg.validate();
  const ProblemSpec problem = mean_curvature_problem();
  std::vector<Linearization> modes;
  if (is_quasilinear(cfg.mode)) {
    modes.push_back(linearization_of(cfg.mode));
  } else {
    modes = {Linearization::variational, Linearization::nonvariational};
  }

  QuasilinearReport report;
  report.degree = cfg.degree;
  for (int n : cfg.levels) {
    auto mesh = std::make_shared<const Mesh>(uniform_square_mesh(n));
    auto space = build_space(mesh, cfg.degree);
    for (Linearization mode : modes) {
      QuasilinearRow row;
      row.n = n;
      row.h = mesh_metrics(*mesh).h;
      row.mode = mode;
      const auto start = Clock::now();
      try {
        QuasilinearOptions opts;
        opts.mode = mode;
        opts.tol_factor = cfg.tol_factor;
        opts.solver = cfg.solver;
        const auto result = quasilinear_solve(space, problem.rhs, opts);
        row.stagnation_point = result.stagnation_point;
        const auto err =
            error_norms(*space, result.coefficients, problem.exact_u, problem.exact_grad);
        row.e0 = err.l2;
        row.e1 = err.h1_semi;
      } catch (const std::exception& e) {
        row.status = e.what();
      }
      row.seconds = cfg.deterministic ? 0.0 : elapsed(start);
      report.rows.push_back(row);
    }
  }

  if (!cfg.convergence_levels.empty()) {
    RunConfig sweep = cfg;
    sweep.mode = RunMode::quasilinear_nonvariational;
    sweep.levels = cfg.convergence_levels;
    sweep.tol_factor = cfg.convergence_tol_factor;
    sweep.output_dir.clear();
    report.convergence = run_convergence(sweep);
  }

  if (!cfg.output_dir.empty()) {
    auto csv = open_output(cfg.output_dir, "quasilinear.csv");
    write_quasilinear_csv(csv, report);
    if (!report.convergence.empty()) {
      auto conv = open_output(cfg.output_dir, "convergence.csv");
      write_convergence_csv(conv, report.convergence);
      auto dat = open_output(cfg.output_dir, "convergence.dat");
      write_convergence_dat(dat, report.convergence);
    }
    std::vector<std::string> status;
    for (const auto& r : report.rows) status.push_back(r.status);
    write_manifest(cfg, "quasilinear", status, {});
  }
  return report;
}

GateResult check_optimal_rates(const std::vector<ConvergenceRow>& rows, int degree) {
  GateResult g;
  g.name = "optimal rates P" + std::to_string(degree);
  for (const auto& r : rows) {
    if (r.status != "ok") {
      g.detail = "level n=" + std::to_string(r.n) + " failed: " + r.status;
      return g;
    }
  }
  if (rows.size() < 2 || !rows.back().eoc0 || !rows.back().eoc1) {
    g.detail = "need at least two successful levels";
    return g;
  }
  const double l2_lo = degree == 1 ? 1.8 : 2.7, l2_hi = degree == 1 ? 2.2 : 3.3;
  const double h1_lo = degree == 1 ? 0.85 : 1.8, h1_hi = degree == 1 ? 1.15 : 2.2;
  const double e0 = *rows.back().eoc0, e1 = *rows.back().eoc1;
  g.passed = e0 >= l2_lo && e0 <= l2_hi && e1 >= h1_lo && e1 <= h1_hi;
  std::ostringstream s;
  s << "final eoc L2 " << e0 << " in [" << l2_lo << ", " << l2_hi << "], H1 " << e1 << " in ["
    << h1_lo << ", " << h1_hi << "]";
  g.detail = s.str();
  return g;
}

GateResult check_condition(const ConditionTable& table) {
  GateResult g;
  g.name = "conditioning h^2 kappa";
  if (table.rows.size() < 2) {
    g.detail = "need at least two levels";
    return g;
  }
  std::ostringstream s;
  bool ok = true;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    s << "n=" << r.n << " h2k=" << r.scaled << ' ';
    ok = ok && r.scaled >= 5.0 && r.scaled <= 80.0;
    if (i > 0) {
      const double ratio = r.scaled / table.rows[i - 1].scaled;
      ok = ok && ratio >= 0.5 && ratio <= 2.0 && r.kappa > table.rows[i - 1].kappa;
    }
  }
  g.passed = ok;
  g.detail = s.str();
  return g;
}

GateResult check_compare(const CompareSummary& summary, double min_ratio) {
  GateResult g;
  g.name = "standard FEM / NVFEM max nodal error";
  g.passed = summary.ratio >= min_ratio;
  std::ostringstream s;
  s << "ratio " << summary.ratio << " (fem " << summary.fem_max_error << ", nvfem "
    << summary.nvfem_max_error << "), need >= " << min_ratio;
  g.detail = s.str();
  return g;
}

std::vector<GateResult> check_quasilinear(const QuasilinearReport& report) {
  std::vector<int> nv, var;
  for (const auto& r : report.rows) {
    const int value = r.status == "ok" ? r.stagnation_point : -1;
    (r.mode == Linearization::nonvariational ? nv : var).push_back(value);
  }
  std::vector<GateResult> gates;
  const int reference[] = {4, 6, 7, 8};

  if (!nv.empty()) {
    GateResult g{"nonvariational stagnation points", true, ""};
    std::ostringstream s;
    for (std::size_t i = 0; i < nv.size() && i < 4; ++i) {
      s << nv[i] << " (ref " << reference[i] << ") ";
      g.passed = g.passed && nv[i] > 0 && std::abs(nv[i] - reference[i]) <= 2;
    }
    g.detail = s.str();
    gates.push_back(g);

    GateResult mono{"nonvariational stagnation nondecreasing", true, ""};
    for (std::size_t i = 1; i < nv.size(); ++i) {
      mono.passed = mono.passed && nv[i] > 0 && nv[i] >= nv[i - 1];
    }
    gates.push_back(mono);
  }
  if (!nv.empty() && nv.size() == var.size()) {
    GateResult g{"variational exceeds nonvariational", true, ""};
    std::ostringstream s;
    for (std::size_t i = 1; i < nv.size(); ++i) {
      s << var[i] << '>' << nv[i] << ' ';
      g.passed = g.passed && nv[i] > 0 && var[i] > nv[i];
    }
    g.detail = s.str();
    gates.push_back(g);
  }
  if (!report.convergence.empty()) {
    gates.push_back(check_optimal_rates(report.convergence, report.degree));
  }
  return gates;
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << "n,h,dofs,interior,e0,e1,eoc0,eoc1,iterations,residual,seconds,status\n";
  const auto old = out.precision(10);
  for (const auto& r : rows) {
    out << r.n << ',' << r.h << ',' << r.dofs << ',' << r.interior << ',' << r.e0 << ',' << r.e1
        << ',' << format_optional(r.eoc0) << ',' << format_optional(r.eoc1) << ','
        << r.iterations << ',' << r.residual << ',' << r.seconds << ',' << '"' << r.status << '"'
        << '\n';
  }
  out.precision(old);
}

void write_convergence_dat(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << "# h e0 e1\n";
  const auto old = out.precision(10);
  for (const auto& r : rows) {
    if (r.status == "ok") out << r.h << ' ' << r.e0 << ' ' << r.e1 << '\n';
  }
  out.precision(old);
}

void write_solver_csv(std::ostream& out, const RunConfig& cfg,
                      const std::vector<ConvergenceRow>& rows) {
  out << "n,p,problem,dofs,iterations,residual,seconds\n";
  const auto old = out.precision(10);
  for (const auto& r : rows) {
    out << r.n << ',' << cfg.degree << ',' << cfg.problem << ','
        << kHessianBlocks * r.dofs + r.interior << ',' << r.iterations << ',' << r.residual << ','
        << r.seconds << '\n';
  }
  out.precision(old);
}

void write_condition_csv(std::ostream& out, const ConditionTable& table) {
  out << "n,dofs,size,h,kappa,h2_kappa\n";
  const auto old = out.precision(10);
  for (const auto& r : table.rows) {
    out << r.n << ',' << r.dofs << ',' << r.size << ',' << r.h << ',' << r.kappa << ','
        << r.scaled << '\n';
  }
  out.precision(old);
}

void write_quasilinear_csv(std::ostream& out, const QuasilinearReport& report) {
  out << "n,h,mode,stagnation_point,seconds,e0,e1,status\n";
  const auto old = out.precision(10);
  for (const auto& r : report.rows) {
    out << r.n << ',' << r.h << ',' << to_string(r.mode) << ',' << r.stagnation_point << ','
        << r.seconds << ',' << r.e0 << ',' << r.e1 << ',' << '"' << r.status << '"' << '\n';
  }
  out.precision(old);
}

void write_cell_errors(std::ostream& out, const CompareSummary& s) {
  out << "# cell nvfem_error fem_error\n";
  const auto old = out.precision(10);
  for (std::size_t c = 0; c < s.nvfem_cell_error.size(); ++c) {
    out << c << ' ' << s.nvfem_cell_error[c] << ' '
        << (c < s.fem_cell_error.size() ? s.fem_cell_error[c]
                                        : std::numeric_limits<double>::infinity())
        << '\n';
  }
  out.precision(old);
}

void write_manifest(const RunConfig& cfg, const std::string& command,
                    const std::vector<std::string>& row_status,
                    const std::vector<GateResult>& gates) {
  nlohmann::json j;
  j["command"] = command;
  j["version"] = std::string(library_version());
  j["config"] = config_json(cfg);
  j["rows"] = row_status;
  j["gates"] = nlohmann::json::array();
  for (const auto& g : gates) {
    j["gates"].push_back({{"name", g.name}, {"passed", g.passed}, {"detail", g.detail}});
  }
  auto out = open_output(cfg.output_dir, "manifest.json");
  out << j.dump(2) << '\n';
}

std::string_view library_version() { return NVFEM_VERSION; }

}  // namespace nvfem
