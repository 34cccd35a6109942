#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nvfem/linsolve.hpp"
#include "nvfem/problems.hpp"
#include "nvfem/quasilinear.hpp"

namespace nvfem {

enum class RunMode {
  nvfem,
  standard_fem,
  quasilinear_variational,
  quasilinear_nonvariational,
  condition,
};

RunMode parse_run_mode(std::string_view name);
std::string_view to_string(RunMode mode);

/// Everything one sweep needs. `problem` is a ProblemId name, or
/// "mean_curvature" for the quasilinear modes.
struct RunConfig {
  std::string problem = "test41";
  ProblemParams params;
  int degree = 1;
  std::vector<int> levels;
  SolveOptions solver;
  RunMode mode = RunMode::nvfem;
  /// Quasilinear stopping factor: stop when ||U^k - U^{k-1}|| <= tol_factor h^2.
  double tol_factor = 1.0;
  /// Optional nonvariational convergence sweep run by run_quasilinear.
  std::vector<int> convergence_levels;
  double convergence_tol_factor = 1e-6;
  std::filesystem::path output_dir;
  /// Zero all wall-clock columns so outputs are byte-reproducible.
  bool deterministic = false;

  /// Throws std::invalid_argument on an empty or non-increasing level list
  /// or a degree outside {1, 2}.
  void validate() const;
};

/// Default refinement sweep per degree: {8,16,32,64} for P1, {4,8,16,32} for P2.
std::vector<int> default_levels(int degree);

/// One refinement level of a convergence study.
struct ConvergenceRow {
  int n = 0;
  double h = 0.0;
  int dofs = 0;
  int interior = 0;
  double e0 = 0.0;
  double e1 = 0.0;
  std::optional<double> eoc0;
  std::optional<double> eoc1;
  int iterations = 0;   // GMRES iterations, or fixed-point iterations for quasilinear modes
  double residual = 0.0;
  double seconds = 0.0;
  std::string status = "ok";
};

/// log(e_prev / e_curr) / log(h_prev / h_curr); empty unless both errors are positive.
std::optional<double> eoc(double e_prev, double e_curr, double h_prev, double h_curr);

std::vector<ConvergenceRow> run_convergence(const RunConfig& cfg);

struct ConditionRow {
  int n = 0;
  double h = 0.0;
  int dofs = 0;
  int size = 0;   // d^2 N + N_interior
  double kappa = 0.0;
  double scaled = 0.0;  // h^2 kappa
};

struct ConditionTable {
  std::vector<ConditionRow> rows;
  bool truncated = false;  // a level exceeded the dense guard
  int first_skipped = 0;
};

ConditionTable run_condition(const RunConfig& cfg);

struct CompareSummary {
  int n = 0;
  double K = 0.0;
  double nvfem_max_error = 0.0;
  double fem_max_error = 0.0;
  double ratio = 0.0;  // fem / nvfem; infinity when the standard FEM diverged
  bool fem_diverged = false;
  std::vector<double> nvfem_cell_error;  // max |u - U| per cell
  std::vector<double> fem_cell_error;
};

/// NVFEM vs. standard FEM on the finest configured level.
CompareSummary run_compare(const RunConfig& cfg);

struct QuasilinearRow {
  int n = 0;
  double h = 0.0;
  Linearization mode = Linearization::nonvariational;
  int stagnation_point = 0;
  double seconds = 0.0;
  double e0 = 0.0;
  double e1 = 0.0;
  std::string status = "ok";
};

struct QuasilinearReport {
  int degree = 1;
  std::vector<QuasilinearRow> rows;
  std::vector<ConvergenceRow> convergence;
};

/// Stagnation table over cfg.levels. Runs both linearizations unless
/// cfg.mode selects one of them.
QuasilinearReport run_quasilinear(const RunConfig& cfg);

// Acceptance gates shared with the command line driver.

struct GateResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Final-level EOC inside the optimal-rate window for the degree.
GateResult check_optimal_rates(const std::vector<ConvergenceRow>& rows, int degree);
GateResult check_condition(const ConditionTable& table);
GateResult check_compare(const CompareSummary& summary, double min_ratio = 5.0);
std::vector<GateResult> check_quasilinear(const QuasilinearReport& report);

// Output.

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);
/// Whitespace columns `h e0 e1` for log-log plotting.
void write_convergence_dat(std::ostream& out, const std::vector<ConvergenceRow>& rows);
void write_solver_csv(std::ostream& out, const RunConfig& cfg,
                      const std::vector<ConvergenceRow>& rows);
void write_condition_csv(std::ostream& out, const ConditionTable& table);
void write_quasilinear_csv(std::ostream& out, const QuasilinearReport& report);
void write_cell_errors(std::ostream& out, const CompareSummary& summary);

/// Writes `manifest.json` into cfg.output_dir: config echo, library version,
/// per-row status and gate outcomes.
void write_manifest(const RunConfig& cfg, const std::string& command,
                    const std::vector<std::string>& row_status,
                    const std::vector<GateResult>& gates);

std::string_view library_version();

}  // namespace nvfem
