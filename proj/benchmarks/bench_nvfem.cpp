#include <benchmark/benchmark.h>

#include "nvfem/linsolve.hpp"
#include "nvfem/problems.hpp"

namespace {

using namespace nvfem;

NvSystem make_system(int n, int p) {
  const ProblemSpec prob = make_problem(ProblemId::test42);
  return assemble_system(build_space(uniform_square_mesh(n), p), prob.coefficient_field(), prob.rhs,
                         prob.boundary);
}

void BM_AssembleSystem(benchmark::State& state) {
  const ProblemSpec prob = make_problem(ProblemId::test42);
  const auto space = build_space(uniform_square_mesh(static_cast<int>(state.range(0))),
                                 static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        assemble_system(space, prob.coefficient_field(), prob.rhs, prob.boundary));
  }
  state.counters["dofs"] = space->num_dofs();
}
BENCHMARK(BM_AssembleSystem)->ArgsProduct({{16, 32, 64}, {1, 2}})->Unit(benchmark::kMillisecond);

void BM_BlockApply(benchmark::State& state) {
  const NvSystem sys = make_system(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const BlockOperator op(sys);
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(op.size(), -1.0, 1.0);
  Eigen::VectorXd out;
  for (auto _ : state) {
    op.apply(v, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["size"] = static_cast<double>(op.size());
}
BENCHMARK(BM_BlockApply)->ArgsProduct({{16, 32, 64}, {1, 2}})->Unit(benchmark::kMicrosecond);

void BM_NvfemSolve(benchmark::State& state) {
  const NvSystem sys = make_system(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  SolveOptions opts;
  opts.preconditioner = static_cast<Preconditioner>(state.range(2));
  int iterations = 0;
  for (auto _ : state) {
    const Solution sol = nvfem_solve(sys, opts);
    iterations = sol.stats.iterations;
    benchmark::DoNotOptimize(sol.u_interior.data());
  }
  state.counters["gmres_iterations"] = iterations;
}
BENCHMARK(BM_NvfemSolve)
    ->Args({16, 1, static_cast<int>(Preconditioner::none)})
    ->Args({16, 1, static_cast<int>(Preconditioner::lumped_mass)})
    ->Args({16, 1, static_cast<int>(Preconditioner::block_triangular)})
    ->Args({32, 1, static_cast<int>(Preconditioner::block_triangular)})
    ->Args({64, 1, static_cast<int>(Preconditioner::block_triangular)})
    ->Args({32, 2, static_cast<int>(Preconditioner::block_triangular)})
    ->Unit(benchmark::kMillisecond);

void BM_DenseSchur(benchmark::State& state) {
  const NvSystem sys = make_system(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(dense_schur_solve(sys).data());
}
BENCHMARK(BM_DenseSchur)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
