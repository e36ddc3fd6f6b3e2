#include "pathlangevin/kernels.hpp"
#include "pathlangevin/random.hpp"

#include <benchmark/benchmark.h>

using namespace pathlangevin;

namespace {

struct Fixture {
  explicit Fixture(int intervals)
      : grid(Grid::make(intervals)),
        spec(BridgeProblem{MatrixSet::make(Matrix::Zero(2, 2), Matrix::Identity(2, 2)),
                           make_double_well_potential(2, 1.0, 1.0), Vector::Constant(2, -1.0),
                           Vector::Constant(2, 1.0)}),
        model(spec, grid),
        path(intervals, 2),
        out(static_cast<Eigen::Index>(intervals + 1) * 2) {
    RandomStream rng(7);
    rng.fill_normal(path.values());
  }
  Grid grid;
  ProblemSpec spec;
  kernels::LogUModel model;
  Path path;
  Vector out;
};

void BM_LogUSerial(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::log_u(f.model, f.path));
}

void BM_LogUParallel(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::parallel::log_u(f.model, f.path));
}

void BM_GradientSerial(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    kernels::serial::log_u_gradient(f.model, f.path, 0, f.grid.intervals, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
}

void BM_GradientParallel(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    kernels::parallel::log_u_gradient(f.model, f.path, 0, f.grid.intervals, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
}

}  // namespace

BENCHMARK(BM_LogUSerial)->RangeMultiplier(8)->Range(64, 32768);
BENCHMARK(BM_LogUParallel)->RangeMultiplier(8)->Range(64, 32768);
BENCHMARK(BM_GradientSerial)->RangeMultiplier(8)->Range(64, 32768);
BENCHMARK(BM_GradientParallel)->RangeMultiplier(8)->Range(64, 32768);

BENCHMARK_MAIN();
