#include "helpers.hpp"

#include <doctest.h>

#include <omp.h>

using namespace testing;

namespace {

void check_bit_equal(const ProblemSpec& spec, int M, std::uint64_t seed) {
  const Grid grid = Grid::make(M);
  const kernels::LogUModel model(spec, grid);
  const int d = state_dim(spec);
  Path x(M, d);
  RandomStream rng(seed);
  rng.fill_normal(x.values());

  const double reference = kernels::serial::log_u(model, x);
  Vector ref_grad(static_cast<Eigen::Index>(M + 1) * d);
  kernels::serial::log_u_gradient(model, x, 0, M, ref_grad);
  Vector ref_inner(static_cast<Eigen::Index>(M - 1) * d);
  kernels::serial::log_u_gradient(model, x, 1, M - 1, ref_inner);

  const int saved = omp_get_max_threads();
  for (int threads : {1, 2, 3, 8}) {
    CAPTURE(threads);
    omp_set_num_threads(threads);
    CHECK(kernels::parallel::log_u(model, x) == reference);
    Vector grad(ref_grad.size());
    kernels::parallel::log_u_gradient(model, x, 0, M, grad);
    CHECK((grad.array() == ref_grad.array()).all());
    Vector inner(ref_inner.size());
    kernels::parallel::log_u_gradient(model, x, 1, M - 1, inner);
    CHECK((inner.array() == ref_inner.array()).all());
  }
  omp_set_num_threads(saved);
}

}  // namespace

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
  const auto dw2 = make_double_well_potential(2, 1.0, 1.5);
  for (int M : {8, kernels::kParallelNodeThreshold - 1, kernels::kParallelNodeThreshold + 1, 4096}) {
    CAPTURE(M);
    check_bit_equal(double_well_bridge(), M, 1);
    check_bit_equal(FreePathProblem{MatrixSet::make(coupled_A(), coupled_B()), dw2,
                                    Vector::Zero(2)},
                    M, 2);
    check_bit_equal(double_well_smoothing(M), M, 3);
  }
}

TEST_CASE("node values add up to log U") {
  const int M = 32;
  const Grid grid = Grid::make(M);
  const ProblemSpec spec = double_well_smoothing(M);
  const kernels::LogUModel model(spec, grid);
  Path x(M, 1);
  RandomStream rng(4);
  rng.fill_normal(x.values());
  kernels::Workspace ws(1);
  double sum = 0.0;
  for (int m = 0; m <= M; ++m) sum += model.node_value(m, x.node(m), ws);
  CHECK(sum == doctest::Approx(log_u(spec, grid, x)).epsilon(1e-14));
}
