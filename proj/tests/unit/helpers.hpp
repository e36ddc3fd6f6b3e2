#pragma once

#include "pathlangevin/measure.hpp"
#include "pathlangevin/model.hpp"
#include "pathlangevin/oracle.hpp"
#include "pathlangevin/random.hpp"

#include <cmath>

namespace testing {

using namespace pathlangevin;

inline Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }
inline Vector vec1(double v) { return Vector::Constant(1, v); }

inline BridgeProblem brownian_bridge(double left = 0.0, double right = 0.0) {
  return {MatrixSet::make(scalar(0.0), scalar(1.0)), make_zero_potential(1), vec1(left),
          vec1(right)};
}

inline BridgeProblem double_well_bridge(double left = -1.0, double right = 1.0) {
  return {MatrixSet::make(scalar(0.0), scalar(1.0)), make_double_well_potential(1, 1.0, 1.0),
          vec1(left), vec1(right)};
}

inline BridgeProblem ou_bridge(double left = 0.0, double right = 0.0) {
  return {MatrixSet::make(scalar(0.0), scalar(1.0)), make_quadratic_potential(scalar(1.0)),
          vec1(left), vec1(right)};
}

inline FreePathProblem free_path(PotentialPtr V, double start = 0.0, double a = 0.0) {
  return {MatrixSet::make(scalar(a), scalar(1.0)), std::move(V), vec1(start)};
}

/// Two-dimensional problems with non-trivial A and B.
inline Matrix coupled_A() {
  Matrix A(2, 2);
  A << -0.3, 0.2, 0.1, -0.4;
  return A;
}
inline Matrix coupled_B() {
  Matrix B(2, 2);
  B << 1.0, 0.0, 0.3, 0.8;
  return B;
}

inline Observations synthetic_observations(int intervals, int dim, std::uint64_t seed,
                                           double slope = 0.5) {
  RandomStream rng(seed);
  Matrix dy(intervals, dim);
  const double du = 1.0 / intervals;
  for (int m = 0; m < intervals; ++m) {
    for (int k = 0; k < dim; ++k) dy(m, k) = slope * du + std::sqrt(du) * rng.normal();
  }
  return Observations::from_increments(dy);
}

inline SmoothingProblem linear_smoothing(int intervals, std::uint64_t seed = 3) {
  return SmoothingProblem::make(scalar(1.0), scalar(1.0), scalar(1.0),
                                make_quadratic_potential(scalar(1.0)),
                                make_gaussian_log_alpha(scalar(1.0)),
                                synthetic_observations(intervals, 1, seed));
}

inline SmoothingProblem double_well_smoothing(int intervals, std::uint64_t seed = 3) {
  auto V = make_double_well_potential(1, 1.0, 1.0);
  return SmoothingProblem::make(scalar(1.0), scalar(1.0), scalar(0.5), V,
                                make_stationary_log_alpha(V),
                                synthetic_observations(intervals, 1, seed, 0.8));
}

inline Path random_path(const DiscreteOperator& op, RandomStream& rng, double scale = 1.0) {
  Vector free(op.unknowns());
  rng.fill_normal(free);
  return op.embed(scale * free);
}

/// Central differences of the target log density in the free unknowns.
inline Vector fd_gradient(const TargetMeasure& target, const Path& x, double h = 1e-5) {
  const auto& op = target.op();
  Vector out(op.unknowns());
  Path p = x;
  for (Eigen::Index i = 0; i < op.unknowns(); ++i) {
    const Eigen::Index j = static_cast<Eigen::Index>(op.first_free) * op.dim + i;
    const double x0 = p.values()[j];
    p.values()[j] = x0 + h;
    const double fp = target.log_density(p);
    p.values()[j] = x0 - h;
    const double fm = target.log_density(p);
    p.values()[j] = x0;
    out[i] = (fp - fm) / (2.0 * h);
  }
  return out;
}

/// Sample covariance of the rows of `x`.
inline Matrix sample_covariance(const Matrix& x) {
  const Vector mean = x.colwise().mean();
  const Matrix c = x.rowwise() - mean.transpose();
  return c.transpose() * c / static_cast<double>(x.rows() - 1);
}

/// Standard error of the (i, j) entry of a sample covariance of Gaussian
/// draws: sqrt((S_ii S_jj + S_ij^2) / n).
inline double covariance_se(const Matrix& S, Eigen::Index i, Eigen::Index j, double n) {
  return std::sqrt((S(i, i) * S(j, j) + S(i, j) * S(i, j)) / n);
}

}  // namespace testing
