#include "pathlangevin/model.hpp"
#include "pathlangevin/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pathlangevin {

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ValidationCheck& c) { return c.skipped || c.passed; });
}

namespace {

std::vector<Vector> sphere_directions(int dim, int count, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<Vector> dirs;
  dirs.reserve(count + 2 * dim);
  for (int k = 0; k < dim; ++k) {
    dirs.push_back(Vector::Unit(dim, k));
    dirs.push_back(-Vector::Unit(dim, k));
  }
  for (int i = 0; i < count; ++i) {
    Vector v(dim);
    do {
      rng.fill_normal(v);
    } while (v.norm() < 1e-8);
    dirs.push_back(v / v.norm());
  }
  return dirs;
}

ValidationCheck check_growth(const Potential& V, const std::vector<Vector>& dirs,
                             double floor) {
  ValidationCheck check;
  check.name = "growth (M)";
  const int p = V.degree();
  double worst = std::numeric_limits<double>::infinity();
  for (double radius : {10.0, 100.0}) {
    const double scale = std::pow(radius, 2 * p);
    for (const auto& xi : dirs) {
      worst = std::min(worst, V.value(radius * xi) / scale);
    }
  }
  check.statistic = worst;
  check.passed = std::isfinite(worst) && worst >= floor;
  std::ostringstream msg;
  msg << "min V(R xi)/R^" << 2 * p << " over R in {10, 100} = " << worst;
  check.detail = msg.str();
  return check;
}

// Leading quadratic form, exact when the potential knows it, otherwise the
// Hessian averaged over the R = 100 sphere.
Matrix leading_quadratic(const Potential& V, const std::vector<Vector>& dirs) {
  if (auto Q = V.leading_quadratic()) return *Q;
  Matrix Q = Matrix::Zero(V.dim(), V.dim());
  for (const auto& xi : dirs) Q += V.hessian(100.0 * xi);
  Q /= static_cast<double>(dirs.size());
  return 0.5 * (Q + Q.transpose());
}

ValidationCheck check_matrix_condition(const Potential& V, const MatrixSet& mats,
                                       const std::vector<Vector>& dirs) {
  ValidationCheck check;
  check.name = "matrix condition (Q)";
  if (V.degree() != 1) {
    check.skipped = true;
    check.detail = "p > 1: superlinear growth of f controls the linear part";
    return check;
  }
  const Matrix Q = leading_quadratic(V, dirs);
  Matrix S = Q * mats.A + mats.A.transpose() * Q - Q * mats.BBt * Q;
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S, Eigen::EigenvaluesOnly);
  check.statistic = eig.eigenvalues().maxCoeff();
  check.passed = check.statistic < 0.0;
  std::ostringstream msg;
  msg << "max eigenvalue of QA + A^T Q - Q BB^T Q = " << check.statistic;
  check.detail = msg.str();
  return check;
}

ValidationCheck check_log_alpha(const LogAlpha& log_alpha, const std::vector<Vector>& dirs,
                                double c) {
  ValidationCheck check;
  check.name = "log-alpha decay";
  double worst = -std::numeric_limits<double>::infinity();
  Vector grad(dirs.front().size());
  for (double radius : {2.0 * c, 10.0 * c}) {
    for (const auto& xi : dirs) {
      const Vector x = radius * xi;
      log_alpha.gradient(x, grad);
      const double branch = std::max(log_alpha.value(x), 0.5 * grad.dot(x));
      worst = std::max(worst, branch / (radius * radius));
    }
  }
  check.statistic = worst;
  check.passed = std::isfinite(worst) && worst < 0.0;
  std::ostringstream msg;
  msg << "max over sweep of max{log a, <grad log a, x>/2}/|x|^2 = " << worst
      << " (implied epsilon " << -worst << ")";
  check.detail = msg.str();
  return check;
}

}  // namespace

ValidationReport validate_problem(const ProblemSpec& spec, const ValidationOptions& options) {
  const Potential& V = potential_of(spec);
  const MatrixSet& mats = phi_matrices(spec);
  if (V.dim() != mats.dim()) throw ModelError("potential dimension does not match B");
  // Noise matrices were checked at construction; a zero smallest singular
  // value here means the spec was mutated after the fact.
  Eigen::JacobiSVD<Matrix> svd(mats.B);
  if (!(svd.singularValues().minCoeff() > 0.0)) throw ModelError("B is singular");

  const auto dirs = sphere_directions(V.dim(), options.directions, options.sweep_seed);
  ValidationReport report;
  report.checks.push_back(check_growth(V, dirs, options.growth_floor));
  report.checks.push_back(check_matrix_condition(V, mats, dirs));
  if (const auto* s = std::get_if<SmoothingProblem>(&spec)) {
    report.checks.push_back(check_log_alpha(*s->log_alpha, dirs, options.alpha_radius));
  }
  if (options.strict && !report.ok()) {
    std::ostringstream msg;
    msg << "problem validation failed:";
    for (const auto& c : report.checks) {
      if (!c.skipped && !c.passed) msg << " [" << c.name << ": " << c.detail << "]";
    }
    throw ValidationError(msg.str(), std::move(report));
  }
  return report;
}

}  // namespace pathlangevin
