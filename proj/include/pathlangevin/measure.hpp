#pragma once

#include "pathlangevin/kernels.hpp"
#include "pathlangevin/model.hpp"
#include "pathlangevin/operators.hpp"

#include <memory>

namespace pathlangevin {

/// Phi(x) = (|B^T grad V(x)|^2 - BB^T : D^2 V(x)) / 2
double capital_phi(const Potential& V, const MatrixSet& mats, ConstVecRef x);
/// grad Phi(x) = D^2V(x) BB^T grad V(x) - T(x; BB^T) / 2
Vector grad_phi(const Potential& V, const MatrixSet& mats, ConstVecRef x);

/// Log of the density of the nonlinear SDE path law with respect to the
/// linear one, up to normalization:
///   -V(w(1)) + sum_m w_m <grad V(w_m), A w_m> - sum_m w_m Phi(w_m).
/// Free-path and bridge problems only.
double girsanov_log_density(const ProblemSpec& spec, const Grid& grid, const Path& path);

/// Non-Gaussian part of the discrete log target:
///   free path: -V(x_M) + sum w_m (<grad V, A x> - Phi)(x_m)
///   bridge:     sum w_m (<grad V, A x> - Phi)(x_m)
///   smoothing:  log alpha(x_0) - V(x_M) - sum w_m Phi(x_m)
double log_u(const ProblemSpec& spec, const Grid& grid, const Path& path);
/// Node-wise gradient of log_u as a path-shaped array. Boundary terms enter
/// their node with weight 1.
Path log_u_gradient(const ProblemSpec& spec, const Grid& grid, const Path& path);

/// True when log U is an exact quadratic (quadratic V and, for smoothing,
/// quadratic log alpha).
bool log_u_is_quadratic(const ProblemSpec& spec);
/// -D^2 log U on the free nodes of `op` (block diagonal). Requires
/// log_u_is_quadratic; exact because the gradient is affine.
BlockTridiagonal log_u_negative_hessian(const ProblemSpec& spec, const Grid& grid,
                                        const DiscreteOperator& op);

/// The discrete path-space target
///   log pi(x) = -x^T Lambda x / 2 + g^T x + log U(x) (+ boundary constant)
/// over the free nodes, with Dirichlet nodes held at their values.
class TargetMeasure {
 public:
  TargetMeasure(ProblemSpec spec, Grid grid, const AssemblyOptions& options = {});

  const ProblemSpec& spec() const { return *spec_; }
  const Grid& grid() const { return *grid_; }
  const DiscreteOperator& op() const { return op_; }
  const kernels::LogUModel& log_u_model() const { return *model_; }

  double log_density(const Path& path) const;
  /// Gradient with respect to the free unknowns.
  void gradient(const Path& path, VecRef out) const;
  Vector gradient(const Path& path) const;
  /// grad log U restricted to the free nodes.
  void log_u_gradient_free(const Path& path, VecRef out) const;

  /// Multiplies Lambda (not g) by `factor`; negative controls use this to
  /// corrupt the prior.
  void scale_precision(double factor);

 private:
  std::shared_ptr<const ProblemSpec> spec_;
  std::shared_ptr<const Grid> grid_;
  DiscreteOperator op_;
  std::shared_ptr<const kernels::LogUModel> model_;
};

double target_log_density(const TargetMeasure& target, const Path& path);
Vector target_grad(const TargetMeasure& target, const Path& path);

}  // namespace pathlangevin
