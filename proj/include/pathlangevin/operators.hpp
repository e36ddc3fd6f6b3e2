#pragma once

#include "pathlangevin/block_tridiagonal.hpp"
#include "pathlangevin/model.hpp"
#include "pathlangevin/random.hpp"

namespace pathlangevin {

struct BoundaryCondition {
  enum class Kind { dirichlet, neumann, robin };
  Kind kind = Kind::neumann;
  /// Prescribed value for dirichlet ends.
  Vector value;
  /// Robin coefficient K in x'(u) = K x(u) at the end (natural condition of
  /// the quadratic form).
  Matrix coefficient;
};

std::string to_string(BoundaryCondition::Kind kind);

struct AssemblyOptions {
  /// Robin coefficient (times B11 B11^T) at u = 1 that regularizes the
  /// smoothing preconditioner.
  double robin_epsilon = 1.0;
};

/// Discretization of -L with boundary conditions on the free (non-Dirichlet)
/// nodes first_free..last_free, which are contiguous.
///
/// The quadratic form is the sum over cells of
///   du * |(x_{m+1} - x_m)/du - A (x_m + x_{m+1})/2|^2_B,
/// so -x^T precision x / 2 discretizes -1/2 int |x' - Ax|_B^2 du and the
/// natural boundary condition at a free end is x' = Ax. Dirichlet nodes are
/// eliminated; their coupling is folded into `forcing` and
/// `boundary_constant`.
struct DiscreteOperator {
  ProblemKind kind = ProblemKind::bridge;
  int intervals = 0;
  int dim = 0;
  int first_free = 0;
  int last_free = 0;

  BlockTridiagonal precision;    // Lambda
  BlockTridiagonal leading;      // Lambda0, the preconditioner
  BlockTridiagonal lower_order;  // Lambda1 = Lambda - Lambda0
  bool lower_order_zero = true;

  /// g on the free nodes.
  Vector forcing;
  /// -1/2 x_b^T Lambda_bb x_b for the fixed Dirichlet values x_b, so that
  /// -1/2 x^T Lambda x + g^T x + boundary_constant is the full quadratic form.
  double boundary_constant = 0.0;
  /// Full path carrying the Dirichlet values (zero on free nodes).
  Path boundary_values;

  BoundaryCondition left;
  BoundaryCondition right;
  double robin_epsilon = 0.0;

  int free_count() const { return last_free - first_free + 1; }
  Eigen::Index unknowns() const { return static_cast<Eigen::Index>(free_count()) * dim; }

  auto free_part(Path& path) const {
    return path.values().segment(static_cast<Eigen::Index>(first_free) * dim, unknowns());
  }
  auto free_part(const Path& path) const {
    return path.values().segment(static_cast<Eigen::Index>(first_free) * dim, unknowns());
  }
  /// Path with the Dirichlet values and `free` on the free nodes.
  Path embed(ConstVecRef free) const;
};

/// Throws ModelError for M < 2 or incompatible dimensions.
DiscreteOperator assemble_precision(const ProblemSpec& spec, const Grid& grid,
                                    const AssemblyOptions& options = {});

/// Solves Lambda x = rhs + g and reinstates the Dirichlet nodes.
Path solve_bvp(const DiscreteOperator& op, ConstVecRef rhs);
Path solve_bvp(const DiscreteOperator& op, const CholeskyFactor& factor, ConstVecRef rhs);

/// z ~ N(0, Lambda^{-1}) from xi ~ N(0, I) by solving L^T z = xi.
Vector sample_from_precision(const CholeskyFactor& factor, RandomStream& rng);

/// Mean of the Gaussian part of the target. When the log-density correction
/// is exactly quadratic it is absorbed into the operator, so the result is
/// the exact target mean; otherwise it is the mean of the reference Gaussian
/// (Lambda^{-1} g with the boundary data).
Path mean_path(const ProblemSpec& spec, const Grid& grid, const AssemblyOptions& options = {});
/// Same, for an operator already assembled from (spec, grid).
Path mean_path(const ProblemSpec& spec, const Grid& grid, const DiscreteOperator& op);

}  // namespace pathlangevin
