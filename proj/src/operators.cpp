#include "pathlangevin/operators.hpp"

#include "pathlangevin/measure.hpp"

#include <sstream>

namespace pathlangevin {

std::string to_string(BoundaryCondition::Kind kind) {
  switch (kind) {
    case BoundaryCondition::Kind::dirichlet: return "dirichlet";
    case BoundaryCondition::Kind::neumann: return "neumann";
    case BoundaryCondition::Kind::robin: return "robin";
  }
  return "unknown";
}

Path DiscreteOperator::embed(ConstVecRef free) const {
  Path out = boundary_values;
  out.values().segment(static_cast<Eigen::Index>(first_free) * dim, unknowns()) = free;
  return out;
}

namespace {

// Adds the cell contributions of du * |(x_{m+1} - x_m)/du - A xbar_m|^2_S.
void add_cells(BlockTridiagonal& full, const Matrix& A, const Matrix& S, double du) {
  const auto d = A.rows();
  const Matrix I = Matrix::Identity(d, d);
  const Matrix P = I - 0.5 * du * A;  // multiplies x_{m+1}
  const Matrix N = I + 0.5 * du * A;  // multiplies x_m
  const Matrix NN = N.transpose() * S * N / du;
  const Matrix PP = P.transpose() * S * P / du;
  const Matrix PN = -(P.transpose() * S * N) / du;
  for (int m = 0; m + 1 < full.blocks(); ++m) {
    full.diag(m) += NN;
    full.diag(m + 1) += PP;
    full.lower(m) += PN;
  }
}

BlockTridiagonal restrict_to(const BlockTridiagonal& full, int first, int last) {
  const int n = last - first + 1;
  BlockTridiagonal out(n, full.block_dim());
  for (int i = 0; i < n; ++i) {
    out.diag(i) = full.diag(first + i);
    if (i + 1 < n) out.lower(i) = full.lower(first + i);
  }
  return out;
}

BoundaryCondition dirichlet(const Vector& value) {
  BoundaryCondition bc;
  bc.kind = BoundaryCondition::Kind::dirichlet;
  bc.value = value;
  return bc;
}

BoundaryCondition natural(const Matrix& coefficient) {
  BoundaryCondition bc;
  const bool zero = coefficient.cwiseAbs().maxCoeff() == 0.0;
  bc.kind = zero ? BoundaryCondition::Kind::neumann : BoundaryCondition::Kind::robin;
  bc.coefficient = coefficient;
  return bc;
}

// Eliminates Dirichlet end nodes of the full node-space operator.
void eliminate(DiscreteOperator& op, const BlockTridiagonal& full, const BlockTridiagonal& full0,
               const Vector& node_forcing) {
  const int d = op.dim;
  const int M = op.intervals;
  op.precision = restrict_to(full, op.first_free, op.last_free);
  op.leading = restrict_to(full0, op.first_free, op.last_free);
  op.lower_order = op.precision;
  op.lower_order -= op.leading;
  op.lower_order_zero = op.lower_order.max_abs() == 0.0;

  op.forcing = node_forcing.segment(static_cast<Eigen::Index>(op.first_free) * d, op.unknowns());
  op.boundary_constant = 0.0;
  if (op.first_free > 0) {
    const Vector xb = op.boundary_values.node(0);
    op.forcing.head(d) -= full.lower(0) * xb;
    op.boundary_constant -= 0.5 * xb.dot(full.diag(0) * xb);
  }
  if (op.last_free < M) {
    const Vector xb = op.boundary_values.node(M);
    op.forcing.tail(d) -= full.lower(M - 1).transpose() * xb;
    op.boundary_constant -= 0.5 * xb.dot(full.diag(M) * xb);
  }
}

}  // namespace

DiscreteOperator assemble_precision(const ProblemSpec& spec, const Grid& grid,
                                    const AssemblyOptions& options) {
  if (grid.intervals < 2) throw ModelError("grid needs at least 2 intervals");
  check_compatible(spec, grid);
  const int d = state_dim(spec);
  const int M = grid.intervals;
  const double du = grid.du;

  DiscreteOperator op;
  op.kind = kind_of(spec);
  op.intervals = M;
  op.dim = d;
  op.boundary_values = Path(M, d);

  BlockTridiagonal full(M + 1, d);
  BlockTridiagonal full0(M + 1, d);
  Vector node_forcing = Vector::Zero(static_cast<Eigen::Index>(M + 1) * d);

  if (const auto* f = std::get_if<FreePathProblem>(&spec)) {
    add_cells(full, f->mats.A, f->mats.BBt_inv, du);
    full0 = full;
    op.first_free = 1;
    op.last_free = M;
    op.boundary_values.node(0) = f->start;
    op.left = dirichlet(f->start);
    op.right = natural(f->mats.A);
  } else if (const auto* b = std::get_if<BridgeProblem>(&spec)) {
    add_cells(full, b->mats.A, b->mats.BBt_inv, du);
    add_cells(full0, Matrix::Zero(d, d), b->mats.BBt_inv, du);
    op.first_free = 1;
    op.last_free = M - 1;
    op.boundary_values.node(0) = b->start;
    op.boundary_values.node(M) = b->end;
    op.left = dirichlet(b->start);
    op.right = dirichlet(b->end);
  } else {
    const auto& s = std::get<SmoothingProblem>(spec);
    if (!(options.robin_epsilon > 0.0)) throw ModelError("robin epsilon must be positive");
    const Matrix& S = s.signal.BBt_inv;
    add_cells(full0, Matrix::Zero(d, d), S, du);
    full = full0;
    const Matrix obs_quad = s.A21.transpose() * s.obs_precision * s.A21;
    const Matrix obs_lin = s.A21.transpose() * s.obs_precision;
    for (int m = 0; m <= M; ++m) full.diag(m) += grid.weights[m] * obs_quad;
    // sum_m <A21 (x_m + x_{m+1})/2, dY_m>_{B22}
    for (int m = 0; m < M; ++m) {
      const Vector half = 0.5 * obs_lin * s.observations.increments.row(m).transpose();
      node_forcing.segment(static_cast<Eigen::Index>(m) * d, d) += half;
      node_forcing.segment(static_cast<Eigen::Index>(m + 1) * d, d) += half;
    }
    full0.diag(M) += options.robin_epsilon * Matrix::Identity(d, d);
    op.first_free = 0;
    op.last_free = M;
    op.left = natural(Matrix::Zero(d, d));
    op.right = natural(Matrix::Zero(d, d));
    op.robin_epsilon = options.robin_epsilon;
  }

  eliminate(op, full, full0, node_forcing);
  return op;
}

Path solve_bvp(const DiscreteOperator& op, const CholeskyFactor& factor, ConstVecRef rhs) {
  if (rhs.size() != op.unknowns()) {
    std::ostringstream msg;
    msg << "right-hand side has " << rhs.size() << " entries, expected " << op.unknowns();
    throw ModelError(msg.str());
  }
  Vector x = rhs + op.forcing;
  factor.solve(VecRef(x));
  return op.embed(x);
}

Path solve_bvp(const DiscreteOperator& op, ConstVecRef rhs) {
  return solve_bvp(op, cholesky_banded(op.precision), rhs);
}

Vector sample_from_precision(const CholeskyFactor& factor, RandomStream& rng) {
  Vector z(factor.size());
  rng.fill_normal(z);
  factor.solve_upper(z);
  return z;
}

Path mean_path(const ProblemSpec& spec, const Grid& grid, const AssemblyOptions& options) {
  return mean_path(spec, grid, assemble_precision(spec, grid, options));
}

Path mean_path(const ProblemSpec& spec, const Grid& grid, const DiscreteOperator& op) {
  if (!log_u_is_quadratic(spec)) {
    return solve_bvp(op, Vector::Zero(op.unknowns()));
  }
  // log U quadratic: grad log U(x) = grad log U(x_b) - H (x - x_b), H block
  // diagonal, so the target mean solves (Lambda + H) x = g + grad log U(x_b).
  BlockTridiagonal total = op.precision;
  total += log_u_negative_hessian(spec, grid, op);
  const Path drift = log_u_gradient(spec, grid, op.boundary_values);
  Vector x = op.free_part(drift) + op.forcing;
  cholesky_banded(total).solve(VecRef(x));
  return op.embed(x);
}

}  // namespace pathlangevin
