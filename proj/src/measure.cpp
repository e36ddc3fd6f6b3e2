#include "pathlangevin/measure.hpp"

#include <sstream>

namespace pathlangevin {

double capital_phi(const Potential& V, const MatrixSet& mats, ConstVecRef x) {
  kernels::Workspace ws(V.dim());
  const double value = kernels::capital_phi(V, mats, x, ws);
  if (!std::isfinite(value)) throw ModelError("Phi is not finite");
  return value;
}

Vector grad_phi(const Potential& V, const MatrixSet& mats, ConstVecRef x) {
  kernels::Workspace ws(V.dim());
  Vector out(V.dim());
  kernels::grad_phi(V, mats, x, ws, out);
  if (!out.allFinite()) throw ModelError("grad Phi is not finite");
  return out;
}

namespace {

void check_path(const ProblemSpec& spec, const Grid& grid, const Path& path) {
  if (path.intervals() != grid.intervals || path.dim() != state_dim(spec)) {
    std::ostringstream msg;
    msg << "path shape (" << path.node_count() << " x " << path.dim() << ") does not match grid ("
        << grid.node_count() << " x " << state_dim(spec) << ")";
    throw ModelError(msg.str());
  }
}

}  // namespace

double girsanov_log_density(const ProblemSpec& spec, const Grid& grid, const Path& path) {
  if (kind_of(spec) == ProblemKind::smoothing) {
    throw ModelError("girsanov_log_density applies to free-path and bridge problems");
  }
  check_path(spec, grid, path);
  const Potential& V = potential_of(spec);
  const MatrixSet& mats = phi_matrices(spec);
  kernels::Workspace ws(V.dim());
  double acc = -V.value(path.node(grid.intervals));
  for (int m = 0; m <= grid.intervals; ++m) {
    const auto x = path.node(m);
    const double phi = kernels::capital_phi(V, mats, x, ws);
    ws.Ax.noalias() = mats.A * x;
    acc += grid.weights[m] * (ws.grad.dot(ws.Ax) - phi);
  }
  return acc;
}

double log_u(const ProblemSpec& spec, const Grid& grid, const Path& path) {
  check_path(spec, grid, path);
  kernels::LogUModel model(spec, grid);
  return kernels::parallel::log_u(model, path);
}

Path log_u_gradient(const ProblemSpec& spec, const Grid& grid, const Path& path) {
  check_path(spec, grid, path);
  kernels::LogUModel model(spec, grid);
  Path out(grid.intervals, path.dim());
  kernels::parallel::log_u_gradient(model, path, 0, grid.intervals, out.values());
  return out;
}

bool log_u_is_quadratic(const ProblemSpec& spec) {
  if (!potential_of(spec).is_quadratic()) return false;
  if (const auto* s = std::get_if<SmoothingProblem>(&spec)) return s->log_alpha->is_quadratic();
  return true;
}

BlockTridiagonal log_u_negative_hessian(const ProblemSpec& spec, const Grid& grid,
                                        const DiscreteOperator& op) {
  if (!log_u_is_quadratic(spec)) {
    throw ModelError("log U Hessian is only available for quadratic potentials");
  }
  const int d = op.dim;
  kernels::LogUModel model(spec, grid);
  kernels::Workspace ws(d);
  BlockTridiagonal H(op.free_count(), d);
  const Vector zero = Vector::Zero(d);
  Vector g0(d), g1(d);
  for (int i = 0; i < op.free_count(); ++i) {
    const int m = op.first_free + i;
    model.node_gradient(m, zero, ws, g0);
    for (int j = 0; j < d; ++j) {
      model.node_gradient(m, Vector::Unit(d, j), ws, g1);
      H.diag(i).col(j) = -(g1 - g0);
    }
    Matrix sym = 0.5 * (H.diag(i) + H.diag(i).transpose());
    H.diag(i) = sym;
  }
  return H;
}

TargetMeasure::TargetMeasure(ProblemSpec spec, Grid grid, const AssemblyOptions& options)
    : spec_(std::make_shared<const ProblemSpec>(std::move(spec))),
      grid_(std::make_shared<const Grid>(std::move(grid))),
      op_(assemble_precision(*spec_, *grid_, options)),
      model_(std::make_shared<const kernels::LogUModel>(*spec_, *grid_)) {}

double TargetMeasure::log_density(const Path& path) const {
  check_path(*spec_, *grid_, path);
  const auto x = op_.free_part(path);
  const Vector Lx = op_.precision * x;
  return -0.5 * x.dot(Lx) + op_.forcing.dot(x) + op_.boundary_constant +
         kernels::parallel::log_u(*model_, path);
}

void TargetMeasure::log_u_gradient_free(const Path& path, VecRef out) const {
  kernels::parallel::log_u_gradient(*model_, path, op_.first_free, op_.last_free, out);
}

void TargetMeasure::gradient(const Path& path, VecRef out) const {
  check_path(*spec_, *grid_, path);
  log_u_gradient_free(path, out);
  out += op_.forcing;
  const auto x = op_.free_part(path);
  Vector Lx(op_.unknowns());
  op_.precision.multiply(x, Lx);
  out -= Lx;
}

Vector TargetMeasure::gradient(const Path& path) const {
  Vector out(op_.unknowns());
  gradient(path, out);
  return out;
}

void TargetMeasure::scale_precision(double factor) {
  op_.precision *= factor;
  op_.lower_order = op_.precision;
  op_.lower_order -= op_.leading;
  op_.lower_order_zero = op_.lower_order.max_abs() == 0.0;
}

double target_log_density(const TargetMeasure& target, const Path& path) {
  return target.log_density(path);
}

Vector target_grad(const TargetMeasure& target, const Path& path) {
  return target.gradient(path);
}

}  // namespace pathlangevin
