#include "pathlangevin/kernels.hpp"

namespace pathlangevin::kernels {

// Phi = (|B^T grad V|^2 - BB^T : D^2 V) / 2
double capital_phi(const Potential& V, const MatrixSet& mats, ConstVecRef x, Workspace& ws) {
  V.gradient(x, ws.grad);
  V.hessian(x, ws.hess);
  ws.tmp.noalias() = mats.BBt * ws.grad;
  const double drift = ws.grad.dot(ws.tmp);
  const double div = (mats.BBt.array() * ws.hess.array()).sum();
  return 0.5 * (drift - div);
}

// grad Phi = D^2V BB^T grad V - T(x; BB^T) / 2
void grad_phi(const Potential& V, const MatrixSet& mats, ConstVecRef x, Workspace& ws,
              VecRef out) {
  V.gradient(x, ws.grad);
  V.hessian(x, ws.hess);
  V.third_contract(x, mats.BBt, ws.third);
  ws.tmp.noalias() = mats.BBt * ws.grad;
  out.noalias() = ws.hess * ws.tmp;
  out -= 0.5 * ws.third;
}

LogUModel::LogUModel(const ProblemSpec& spec, const Grid& grid)
    : potential_(&potential_of(spec)),
      mats_(&phi_matrices(spec)),
      grid_(&grid),
      kind_(kind_of(spec)),
      dim_(state_dim(spec)) {
  if (const auto* s = std::get_if<SmoothingProblem>(&spec)) log_alpha_ = s->log_alpha.get();
  linear_drift_ = kind_ != ProblemKind::smoothing && mats_->A.cwiseAbs().maxCoeff() > 0.0;
}

// rho(x) = <grad V(x), A x> - Phi(x)
double LogUModel::interior(ConstVecRef x, Workspace& ws) const {
  double value = -capital_phi(*potential_, *mats_, x, ws);
  if (linear_drift_) {
    ws.Ax.noalias() = mats_->A * x;
    value += ws.grad.dot(ws.Ax);  // grad left in ws by capital_phi
  }
  return value;
}

// grad rho = D^2V A x + A^T grad V - grad Phi
void LogUModel::interior_gradient(ConstVecRef x, Workspace& ws, VecRef out) const {
  grad_phi(*potential_, *mats_, x, ws, out);
  out = -out;
  if (linear_drift_) {
    ws.Ax.noalias() = mats_->A * x;
    out.noalias() += ws.hess * ws.Ax;
    out.noalias() += mats_->A.transpose() * ws.grad;
  }
}

double LogUModel::node_value(int m, ConstVecRef x, Workspace& ws) const {
  double value = grid_->weights[m] * interior(x, ws);
  const int M = grid_->intervals;
  if (m == M && kind_ != ProblemKind::bridge) value -= potential_->value(x);
  if (m == 0 && kind_ == ProblemKind::smoothing) value += log_alpha_->value(x);
  return value;
}

void LogUModel::node_gradient(int m, ConstVecRef x, Workspace& ws, VecRef out) const {
  interior_gradient(x, ws, out);
  out *= grid_->weights[m];
  const int M = grid_->intervals;
  if (m == M && kind_ != ProblemKind::bridge) {
    potential_->gradient(x, ws.tmp);
    out -= ws.tmp;
  }
  if (m == 0 && kind_ == ProblemKind::smoothing) {
    log_alpha_->gradient(x, ws.tmp);
    out += ws.tmp;
  }
}

namespace serial {

double log_u(const LogUModel& model, const Path& path) {
  Workspace ws(model.dim());
  double acc = 0.0;
  for (int m = 0; m < model.node_count(); ++m) acc += model.node_value(m, path.node(m), ws);
  return acc;
}

void log_u_gradient(const LogUModel& model, const Path& path, int first, int last, VecRef out) {
  Workspace ws(model.dim());
  const int d = model.dim();
  for (int m = first; m <= last; ++m) {
    model.node_gradient(m, path.node(m), ws, out.segment(static_cast<Eigen::Index>(m - first) * d, d));
  }
}

}  // namespace serial
}  // namespace pathlangevin::kernels
