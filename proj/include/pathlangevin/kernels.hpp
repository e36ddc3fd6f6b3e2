#pragma once

#include "pathlangevin/model.hpp"

namespace pathlangevin::kernels {

/// Per-thread scratch for node evaluations.
struct Workspace {
  explicit Workspace(int dim)
      : grad(dim), Ax(dim), tmp(dim), third(dim), hess(dim, dim) {}
  Vector grad;
  Vector Ax;
  Vector tmp;
  Vector third;
  Matrix hess;
};

double capital_phi(const Potential& V, const MatrixSet& mats, ConstVecRef x, Workspace& ws);
void grad_phi(const Potential& V, const MatrixSet& mats, ConstVecRef x, Workspace& ws,
              VecRef out);

/// Node-separable view of log U: sum_m w_m rho(x_m) plus Dirac terms at the
/// end nodes. Non-owning; the spec and grid must outlive it.
class LogUModel {
 public:
  LogUModel(const ProblemSpec& spec, const Grid& grid);

  int dim() const { return dim_; }
  int node_count() const { return grid_->node_count(); }

  /// w_m rho(x_m) + Dirac terms at node m.
  double node_value(int m, ConstVecRef x, Workspace& ws) const;
  void node_gradient(int m, ConstVecRef x, Workspace& ws, VecRef out) const;

 private:
  double interior(ConstVecRef x, Workspace& ws) const;
  void interior_gradient(ConstVecRef x, Workspace& ws, VecRef out) const;

  const Potential* potential_;
  const MatrixSet* mats_;
  const LogAlpha* log_alpha_ = nullptr;
  const Grid* grid_;
  ProblemKind kind_;
  int dim_;
  bool linear_drift_;
};

/// Node loops above this size are split across OpenMP threads.
inline constexpr int kParallelNodeThreshold = 512;

/// Straight loops; the reference the parallel kernels are tested against.
namespace serial {
double log_u(const LogUModel& model, const Path& path);
/// Gradient on nodes first..last written to out (length (last-first+1)*d).
void log_u_gradient(const LogUModel& model, const Path& path, int first, int last, VecRef out);
}  // namespace serial

/// OpenMP versions. Node terms are summed in index order after the parallel
/// loop, so results are bit-identical to the serial kernels for any thread
/// count.
namespace parallel {
double log_u(const LogUModel& model, const Path& path);
void log_u_gradient(const LogUModel& model, const Path& path, int first, int last, VecRef out);
}  // namespace parallel

}  // namespace pathlangevin::kernels
