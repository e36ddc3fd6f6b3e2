#include "pathlangevin/model.hpp"

#include <cmath>
#include <sstream>

namespace pathlangevin {

namespace {

void require_invertible(const Matrix& B, const char* what) {
  if (B.rows() != B.cols() || B.rows() == 0) {
    throw ModelError(std::string(what) + " must be a non-empty square matrix");
  }
  if (!B.allFinite()) throw ModelError(std::string(what) + " has non-finite entries");
  Eigen::JacobiSVD<Matrix> svd(B);
  const auto& s = svd.singularValues();
  const double smin = s[s.size() - 1];
  if (!(smin > 0.0) || s[0] / smin > 1e12) {
    throw ModelError(std::string(what) + " is singular or too ill-conditioned");
  }
}

}  // namespace

MatrixSet MatrixSet::make(Matrix A, Matrix B) {
  require_invertible(B, "B");
  if (A.rows() != B.rows() || A.cols() != B.cols()) {
    throw ModelError("A and B must have the same shape");
  }
  MatrixSet set;
  set.A = std::move(A);
  set.B = std::move(B);
  set.BBt = set.B * set.B.transpose();
  set.BBt_inv = set.BBt.llt().solve(Matrix::Identity(set.BBt.rows(), set.BBt.cols()));
  set.BBt_inv = 0.5 * (set.BBt_inv + set.BBt_inv.transpose());
  return set;
}

Grid Grid::make(int intervals) {
  if (intervals < 2) throw ModelError("grid needs at least 2 intervals");
  Grid grid;
  grid.intervals = intervals;
  grid.du = 1.0 / intervals;
  grid.nodes.resize(intervals + 1);
  grid.weights.resize(intervals + 1);
  for (int m = 0; m <= intervals; ++m) {
    grid.nodes[m] = static_cast<double>(m) / intervals;
    grid.weights[m] = grid.du;
  }
  grid.weights[0] = grid.weights[intervals] = 0.5 * grid.du;
  return grid;
}

Path::Path(int intervals, int dim)
    : intervals_(intervals), dim_(dim), values_(Vector::Zero((intervals + 1) * dim)) {}

Path::Path(int intervals, int dim, Vector values)
    : intervals_(intervals), dim_(dim), values_(std::move(values)) {
  if (values_.size() != static_cast<Eigen::Index>(intervals + 1) * dim) {
    throw ModelError("path values do not match (M + 1) x d");
  }
}

double Path::sup_norm() const {
  return values_.size() == 0 ? 0.0 : values_.cwiseAbs().maxCoeff();
}

Observations Observations::from_increments(Matrix increments) {
  if (increments.rows() < 1 || increments.cols() < 1) {
    throw ModelError("observations need at least one cell and one component");
  }
  if (!increments.allFinite()) throw ModelError("observation increments are not finite");
  Observations obs;
  obs.increments = std::move(increments);
  return obs;
}

Observations Observations::from_node_values(const Matrix& values) {
  if (values.rows() < 2) throw ModelError("need at least two observation nodes");
  if (values.row(0).cwiseAbs().maxCoeff() > 1e-12) {
    throw ModelError("observation path must start at Y(0) = 0");
  }
  const auto cells = values.rows() - 1;
  return from_increments(values.bottomRows(cells) - values.topRows(cells));
}

SmoothingProblem SmoothingProblem::make(Matrix A21, Matrix B11, Matrix B22,
                                        PotentialPtr potential, LogAlphaPtr log_alpha,
                                        Observations observations) {
  if (!potential) throw ModelError("smoothing problem needs a potential");
  if (!log_alpha) throw ModelError("smoothing problem needs log alpha");
  require_invertible(B11, "B11");
  require_invertible(B22, "B22");
  const auto d = B11.rows();
  const auto m = B22.rows();
  if (A21.rows() != m || A21.cols() != d) throw ModelError("A21 must be m x d");
  if (potential->dim() != d) throw ModelError("potential dimension does not match B11");
  if (observations.dim() != m) throw ModelError("observation dimension does not match B22");

  SmoothingProblem p;
  p.signal = MatrixSet::make(Matrix::Zero(d, d), B11);
  p.A21 = std::move(A21);
  p.B11 = std::move(B11);
  p.B22 = std::move(B22);
  p.potential = std::move(potential);
  p.log_alpha = std::move(log_alpha);
  p.observations = std::move(observations);
  Matrix R = p.B22 * p.B22.transpose();
  p.obs_precision = R.llt().solve(Matrix::Identity(m, m));
  p.obs_precision = 0.5 * (p.obs_precision + p.obs_precision.transpose());
  return p;
}

Matrix SmoothingProblem::joint_drift() const {
  const auto d = B11.rows();
  const auto m = B22.rows();
  Matrix A = Matrix::Zero(d + m, d + m);
  A.bottomLeftCorner(m, d) = A21;
  return A;
}

Matrix SmoothingProblem::joint_noise() const {
  const auto d = B11.rows();
  const auto m = B22.rows();
  Matrix B = Matrix::Zero(d + m, d + m);
  B.topLeftCorner(d, d) = B11;
  B.bottomRightCorner(m, m) = B22;
  return B;
}

ProblemKind kind_of(const ProblemSpec& spec) {
  switch (spec.index()) {
    case 0: return ProblemKind::free_path;
    case 1: return ProblemKind::bridge;
    default: return ProblemKind::smoothing;
  }
}

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::free_path: return "free_path";
    case ProblemKind::bridge: return "bridge";
    case ProblemKind::smoothing: return "smoothing";
  }
  return "unknown";
}

const Potential& potential_of(const ProblemSpec& spec) {
  return *std::visit([](const auto& p) -> const PotentialPtr& { return p.potential; }, spec);
}

const MatrixSet& phi_matrices(const ProblemSpec& spec) {
  if (const auto* s = std::get_if<SmoothingProblem>(&spec)) return s->signal;
  if (const auto* f = std::get_if<FreePathProblem>(&spec)) return f->mats;
  return std::get<BridgeProblem>(spec).mats;
}

int state_dim(const ProblemSpec& spec) { return phi_matrices(spec).dim(); }

void check_compatible(const ProblemSpec& spec, const Grid& grid) {
  const int d = state_dim(spec);
  if (potential_of(spec).dim() != d) throw ModelError("potential dimension mismatch");
  if (const auto* f = std::get_if<FreePathProblem>(&spec)) {
    if (f->start.size() != d) throw ModelError("start point dimension mismatch");
  } else if (const auto* b = std::get_if<BridgeProblem>(&spec)) {
    if (b->start.size() != d || b->end.size() != d) {
      throw ModelError("bridge endpoint dimension mismatch");
    }
  } else {
    const auto& s = std::get<SmoothingProblem>(spec);
    if (s.observations.intervals() != grid.intervals) {
      std::ostringstream msg;
      msg << "observations have " << s.observations.intervals() << " increments but grid has "
          << grid.intervals << " cells";
      throw ModelError(msg.str());
    }
  }
}

}  // namespace pathlangevin
