#include "pathlangevin/block_tridiagonal.hpp"

#include <cmath>
#include <string>

namespace pathlangevin {

BlockTridiagonal::BlockTridiagonal(int blocks, int dim)
    : blocks_(blocks),
      dim_(dim),
      diag_(static_cast<std::size_t>(blocks) * dim * dim, 0.0),
      lower_(static_cast<std::size_t>(blocks > 0 ? blocks - 1 : 0) * dim * dim, 0.0) {
  if (blocks < 1 || dim < 1) throw std::invalid_argument("empty block-tridiagonal matrix");
}

void BlockTridiagonal::multiply(ConstVecRef x, VecRef out) const {
  const int d = dim_;
  for (int i = 0; i < blocks_; ++i) {
    const double* D = diag_.data() + offset(i);
    const double* xi = x.data() + static_cast<std::ptrdiff_t>(i) * d;
    double* yi = out.data() + static_cast<std::ptrdiff_t>(i) * d;
    for (int r = 0; r < d; ++r) {
      double acc = 0.0;
      for (int c = 0; c < d; ++c) acc += D[r * d + c] * xi[c];
      yi[r] = acc;
    }
    if (i > 0) {
      // row block i gets L_{i,i-1} x_{i-1}
      const double* C = lower_.data() + offset(i - 1);
      const double* xm = xi - d;
      for (int r = 0; r < d; ++r) {
        double acc = 0.0;
        for (int c = 0; c < d; ++c) acc += C[r * d + c] * xm[c];
        yi[r] += acc;
      }
    }
    if (i + 1 < blocks_) {
      // and L_{i+1,i}^T x_{i+1}
      const double* C = lower_.data() + offset(i);
      const double* xp = xi + d;
      for (int r = 0; r < d; ++r) {
        double acc = 0.0;
        for (int c = 0; c < d; ++c) acc += C[c * d + r] * xp[c];
        yi[r] += acc;
      }
    }
  }
}

Vector BlockTridiagonal::operator*(ConstVecRef x) const {
  Vector out(size());
  multiply(x, out);
  return out;
}

BlockTridiagonal& BlockTridiagonal::operator+=(const BlockTridiagonal& other) {
  if (other.blocks_ != blocks_ || other.dim_ != dim_) throw std::invalid_argument("shape mismatch");
  for (std::size_t k = 0; k < diag_.size(); ++k) diag_[k] += other.diag_[k];
  for (std::size_t k = 0; k < lower_.size(); ++k) lower_[k] += other.lower_[k];
  return *this;
}

BlockTridiagonal& BlockTridiagonal::operator-=(const BlockTridiagonal& other) {
  if (other.blocks_ != blocks_ || other.dim_ != dim_) throw std::invalid_argument("shape mismatch");
  for (std::size_t k = 0; k < diag_.size(); ++k) diag_[k] -= other.diag_[k];
  for (std::size_t k = 0; k < lower_.size(); ++k) lower_[k] -= other.lower_[k];
  return *this;
}

BlockTridiagonal& BlockTridiagonal::operator*=(double s) {
  for (auto& v : diag_) v *= s;
  for (auto& v : lower_) v *= s;
  return *this;
}

void BlockTridiagonal::add_identity(double s) {
  for (int i = 0; i < blocks_; ++i) {
    for (int r = 0; r < dim_; ++r) diag_[offset(i) + r * dim_ + r] += s;
  }
}

Matrix BlockTridiagonal::to_dense() const {
  Matrix out = Matrix::Zero(size(), size());
  const int d = dim_;
  for (int i = 0; i < blocks_; ++i) {
    out.block(i * d, i * d, d, d) = diag(i);
    if (i + 1 < blocks_) {
      out.block((i + 1) * d, i * d, d, d) = lower(i);
      out.block(i * d, (i + 1) * d, d, d) = lower(i).transpose();
    }
  }
  return out;
}

double BlockTridiagonal::max_abs() const {
  double m = 0.0;
  for (double v : diag_) m = std::max(m, std::abs(v));
  for (double v : lower_) m = std::max(m, std::abs(v));
  return m;
}

CholeskyFactor::CholeskyFactor(const BlockTridiagonal& matrix)
    : blocks_(matrix.blocks()),
      dim_(matrix.block_dim()),
      diag_(static_cast<std::size_t>(blocks_) * dim_ * dim_, 0.0),
      lower_(static_cast<std::size_t>(blocks_ > 0 ? blocks_ - 1 : 0) * dim_ * dim_, 0.0) {
  const int d = dim_;
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMat prev_lower;  // L_{i,i-1}
  for (int i = 0; i < blocks_; ++i) {
    Matrix S = matrix.diag(i);
    if (i > 0) S.noalias() -= prev_lower * prev_lower.transpose();
    S = 0.5 * (S + S.transpose());
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success) {
      throw FactorizationError("Cholesky factorization lost positivity at block " +
                               std::to_string(i));
    }
    const Matrix Lii = llt.matrixL();
    Eigen::Map<RowMat>(diag_.data() + offset(i), d, d) = Lii;
    if (i + 1 < blocks_) {
      // L_{i+1,i} = C_i L_ii^{-T}
      const Matrix C = matrix.lower(i);
      RowMat Li1 = Lii.triangularView<Eigen::Lower>().solve(C.transpose()).transpose();
      Eigen::Map<RowMat>(lower_.data() + offset(i), d, d) = Li1;
      prev_lower = Li1;
    }
  }
}

void CholeskyFactor::solve_lower(VecRef b) const {
  const int d = dim_;
  double* x = b.data();
  for (int i = 0; i < blocks_; ++i) {
    double* xi = x + static_cast<std::ptrdiff_t>(i) * d;
    if (i > 0) {
      const double* C = lower_.data() + offset(i - 1);
      const double* xm = xi - d;
      for (int r = 0; r < d; ++r) {
        double acc = 0.0;
        for (int c = 0; c < d; ++c) acc += C[r * d + c] * xm[c];
        xi[r] -= acc;
      }
    }
    const double* L = diag_.data() + offset(i);
    for (int r = 0; r < d; ++r) {
      double acc = xi[r];
      for (int c = 0; c < r; ++c) acc -= L[r * d + c] * xi[c];
      xi[r] = acc / L[r * d + r];
    }
  }
}

void CholeskyFactor::solve_upper(VecRef z) const {
  const int d = dim_;
  double* x = z.data();
  for (int i = blocks_ - 1; i >= 0; --i) {
    double* xi = x + static_cast<std::ptrdiff_t>(i) * d;
    if (i + 1 < blocks_) {
      const double* C = lower_.data() + offset(i);
      const double* xp = xi + d;
      for (int r = 0; r < d; ++r) {
        double acc = 0.0;
        for (int c = 0; c < d; ++c) acc += C[c * d + r] * xp[c];
        xi[r] -= acc;
      }
    }
    const double* L = diag_.data() + offset(i);
    for (int r = d - 1; r >= 0; --r) {
      double acc = xi[r];
      for (int c = r + 1; c < d; ++c) acc -= L[c * d + r] * xi[c];
      xi[r] = acc / L[r * d + r];
    }
  }
}

void CholeskyFactor::solve(VecRef b) const {
  solve_lower(b);
  solve_upper(b);
}

Vector CholeskyFactor::solve(ConstVecRef b) const {
  Vector x = b;
  solve(VecRef(x));
  return x;
}

Matrix CholeskyFactor::to_dense() const {
  const int d = dim_;
  Matrix L = Matrix::Zero(size(), size());
  for (int i = 0; i < blocks_; ++i) {
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c <= r; ++c) L(i * d + r, i * d + c) = diag_[offset(i) + r * d + c];
    }
    if (i + 1 < blocks_) {
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) L((i + 1) * d + r, i * d + c) = lower_[offset(i) + r * d + c];
      }
    }
  }
  return L;
}

}  // namespace pathlangevin
