#pragma once

#include "pathlangevin/model.hpp"

#include <stdexcept>
#include <vector>

namespace pathlangevin {

/// Symmetric block-tridiagonal matrix with n x n blocks of size d x d. Only
/// the diagonal blocks and the sub-diagonal blocks (i + 1, i) are stored;
/// the super-diagonal is implied by symmetry. Blocks are row-major and
/// contiguous.
class BlockTridiagonal {
 public:
  BlockTridiagonal() = default;
  BlockTridiagonal(int blocks, int dim);

  int blocks() const { return blocks_; }
  int block_dim() const { return dim_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(blocks_) * dim_; }

  using BlockMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  using ConstBlockMap =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

  BlockMap diag(int i) { return {diag_.data() + offset(i), dim_, dim_}; }
  ConstBlockMap diag(int i) const { return {diag_.data() + offset(i), dim_, dim_}; }
  /// Block (i + 1, i).
  BlockMap lower(int i) { return {lower_.data() + offset(i), dim_, dim_}; }
  ConstBlockMap lower(int i) const { return {lower_.data() + offset(i), dim_, dim_}; }

  /// out = this * x, no allocation.
  void multiply(ConstVecRef x, VecRef out) const;
  Vector operator*(ConstVecRef x) const;

  BlockTridiagonal& operator+=(const BlockTridiagonal& other);
  BlockTridiagonal& operator-=(const BlockTridiagonal& other);
  BlockTridiagonal& operator*=(double s);
  void add_identity(double s);

  Matrix to_dense() const;
  /// max |entry|
  double max_abs() const;

 private:
  std::size_t offset(int i) const { return static_cast<std::size_t>(i) * dim_ * dim_; }

  int blocks_ = 0;
  int dim_ = 0;
  std::vector<double> diag_;
  std::vector<double> lower_;
};

class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Block Cholesky factor L of a symmetric positive definite block-tridiagonal
/// matrix: diagonal blocks are lower triangular, one sub-diagonal of full
/// blocks. Factor once, solve many times in O(n d^2).
class CholeskyFactor {
 public:
  CholeskyFactor() = default;
  /// Throws FactorizationError when a pivot block loses positivity.
  explicit CholeskyFactor(const BlockTridiagonal& matrix);

  int blocks() const { return blocks_; }
  int block_dim() const { return dim_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(blocks_) * dim_; }

  /// Solve L z = b in place.
  void solve_lower(VecRef b) const;
  /// Solve L^T x = z in place.
  void solve_upper(VecRef z) const;
  /// Solve (L L^T) x = b in place.
  void solve(VecRef b) const;
  Vector solve(ConstVecRef b) const;

  /// Dense L, for tests.
  Matrix to_dense() const;

 private:
  std::size_t offset(int i) const { return static_cast<std::size_t>(i) * dim_ * dim_; }

  int blocks_ = 0;
  int dim_ = 0;
  std::vector<double> diag_;   // lower-triangular L_ii, row-major
  std::vector<double> lower_;  // L_{i+1,i}, row-major
};

/// Factorizes a banded SPD matrix.
inline CholeskyFactor cholesky_banded(const BlockTridiagonal& matrix) {
  return CholeskyFactor(matrix);
}

}  // namespace pathlangevin
