#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace pathlangevin {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ConstVecRef = Eigen::Ref<const Eigen::VectorXd>;
using VecRef = Eigen::Ref<Eigen::VectorXd>;
using ConstMatRef = Eigen::Ref<const Eigen::MatrixXd>;
using MatRef = Eigen::Ref<Eigen::MatrixXd>;

/// Raised when a problem definition is structurally unusable (singular noise
/// matrix, wrong dimensions, non-SPD quadratic form, ...).
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Drift and noise matrices of dX = AX du + f(X) du + B dW.
struct MatrixSet {
  Matrix A;
  Matrix B;
  Matrix BBt;
  Matrix BBt_inv;

  int dim() const { return static_cast<int>(A.rows()); }

  /// Builds the set and checks that B is square, invertible and reasonably
  /// conditioned (cond(B) < 1e12).
  static MatrixSet make(Matrix A, Matrix B);
};

/// V together with the derivatives needed by the drift of the path-space
/// Langevin equation. Implementations must be thread-safe for concurrent
/// const calls.
class Potential {
 public:
  virtual ~Potential() = default;

  virtual int dim() const = 0;
  /// p of the leading 2p-homogeneous term.
  virtual int degree() const = 0;

  virtual double value(ConstVecRef x) const = 0;
  virtual void gradient(ConstVecRef x, VecRef out) const = 0;
  virtual void hessian(ConstVecRef x, MatRef out) const = 0;
  /// out_k = sum_ij sigma_ij d^3V / dx_k dx_i dx_j
  virtual void third_contract(ConstVecRef x, ConstMatRef sigma,
                              VecRef out) const = 0;

  /// Q with M(x, x) = <x, Qx>/2 when degree() == 1 and Q is known exactly.
  virtual std::optional<Matrix> leading_quadratic() const { return std::nullopt; }
  /// True when V is exactly a quadratic form (the path target is Gaussian).
  virtual bool is_quadratic() const { return false; }
  virtual std::string name() const = 0;

  Vector gradient(ConstVecRef x) const;
  Matrix hessian(ConstVecRef x) const;
  Vector third_contract(ConstVecRef x, ConstMatRef sigma) const;
};

using PotentialPtr = std::shared_ptr<const Potential>;
using ScalarField = std::function<double(const Vector&)>;

PotentialPtr make_quadratic_potential(Matrix Q);
PotentialPtr make_double_well_potential(int dim, double a, double b);
/// V == 0, i.e. f == 0.
PotentialPtr make_zero_potential(int dim);
/// Potential from a value callback only; derivatives by central differences.
PotentialPtr make_finite_difference_potential(ScalarField value, int dim,
                                              int degree, double step = 1e-4);

struct FiniteDifferenceDerivatives {
  Vector gradient;
  Matrix hessian;
  Vector third_contract;
};

/// Central-difference gradient (step h), Hessian (step h) and third
/// derivative contracted with sigma (step 10h, nested). Throws ModelError on
/// non-finite evaluations.
FiniteDifferenceDerivatives finite_difference_derivatives(const ScalarField& value,
                                                          const Vector& x, double h,
                                                          const Matrix& sigma);

/// log alpha(x) for the smoothing problem, alpha = exp(V) * density of X(0).
class LogAlpha {
 public:
  virtual ~LogAlpha() = default;
  virtual double value(ConstVecRef x) const = 0;
  virtual void gradient(ConstVecRef x, VecRef out) const = 0;
  virtual Matrix hessian(ConstVecRef x) const = 0;
  virtual bool is_quadratic() const = 0;
  virtual std::string name() const = 0;
};

using LogAlphaPtr = std::shared_ptr<const LogAlpha>;

/// log alpha = -V: X(0) distributed according to the invariant law of the
/// signal SDE.
LogAlphaPtr make_stationary_log_alpha(PotentialPtr potential);
/// log alpha(x) = -<x, P x>/2.
LogAlphaPtr make_gaussian_log_alpha(Matrix precision);

/// Uniform grid u_m = m/M on [0, 1] with trapezoidal weights.
struct Grid {
  int intervals = 0;
  double du = 0.0;
  Vector nodes;
  Vector weights;

  int node_count() const { return intervals + 1; }
  static Grid make(int intervals);
};

/// Node values of a path, stored node-major: values[m * dim + k].
class Path {
 public:
  Path() = default;
  Path(int intervals, int dim);
  Path(int intervals, int dim, Vector values);

  int intervals() const { return intervals_; }
  int node_count() const { return intervals_ + 1; }
  int dim() const { return dim_; }

  auto node(int m) { return values_.segment(static_cast<Eigen::Index>(m) * dim_, dim_); }
  auto node(int m) const {
    return values_.segment(static_cast<Eigen::Index>(m) * dim_, dim_);
  }
  double& at(int m, int k) { return values_[static_cast<Eigen::Index>(m) * dim_ + k]; }
  double at(int m, int k) const { return values_[static_cast<Eigen::Index>(m) * dim_ + k]; }

  Vector& values() { return values_; }
  const Vector& values() const { return values_; }

  bool all_finite() const { return values_.allFinite(); }
  double sup_norm() const;

 private:
  int intervals_ = 0;
  int dim_ = 0;
  Vector values_;
};

/// Observation increments dY_m over cells m = 0..M-1, one row per cell.
struct Observations {
  Matrix increments;

  int intervals() const { return static_cast<int>(increments.rows()); }
  int dim() const { return static_cast<int>(increments.cols()); }

  static Observations from_increments(Matrix increments);
  /// Differences node values Y_0..Y_M; requires Y_0 == 0.
  static Observations from_node_values(const Matrix& values);
};

struct FreePathProblem {
  MatrixSet mats;
  PotentialPtr potential;
  Vector start;
};

struct BridgeProblem {
  MatrixSet mats;
  PotentialPtr potential;
  Vector start;
  Vector end;
};

struct SmoothingProblem {
  Matrix A21;
  Matrix B11;
  Matrix B22;
  PotentialPtr potential;
  LogAlphaPtr log_alpha;
  Observations observations;

  /// A = 0, B = B11: the signal part, used for Phi and its gradient.
  MatrixSet signal;
  /// (B22 B22^T)^{-1}
  Matrix obs_precision;

  static SmoothingProblem make(Matrix A21, Matrix B11, Matrix B22, PotentialPtr potential,
                               LogAlphaPtr log_alpha, Observations observations);
  /// Joint (X, Y) drift and noise matrices in block form.
  Matrix joint_drift() const;
  Matrix joint_noise() const;
};

using ProblemSpec = std::variant<FreePathProblem, BridgeProblem, SmoothingProblem>;

enum class ProblemKind { free_path, bridge, smoothing };

ProblemKind kind_of(const ProblemSpec& spec);
std::string to_string(ProblemKind kind);
int state_dim(const ProblemSpec& spec);
const Potential& potential_of(const ProblemSpec& spec);
/// Matrices entering Phi: the problem's own set, or the signal set for smoothing.
const MatrixSet& phi_matrices(const ProblemSpec& spec);

/// Throws ModelError when dimensions of the problem and grid disagree.
void check_compatible(const ProblemSpec& spec, const Grid& grid);

struct ValidationCheck {
  std::string name;
  bool skipped = false;
  bool passed = true;
  /// Sweep statistic: min V(R xi)/R^{2p} for (M), max eigenvalue for (Q),
  /// max of the log-alpha decay ratio.
  double statistic = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool ok() const;
};

struct ValidationOptions {
  bool strict = false;
  std::uint64_t sweep_seed = 20240601;
  int directions = 64;
  /// Radius scale c of the log-alpha sweep; radii are 2c and 10c.
  double alpha_radius = 1.0;
  double growth_floor = 1e-8;
};

class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& what, ValidationReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// Numerical sweeps for the growth condition, the p = 1 matrix condition and
/// the log-alpha decay condition. Failures are reported, or thrown as
/// ValidationError in strict mode.
ValidationReport validate_problem(const ProblemSpec& spec, const ValidationOptions& options = {});

}  // namespace pathlangevin
