#include "pathlangevin/model.hpp"

#include <cmath>
#include <sstream>

namespace pathlangevin {

Vector Potential::gradient(ConstVecRef x) const {
  Vector out(dim());
  gradient(x, out);
  return out;
}

Matrix Potential::hessian(ConstVecRef x) const {
  Matrix out(dim(), dim());
  hessian(x, out);
  return out;
}

Vector Potential::third_contract(ConstVecRef x, ConstMatRef sigma) const {
  Vector out(dim());
  third_contract(x, sigma, out);
  return out;
}

namespace {

class QuadraticPotential final : public Potential {
 public:
  explicit QuadraticPotential(Matrix Q) : Q_(std::move(Q)) {}

  int dim() const override { return static_cast<int>(Q_.rows()); }
  int degree() const override { return 1; }
  double value(ConstVecRef x) const override { return 0.5 * x.dot(Q_ * x); }
  void gradient(ConstVecRef x, VecRef out) const override { out.noalias() = Q_ * x; }
  void hessian(ConstVecRef, MatRef out) const override { out = Q_; }
  void third_contract(ConstVecRef, ConstMatRef, VecRef out) const override { out.setZero(); }
  std::optional<Matrix> leading_quadratic() const override { return Q_; }
  bool is_quadratic() const override { return true; }
  std::string name() const override { return "quadratic"; }

 private:
  Matrix Q_;
};

// V(x) = (a/4)|x|^4 - (b/2)|x|^2
class DoubleWellPotential final : public Potential {
 public:
  DoubleWellPotential(int dim, double a, double b) : dim_(dim), a_(a), b_(b) {}

  int dim() const override { return dim_; }
  int degree() const override { return 2; }

  double value(ConstVecRef x) const override {
    const double r2 = x.squaredNorm();
    return 0.25 * a_ * r2 * r2 - 0.5 * b_ * r2;
  }

  void gradient(ConstVecRef x, VecRef out) const override {
    const double scale = a_ * x.squaredNorm() - b_;
    for (int k = 0; k < dim_; ++k) out[k] = scale * x[k];
  }

  void hessian(ConstVecRef x, MatRef out) const override {
    const double diag = a_ * x.squaredNorm() - b_;
    for (int i = 0; i < dim_; ++i) {
      for (int j = 0; j < dim_; ++j) {
        out(i, j) = 2.0 * a_ * x[i] * x[j] + (i == j ? diag : 0.0);
      }
    }
  }

  // d^3V/dx_k dx_i dx_j = 2a (x_k d_ij + x_i d_jk + x_j d_ik)
  void third_contract(ConstVecRef x, ConstMatRef sigma, VecRef out) const override {
    const double trace = sigma.trace();
    for (int k = 0; k < dim_; ++k) {
      double sx = 0.0;
      for (int j = 0; j < dim_; ++j) sx += (sigma(k, j) + sigma(j, k)) * x[j];
      out[k] = 2.0 * a_ * (x[k] * trace + sx);
    }
  }

  std::string name() const override { return "double_well"; }

 private:
  int dim_;
  double a_;
  double b_;
};

class ZeroPotential final : public Potential {
 public:
  explicit ZeroPotential(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  int degree() const override { return 1; }
  double value(ConstVecRef) const override { return 0.0; }
  void gradient(ConstVecRef, VecRef out) const override { out.setZero(); }
  void hessian(ConstVecRef, MatRef out) const override { out.setZero(); }
  void third_contract(ConstVecRef, ConstMatRef, VecRef out) const override { out.setZero(); }
  std::optional<Matrix> leading_quadratic() const override {
    return Matrix::Zero(dim_, dim_);
  }
  bool is_quadratic() const override { return true; }
  std::string name() const override { return "zero"; }

 private:
  int dim_;
};

class FiniteDifferencePotential final : public Potential {
 public:
  FiniteDifferencePotential(ScalarField value, int dim, int degree, double step)
      : value_(std::move(value)), dim_(dim), degree_(degree), step_(step) {}

  int dim() const override { return dim_; }
  int degree() const override { return degree_; }
  double value(ConstVecRef x) const override { return value_(Vector(x)); }

  void gradient(ConstVecRef x, VecRef out) const override {
    out = finite_difference_derivatives(value_, Vector(x), step_, Matrix::Zero(dim_, dim_))
              .gradient;
  }
  void hessian(ConstVecRef x, MatRef out) const override {
    out = finite_difference_derivatives(value_, Vector(x), step_, Matrix::Zero(dim_, dim_))
              .hessian;
  }
  void third_contract(ConstVecRef x, ConstMatRef sigma, VecRef out) const override {
    out = finite_difference_derivatives(value_, Vector(x), step_, Matrix(sigma)).third_contract;
  }
  std::string name() const override { return "finite_difference"; }

 private:
  ScalarField value_;
  int dim_;
  int degree_;
  double step_;
};

double checked_eval(const ScalarField& f, const Vector& x) {
  const double v = f(x);
  if (!std::isfinite(v)) {
    std::ostringstream msg;
    msg << "potential evaluation is not finite at x = " << x.transpose();
    throw ModelError(msg.str());
  }
  return v;
}

Matrix fd_hessian(const ScalarField& f, const Vector& x, double h) {
  const auto d = x.size();
  Matrix H(d, d);
  const double f0 = checked_eval(f, x);
  Vector xp = x;
  for (Eigen::Index i = 0; i < d; ++i) {
    xp[i] = x[i] + h;
    const double fp = checked_eval(f, xp);
    xp[i] = x[i] - h;
    const double fm = checked_eval(f, xp);
    xp[i] = x[i];
    H(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
    for (Eigen::Index j = 0; j < i; ++j) {
      double acc = 0.0;
      for (int si : {1, -1}) {
        for (int sj : {1, -1}) {
          xp[i] = x[i] + si * h;
          xp[j] = x[j] + sj * h;
          acc += si * sj * checked_eval(f, xp);
        }
      }
      xp[i] = x[i];
      xp[j] = x[j];
      H(i, j) = H(j, i) = acc / (4.0 * h * h);
    }
  }
  return H;
}

}  // namespace

FiniteDifferenceDerivatives finite_difference_derivatives(const ScalarField& value,
                                                          const Vector& x, double h,
                                                          const Matrix& sigma) {
  if (!(h > 0.0)) throw ModelError("finite-difference step must be positive");
  const auto d = x.size();
  if (sigma.rows() != d || sigma.cols() != d) {
    throw ModelError("contraction matrix has the wrong shape");
  }
  FiniteDifferenceDerivatives out;
  out.gradient.resize(d);
  Vector xp = x;
  for (Eigen::Index i = 0; i < d; ++i) {
    xp[i] = x[i] + h;
    const double fp = checked_eval(value, xp);
    xp[i] = x[i] - h;
    const double fm = checked_eval(value, xp);
    xp[i] = x[i];
    out.gradient[i] = (fp - fm) / (2.0 * h);
  }
  out.hessian = fd_hessian(value, x, h);

  // Third derivative: difference of sigma : D^2V along each axis. The nested
  // scheme loses two orders to cancellation, hence the wider step.
  const double h3 = 10.0 * h;
  out.third_contract = Vector::Zero(d);
  if (sigma.cwiseAbs().maxCoeff() > 0.0) {
    for (Eigen::Index k = 0; k < d; ++k) {
      xp[k] = x[k] + h3;
      const double sp = (sigma.array() * fd_hessian(value, xp, h3).array()).sum();
      xp[k] = x[k] - h3;
      const double sm = (sigma.array() * fd_hessian(value, xp, h3).array()).sum();
      xp[k] = x[k];
      out.third_contract[k] = (sp - sm) / (2.0 * h3);
    }
  }
  return out;
}

PotentialPtr make_quadratic_potential(Matrix Q) {
  if (Q.rows() != Q.cols() || Q.rows() == 0) throw ModelError("Q must be square");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + Q.cwiseAbs().maxCoeff())) {
    throw ModelError("Q must be symmetric");
  }
  Matrix sym = 0.5 * (Q + Q.transpose());
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() != Eigen::Success) throw ModelError("Q must be symmetric positive definite");
  return std::make_shared<QuadraticPotential>(std::move(sym));
}

PotentialPtr make_double_well_potential(int dim, double a, double b) {
  if (dim < 1) throw ModelError("dimension must be positive");
  if (!(a > 0.0)) throw ModelError("double_well requires a > 0");
  if (!(b > 0.0)) throw ModelError("double_well requires b > 0");
  return std::make_shared<DoubleWellPotential>(dim, a, b);
}

PotentialPtr make_zero_potential(int dim) {
  if (dim < 1) throw ModelError("dimension must be positive");
  return std::make_shared<ZeroPotential>(dim);
}

PotentialPtr make_finite_difference_potential(ScalarField value, int dim, int degree,
                                              double step) {
  if (dim < 1 || degree < 1) throw ModelError("dimension and degree must be positive");
  if (!(step > 0.0)) throw ModelError("finite-difference step must be positive");
  return std::make_shared<FiniteDifferencePotential>(std::move(value), dim, degree, step);
}

namespace {

class StationaryLogAlpha final : public LogAlpha {
 public:
  explicit StationaryLogAlpha(PotentialPtr v) : v_(std::move(v)) {}
  double value(ConstVecRef x) const override { return -v_->value(x); }
  void gradient(ConstVecRef x, VecRef out) const override {
    v_->gradient(x, out);
    out = -out;
  }
  Matrix hessian(ConstVecRef x) const override { return -v_->hessian(x); }
  bool is_quadratic() const override { return v_->is_quadratic(); }
  std::string name() const override { return "stationary"; }

 private:
  PotentialPtr v_;
};

class GaussianLogAlpha final : public LogAlpha {
 public:
  explicit GaussianLogAlpha(Matrix P) : P_(std::move(P)) {}
  double value(ConstVecRef x) const override { return -0.5 * x.dot(P_ * x); }
  void gradient(ConstVecRef x, VecRef out) const override { out.noalias() = -(P_ * x); }
  Matrix hessian(ConstVecRef) const override { return -P_; }
  bool is_quadratic() const override { return true; }
  std::string name() const override { return "gaussian"; }

 private:
  Matrix P_;
};

}  // namespace

LogAlphaPtr make_stationary_log_alpha(PotentialPtr potential) {
  if (!potential) throw ModelError("stationary log alpha needs a potential");
  return std::make_shared<StationaryLogAlpha>(std::move(potential));
}

LogAlphaPtr make_gaussian_log_alpha(Matrix precision) {
  if (precision.rows() != precision.cols()) throw ModelError("precision must be square");
  Matrix sym = 0.5 * (precision + precision.transpose());
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() != Eigen::Success) throw ModelError("log-alpha precision must be SPD");
  return std::make_shared<GaussianLogAlpha>(std::move(sym));
}

}  // namespace pathlangevin
