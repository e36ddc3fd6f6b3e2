#include "helpers.hpp"

#include <doctest.h>

using namespace testing;

namespace {

// Central differences of a vector-valued callback, one column per axis.
template <class F>
Matrix jacobian_fd(F f, const Vector& x, double h) {
  const Vector f0 = f(x);
  Matrix J(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vector xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

void check_derivatives(const Potential& V, const Matrix& sigma, std::uint64_t seed) {
  RandomStream rng(seed);
  const int d = V.dim();
  for (int trial = 0; trial < 20; ++trial) {
    Vector x(d);
    for (int k = 0; k < d; ++k) x[k] = -3.0 + 6.0 * rng.uniform();
    const double h = 1e-5;
    const Vector g = V.gradient(x);
    Vector g_fd(d);
    for (int k = 0; k < d; ++k) {
      Vector xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      g_fd[k] = (V.value(xp) - V.value(xm)) / (2.0 * h);
    }
    CHECK((g - g_fd).cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + g.cwiseAbs().maxCoeff()));

    const Matrix H = V.hessian(x);
    const Matrix H_fd = jacobian_fd([&](const Vector& y) { return V.gradient(y); }, x, h);
    CHECK((H - H_fd).cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + H.cwiseAbs().maxCoeff()));

    const Vector T = V.third_contract(x, sigma);
    Vector T_fd(d);
    for (int k = 0; k < d; ++k) {
      Vector xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      T_fd[k] = ((sigma.array() * V.hessian(xp).array()).sum() -
                 (sigma.array() * V.hessian(xm).array()).sum()) /
                (2.0 * h);
    }
    CHECK((T - T_fd).cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + T.cwiseAbs().maxCoeff()));
  }
}

}  // namespace

TEST_CASE("quadratic potential evaluates V, gradient and Hessian") {
  const auto V = make_quadratic_potential(scalar(1.0));
  CHECK(V->value(vec1(2.0)) == doctest::Approx(2.0));
  CHECK(V->gradient(vec1(2.0))[0] == doctest::Approx(2.0));
  CHECK(V->hessian(vec1(2.0))(0, 0) == doctest::Approx(1.0));
  CHECK(V->degree() == 1);
  CHECK(V->is_quadratic());
}

TEST_CASE("double well has its critical point at 1 and third derivative 6x") {
  const auto V = make_double_well_potential(1, 1.0, 1.0);
  CHECK(V->value(vec1(1.0)) == doctest::Approx(-0.25));
  CHECK(V->gradient(vec1(1.0))[0] == doctest::Approx(0.0));
  CHECK(V->third_contract(vec1(1.0), scalar(1.0))[0] == doctest::Approx(6.0));
  CHECK(V->third_contract(vec1(-0.5), scalar(1.0))[0] == doctest::Approx(-3.0));
  CHECK(V->degree() == 2);
  CHECK_FALSE(V->is_quadratic());
}

TEST_CASE("builtin potentials reject invalid parameters") {
  Matrix notspd(2, 2);
  notspd << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(make_quadratic_potential(notspd), ModelError);
  Matrix asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS(make_quadratic_potential(asym), ModelError);
  CHECK_THROWS_AS(make_double_well_potential(1, 0.0, 1.0), ModelError);
  CHECK_THROWS_AS(make_double_well_potential(1, -1.0, 1.0), ModelError);
  CHECK_THROWS_AS(make_double_well_potential(1, 1.0, 0.0), ModelError);
}

TEST_CASE("analytic derivatives agree with finite differences at random points") {
  Matrix Q(3, 3);
  Q << 2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0;
  Matrix sigma(3, 3);
  sigma << 1.0, 0.2, 0.0, 0.2, 0.7, 0.1, 0.0, 0.1, 0.5;
  check_derivatives(*make_quadratic_potential(Q), sigma, 1);
  check_derivatives(*make_double_well_potential(3, 1.3, 0.7), sigma, 2);
  check_derivatives(*make_double_well_potential(1, 1.0, 1.0), scalar(1.0), 3);
  check_derivatives(*make_zero_potential(3), sigma, 4);
  const Matrix B = coupled_B();
  check_derivatives(*make_double_well_potential(2, 1.0, 2.0), B * B.transpose(), 5);
}

TEST_CASE("finite-difference derivatives") {
  SUBCASE("quadratic is exact under central differences") {
    const auto d = finite_difference_derivatives(
        [](const Vector& x) { return 0.5 * x[0] * x[0]; }, vec1(3.0), 1e-4, scalar(1.0));
    CHECK(std::abs(d.gradient[0] - 3.0) < 1e-7);
  }
  SUBCASE("quartic Hessian matches 3x^2") {
    const auto d = finite_difference_derivatives(
        [](const Vector& x) { return 0.25 * std::pow(x[0], 4); }, vec1(1.0), 1e-4, scalar(1.0));
    CHECK(std::abs(d.hessian(0, 0) - 3.0) < 1e-6);
    CHECK(std::abs(d.third_contract[0] - 6.0) < 1e-4);
  }
  SUBCASE("constant field has zero derivatives") {
    const auto d = finite_difference_derivatives([](const Vector&) { return 4.0; },
                                                 Vector::Constant(2, 0.5), 1e-4,
                                                 Matrix::Identity(2, 2));
    CHECK(d.gradient.cwiseAbs().maxCoeff() == 0.0);
    CHECK(d.hessian.cwiseAbs().maxCoeff() == 0.0);
    CHECK(d.third_contract.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("non-finite values are errors") {
    CHECK_THROWS_AS(finite_difference_derivatives(
                        [](const Vector& x) { return std::log(x[0]); }, vec1(0.0), 1e-4,
                        scalar(1.0)),
                    ModelError);
    CHECK_THROWS_AS(finite_difference_derivatives([](const Vector&) { return 0.0; }, vec1(0.0),
                                                  0.0, scalar(1.0)),
                    ModelError);
  }
  SUBCASE("fallback potential tracks the analytic double well") {
    const auto analytic = make_double_well_potential(2, 1.0, 1.0);
    const auto fd = make_finite_difference_potential(
        [&](const Vector& x) { return analytic->value(x); }, 2, 2);
    const Vector x = (Vector(2) << 0.7, -1.2).finished();
    const Matrix sigma = Matrix::Identity(2, 2);
    CHECK((fd->gradient(x) - analytic->gradient(x)).norm() < 1e-6);
    CHECK((fd->hessian(x) - analytic->hessian(x)).norm() < 1e-5);
    CHECK((fd->third_contract(x, sigma) - analytic->third_contract(x, sigma)).norm() < 1e-3);
  }
}

TEST_CASE("grid weights are trapezoidal") {
  for (int M : {2, 7, 32, 1000}) {
    const Grid g = Grid::make(M);
    CHECK(std::abs(g.weights.sum() - 1.0) <= 1e-15 * M);
    CHECK(g.nodes[0] == 0.0);
    CHECK(g.nodes[M] == 1.0);
    CHECK(g.weights[0] == doctest::Approx(0.5 / M));
    CHECK(g.weights[1] == doctest::Approx(1.0 / M));
  }
  // sum w u^2 - 1/3 = du^2 / 6 for the trapezoid rule on u^2.
  for (int M : {8, 16, 32}) {
    const Grid g = Grid::make(M);
    const double q = (g.weights.array() * g.nodes.array().square()).sum();
    CHECK(q - 1.0 / 3.0 == doctest::Approx(g.du * g.du / 6.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(Grid::make(1), ModelError);
}

TEST_CASE("paths and observations") {
  Path p(4, 2);
  CHECK(p.node_count() == 5);
  p.at(3, 1) = -2.5;
  CHECK(p.node(3)[1] == -2.5);
  CHECK(p.sup_norm() == 2.5);
  CHECK(p.all_finite());
  CHECK_THROWS_AS(Path(4, 2, Vector::Zero(9)), ModelError);

  Matrix y(5, 1);
  y << 0.0, 0.25, 0.5, 0.75, 1.0;
  const Observations obs = Observations::from_node_values(y);
  CHECK(obs.intervals() == 4);
  for (int m = 0; m < 4; ++m) CHECK(obs.increments(m, 0) == doctest::Approx(0.25));
  y(0, 0) = 0.1;
  CHECK_THROWS_AS(Observations::from_node_values(y), ModelError);
}

TEST_CASE("matrix sets check invertibility") {
  const MatrixSet s = MatrixSet::make(coupled_A(), coupled_B());
  CHECK((s.BBt_inv * s.BBt - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  Matrix singular(2, 2);
  singular << 1.0, 2.0, 2.0, 4.0;
  CHECK_THROWS_AS(MatrixSet::make(coupled_A(), singular), ModelError);
  CHECK_THROWS_AS(MatrixSet::make(scalar(0.0), coupled_B()), ModelError);
}

TEST_CASE("smoothing problem block structure") {
  const auto s = linear_smoothing(8);
  const Matrix A = s.joint_drift();
  const Matrix B = s.joint_noise();
  CHECK(A(1, 0) == 1.0);
  CHECK(A(0, 0) == 0.0);
  CHECK(A(0, 1) == 0.0);
  CHECK(B(0, 1) == 0.0);
  CHECK(B(1, 1) == 1.0);
  CHECK(s.signal.A.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(check_compatible(ProblemSpec(s), Grid::make(9)), ModelError);
}

TEST_CASE("validate_problem") {
  SUBCASE("OU with Q = I passes (Q) with matrix -1") {
    const ValidationReport r = validate_problem(ou_bridge());
    REQUIRE(r.checks.size() >= 2);
    CHECK(r.ok());
    const auto& q = r.checks[1];
    CHECK_FALSE(q.skipped);
    CHECK(q.statistic == doctest::Approx(-1.0));
  }
  SUBCASE("double well skips (Q) and passes (M) near 1/4") {
    const ValidationReport r = validate_problem(double_well_bridge());
    CHECK(r.ok());
    CHECK(r.checks[1].skipped);
    // min over R in {10, 100} of a/4 - b/(2 R^2), attained at R = 10
    const double expected = 0.25 - 0.5 / 100.0;
    CHECK(r.checks[0].statistic == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("stationary log alpha passes the decay check") {
    const ValidationReport r = validate_problem(double_well_smoothing(8));
    CHECK(r.ok());
    bool found = false;
    for (const auto& c : r.checks) {
      if (c.name.find("alpha") != std::string::npos) {
        found = true;
        CHECK(c.passed);
        CHECK(c.statistic < 0.0);
      }
    }
    CHECK(found);
  }
  SUBCASE("a linear drift that destabilizes the OU fails (Q)") {
    BridgeProblem p = ou_bridge();
    p.mats = MatrixSet::make(scalar(1.0), scalar(1.0));  // QA + AQ - Q^2 = 1
    const ValidationReport r = validate_problem(p);
    CHECK_FALSE(r.ok());
    ValidationOptions strict;
    strict.strict = true;
    CHECK_THROWS_AS(validate_problem(p, strict), ValidationError);
  }
  SUBCASE("deterministic given the sweep seed") {
    const auto a = validate_problem(double_well_smoothing(8));
    const auto b = validate_problem(double_well_smoothing(8));
    REQUIRE(a.checks.size() == b.checks.size());
    for (std::size_t i = 0; i < a.checks.size(); ++i) {
      CHECK(a.checks[i].statistic == b.checks[i].statistic);
    }
  }
}
