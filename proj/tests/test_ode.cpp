#include <doctest.h>

#include <cmath>

#include "floqem/ode.hpp"
#include "oracles.hpp"

using namespace floqem;

namespace {

CoefficientField mathieu_field(double lambda) {
  CoefficientField f;
  f.size = 2;
  f.trace_free = true;
  f.eval = [lambda](double x) {
    MatrixXd c(2, 2);
    c << 0.0, 1.0, 2.0 * std::cos(2.0 * x) - lambda, 0.0;
    return c;
  };
  return f;
}

}  // namespace

TEST_CASE("adaptive integrator agrees with the fixed-step oracle") {
  CoefficientField f = mathieu_field(0.7);
  auto oracle_rhs = [&](double x) { return f(x); };
  const MatrixXd got = fundamental_matrix(f, 0.0, 5.0);
  const MatrixXd want =
      oracle::rk4_matrix(oracle_rhs, MatrixXd::Identity(2, 2), 0.0, 5.0, 40000);
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("scalar field with closed-form solution") {
  // y' = cos(x) y has y(x) = e^{sin x}.
  CoefficientField f;
  f.size = 1;
  f.eval = [](double x) {
    MatrixXd c(1, 1);
    c << std::cos(x);
    return c;
  };
  VectorXd y0(1);
  y0 << 1.0;
  const VectorXd y = integrate_vector_ode(f, y0, 0.0, 2.5);
  CHECK(std::abs(y(0) - std::exp(std::sin(2.5))) < 1e-9);
}

TEST_CASE("backward integration inverts forward integration") {
  CoefficientField f = mathieu_field(-0.2);
  const MatrixXd fwd = fundamental_matrix(f, 0.0, 4.0);
  const MatrixXd bwd = fundamental_matrix(f, 4.0, 0.0);
  CHECK((bwd * fwd - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("trace-free systems keep unit Wronskian") {
  CoefficientField f = mathieu_field(1.3);
  const MatrixXd m = fundamental_matrix(f, 0.0, M_PI);
  CHECK(std::abs(m.determinant() - 1.0) < 1e-9);
}

TEST_CASE("vector and matrix integration agree") {
  CoefficientField f = mathieu_field(0.1);
  VectorXd y0(2);
  y0 << 0.3, -1.1;
  const VectorXd yv = integrate_vector_ode(f, y0, 0.0, 3.0);
  const MatrixXd phi = fundamental_matrix(f, 0.0, 3.0);
  CHECK((yv - phi * y0).norm() < 1e-9);
}

TEST_CASE("subspace transport returns an orthonormal frame with the right span") {
  CoefficientField f;
  f.size = 3;
  f.eval = [](double x) {
    MatrixXd c(3, 3);
    c << 0.4, std::sin(x), 0.0, 0.1, -0.2, std::cos(x), 0.0, 0.3, -0.2;
    return c;
  };
  MatrixXd basis(3, 2);
  basis << 1, 0, 0, 1, 0, 0;
  const MatrixXd q = evolve_subspace(f, basis, 0.0, 3.0);
  CHECK((q.transpose() * q - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <
        1e-12);

  // Same span as the directly propagated frame: compare projectors.
  const MatrixXd prop = fundamental_matrix(f, 0.0, 3.0) * basis;
  Eigen::HouseholderQR<MatrixXd> qr(prop);
  const MatrixXd qd = qr.householderQ() * MatrixXd::Identity(3, 2);
  const MatrixXd pq = q * q.transpose();
  const MatrixXd pd = qd * qd.transpose();
  CHECK((pq - pd).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("checkpointed transport stores consistent frames and transitions") {
  CoefficientField f = mathieu_field(0.5);
  MatrixXd basis(2, 1);
  basis << 1, 0;
  const SubspacePath path = evolve_subspace_path(f, basis, 0.0, 3.0, 0.5);
  REQUIRE(path.x.size() == path.frames.size());
  REQUIRE(path.x.size() == path.transitions.size());
  REQUIRE(path.x.size() >= 7);
  CHECK(path.x.front() == doctest::Approx(0.0));
  CHECK(path.x.back() == doctest::Approx(3.0));

  // Uniform checkpoint spacing.
  const double h0 = path.x[1] - path.x[0];
  for (size_t j = 1; j + 1 < path.x.size(); ++j)
    CHECK(std::abs(path.x[j + 1] - path.x[j] - h0) < 1e-12);

  // Phi(x_j, x_{j-1}) Q_{j-1} = Q_j T_j at a few checkpoints.
  for (size_t j : {size_t(1), size_t(3), path.x.size() - 1}) {
    const MatrixXd phi = fundamental_matrix(f, path.x[j - 1], path.x[j]);
    const MatrixXd lhs = phi * path.frames[j - 1];
    const MatrixXd rhs = path.frames[j] * path.transitions[j];
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(path.transitions[j](0, 0) > 0);  // positive-diagonal convention
  }
}

TEST_CASE("backward checkpointed transport works") {
  CoefficientField f = mathieu_field(-0.4);
  MatrixXd basis(2, 1);
  basis << 0, 1;
  const SubspacePath path = evolve_subspace_path(f, basis, 2.0, -2.0, 0.5);
  CHECK(path.x.front() == doctest::Approx(2.0));
  CHECK(path.x.back() == doctest::Approx(-2.0));
  const MatrixXd phi = fundamental_matrix(f, path.x[0], path.x[1]);
  const MatrixXd lhs = phi * path.frames[0];
  const MatrixXd rhs = path.frames[1] * path.transitions[1];
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("non-finite coefficient evaluations abort the integration") {
  CoefficientField f;
  f.size = 1;
  f.eval = [](double x) {
    MatrixXd c(1, 1);
    c << 1.0 / (1.0 - x);  // pole at x = 1
    return c;
  };
  CHECK_THROWS_AS(fundamental_matrix(f, 0.0, 2.0), NumericalError);
}

TEST_CASE("frame rank collapse is detected") {
  CoefficientField f;
  f.size = 3;
  f.eval = [](double) {
    MatrixXd c = MatrixXd::Zero(3, 3);
    c.diagonal() << 8.0, -8.0, -8.0;
    return c;
  };
  MatrixXd basis(3, 2);
  const double s = 1.0 / std::sqrt(2.0);
  basis << s, s, s, 0, 0, s;
  IntegratorConfig cfg;
  cfg.renorm_interval = 2.0;  // contrast e^{32} within one segment
  CHECK_THROWS_AS(evolve_subspace(f, basis, 0.0, 2.0, cfg), RankCollapse);
}

TEST_CASE("integrator configuration is validated") {
  IntegratorConfig cfg;
  cfg.rel_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = IntegratorConfig{};
  cfg.max_step = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = IntegratorConfig{};
  cfg.renorm_interval = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
