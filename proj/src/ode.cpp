#include "floqem/ode.hpp"

#include <algorithm>
#include <cmath>

namespace floqem {

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0) || !(abs_tol > 0))
    throw ConfigError("integrator tolerances must be positive");
  if (!(max_step > 0)) throw ConfigError("max_step must be positive");
  if (!(renorm_interval > 0))
    throw ConfigError("renorm_interval must be positive");
  if (max_steps <= 0) throw ConfigError("max_steps must be positive");
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// Difference between the 5th and the embedded 4th order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

double error_norm(const MatrixXd& diff, const MatrixXd& y0, const MatrixXd& y1,
                  double abs_tol, double rel_tol) {
  double err = 0;
  for (int j = 0; j < diff.cols(); ++j)
    for (int i = 0; i < diff.rows(); ++i) {
      double scale =
          abs_tol + rel_tol * std::max(std::abs(y0(i, j)), std::abs(y1(i, j)));
      err = std::max(err, std::abs(diff(i, j)) / scale);
    }
  return err;
}

// Forward-only core; span > 0 guaranteed by the wrapper.
MatrixXd dopri5(const std::function<MatrixXd(double)>& C, MatrixXd y,
                double x0, double x1, const IntegratorConfig& cfg) {
  const double span = x1 - x0;
  double x = x0;
  MatrixXd k1 = C(x) * y;  // FSAL
  double h = std::min({cfg.max_step, span, 0.5 / (k1.norm() / (y.norm() + 1e-300) + 1.0)});
  double errold = 1e-4;
  bool rejected = false;
  long steps = 0;

  while (x1 - x > 1e-14 * std::max(1.0, std::abs(x1))) {
    if (++steps > cfg.max_steps)
      throw NumericalError("integration exceeded the step budget");
    h = std::min({h, cfg.max_step, x1 - x});
    if (h < 1e-14 * std::max(1.0, std::abs(x)))
      throw StepSizeUnderflow("step size underflow at x = " +
                              std::to_string(x));

    MatrixXd k2 = C(x + c2 * h) * (y + h * (a21 * k1));
    MatrixXd k3 = C(x + c3 * h) * (y + h * (a31 * k1 + a32 * k2));
    MatrixXd k4 = C(x + c4 * h) * (y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    MatrixXd k5 = C(x + c5 * h) *
                  (y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    MatrixXd k6 =
        C(x + h) *
        (y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    MatrixXd y5 =
        y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    MatrixXd k7 = C(x + h) * y5;
    MatrixXd diff =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = error_norm(diff, y, y5, cfg.abs_tol, cfg.rel_tol);
    if (err <= 1.0) {
      x += h;
      y = std::move(y5);
      k1 = std::move(k7);
      double fac = 0.9 * std::pow(std::max(err, 1e-16), -0.17) *
                   std::pow(errold, 0.04);
      fac = std::clamp(fac, 0.2, rejected ? 1.0 : 5.0);
      h *= fac;
      errold = std::max(err, 1e-4);
      rejected = false;
    } else {
      h *= std::max(0.1, 0.9 * std::pow(err, -0.2));
      rejected = true;
    }
  }
  return y;
}

}  // namespace

MatrixXd integrate_matrix_ode(const CoefficientField& C, const MatrixXd& y0,
                              double x0, double x1,
                              const IntegratorConfig& cfg) {
  cfg.validate();
  if (y0.rows() != C.size)
    throw NumericalError("state dimension does not match the field");
  if (x1 == x0) return y0;
  if (x1 > x0) {
    return dopri5([&](double x) { return C(x); }, y0, x0, x1, cfg);
  }
  // Backward marching: integrate W(s) = U(-s), W' = -C(-s) W, forward in s.
  return dopri5([&](double s) { return MatrixXd(-C(-s)); }, y0, -x0, -x1, cfg);
}

VectorXd integrate_vector_ode(const CoefficientField& C, const VectorXd& y0,
                              double x0, double x1,
                              const IntegratorConfig& cfg) {
  return integrate_matrix_ode(C, y0, x0, x1, cfg).col(0);
}

MatrixXd fundamental_matrix(const CoefficientField& C, double x0, double x1,
                            const IntegratorConfig& cfg) {
  return integrate_matrix_ode(C, MatrixXd::Identity(C.size, C.size), x0, x1,
                              cfg);
}

namespace {

// Thin QR with positive diagonal; detects numerical rank collapse.
void renormalize(MatrixXd& q, MatrixXd* r_out) {
  const int k = static_cast<int>(q.cols());
  Eigen::HouseholderQR<MatrixXd> qr(q);
  MatrixXd thin_q = qr.householderQ() * MatrixXd::Identity(q.rows(), k);
  MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (int i = 0; i < k; ++i)
    if (r(i, i) < 0) {
      thin_q.col(i) *= -1;
      r.row(i) *= -1;
    }
  double dmin = r.diagonal().cwiseAbs().minCoeff();
  double dmax = r.diagonal().cwiseAbs().maxCoeff();
  if (!(dmin > 1e-13 * dmax))
    throw RankCollapse("subspace frame lost rank during transport");
  q = std::move(thin_q);
  if (r_out) *r_out = std::move(r);
}

void check_orthonormal(const MatrixXd& basis) {
  MatrixXd gram = basis.transpose() * basis;
  gram -= MatrixXd::Identity(basis.cols(), basis.cols());
  if (gram.cwiseAbs().maxCoeff() > 1e-8)
    throw PreconditionError("subspace basis is not orthonormal");
}

}  // namespace

MatrixXd evolve_subspace(const CoefficientField& C, const MatrixXd& basis,
                         double x0, double x1, const IntegratorConfig& cfg) {
  check_orthonormal(basis);
  MatrixXd q = basis;
  const double dir = (x1 >= x0) ? 1.0 : -1.0;
  double x = x0;
  while (std::abs(x1 - x) > 1e-13 * std::max(1.0, std::abs(x1))) {
    double xn = x + dir * cfg.renorm_interval;
    if ((x1 - xn) * dir < 0) xn = x1;
    q = integrate_matrix_ode(C, q, x, xn, cfg);
    renormalize(q, nullptr);
    x = xn;
  }
  return q;
}

SubspacePath evolve_subspace_path(const CoefficientField& C,
                                  const MatrixXd& basis, double x0, double x1,
                                  double sample_step,
                                  const IntegratorConfig& cfg) {
  check_orthonormal(basis);
  if (!(sample_step > 0)) throw ConfigError("sample_step must be positive");
  const int k = static_cast<int>(basis.cols());
  const double step = std::min(sample_step, cfg.renorm_interval);
  // Index-computed checkpoints: exactly uniform, last one exactly x1.
  const long segments =
      std::max(1L, static_cast<long>(std::ceil(std::abs(x1 - x0) / step - 1e-9)));

  SubspacePath path;
  path.x.reserve(segments + 1);
  path.frames.reserve(segments + 1);
  path.transitions.reserve(segments + 1);
  path.x.push_back(x0);
  path.frames.push_back(basis);
  path.transitions.push_back(MatrixXd::Identity(k, k));

  MatrixXd q = basis;
  for (long j = 1; j <= segments; ++j) {
    const double xn =
        (j == segments)
            ? x1
            : x0 + (x1 - x0) * static_cast<double>(j) / segments;
    q = integrate_matrix_ode(C, q, path.x.back(), xn, cfg);
    MatrixXd r;
    renormalize(q, &r);
    path.x.push_back(xn);
    path.frames.push_back(q);
    path.transitions.push_back(std::move(r));
  }
  return path;
}

}  // namespace floqem
