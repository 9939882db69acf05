#pragma once
// Shared vocabulary: error taxonomy, field closures, small helpers.

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>

namespace floqem {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// Numerical failures map to CLI exit code 1, configuration problems to 2.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

struct StepSizeUnderflow : NumericalError {
  using NumericalError::NumericalError;
};
struct RankCollapse : NumericalError {
  using NumericalError::NumericalError;
};
struct GapViolation : NumericalError {
  using NumericalError::NumericalError;
};
struct BranchFailure : NumericalError {
  using NumericalError::NumericalError;
};
struct NonFiniteField : NumericalError {
  using NumericalError::NumericalError;
};
struct MatchingError : NumericalError {
  using NumericalError::NumericalError;
};
struct FitRejected : NumericalError {
  using NumericalError::NumericalError;
};
struct QuadratureError : NumericalError {
  using NumericalError::NumericalError;
};
struct PreconditionError : NumericalError {
  using NumericalError::NumericalError;
};

using ScalarField = std::function<double(double)>;
using VectorField = std::function<VectorXd(double)>;
using MatrixField = std::function<MatrixXd(double)>;

struct Interval {
  double lo = 0;
  double hi = 0;
  double length() const { return hi - lo; }
};

// Right-hand side x -> C(x) of a linear system U' = C(x)U. Every evaluation
// is checked for finiteness; a NaN/Inf entry aborts the integration rather
// than poisoning it silently.
struct CoefficientField {
  int size = 0;
  MatrixField eval;
  bool trace_free = false;

  MatrixXd operator()(double x) const {
    MatrixXd c = eval(x);
    if (c.rows() != size || c.cols() != size)
      throw NumericalError("coefficient field returned wrong dimensions");
    if (!c.allFinite())
      throw NonFiniteField("coefficient field non-finite at x = " +
                           std::to_string(x));
    return c;
  }
};

}  // namespace floqem
