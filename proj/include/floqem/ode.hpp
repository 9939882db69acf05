#pragma once
// Adaptive integration of linear systems U' = C(x)U: single solutions, full
// fundamental matrices, and orthonormal subspace frames with renormalization.

#include <vector>

#include "floqem/types.hpp"

namespace floqem {

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.25;
  // Thin-QR cadence for subspace transport; growth-rate separation between
  // columns is harmless over one interval but fatal over many.
  double renorm_interval = 1.0;
  long max_steps = 4000000;

  void validate() const;
};

// Embedded Dormand-Prince 5(4) pair with PI step-size control. Backward
// integration (x1 < x0) negates the independent variable; no matrices are
// inverted. y0 may be a column, a square matrix, or a rectangular frame.
MatrixXd integrate_matrix_ode(const CoefficientField& C, const MatrixXd& y0,
                              double x0, double x1,
                              const IntegratorConfig& cfg = {});

VectorXd integrate_vector_ode(const CoefficientField& C, const VectorXd& y0,
                              double x0, double x1,
                              const IntegratorConfig& cfg = {});

// Phi(x1, x0): solution of Y' = C(x)Y with Y(x0) = I.
MatrixXd fundamental_matrix(const CoefficientField& C, double x0, double x1,
                            const IntegratorConfig& cfg = {});

// Transports the span of an orthonormal frame (N x k) and returns the
// orthonormal frame at x1. Triangular factors are normalized to positive
// diagonal, so results are deterministic.
MatrixXd evolve_subspace(const CoefficientField& C, const MatrixXd& basis,
                         double x0, double x1,
                         const IntegratorConfig& cfg = {});

// Checkpointed transport: frames Q_j at x_j and the k x k upper-triangular
// transitions T_j with Phi(x_j, x_{j-1}) Q_{j-1} = Q_j T_j (T_0 = I).
// Checkpoint spacing is min(sample_step, renorm_interval).
struct SubspacePath {
  std::vector<double> x;
  std::vector<MatrixXd> frames;
  std::vector<MatrixXd> transitions;
};

SubspacePath evolve_subspace_path(const CoefficientField& C,
                                  const MatrixXd& basis, double x0, double x1,
                                  double sample_step,
                                  const IntegratorConfig& cfg = {});

}  // namespace floqem
