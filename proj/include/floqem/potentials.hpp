#pragma once

#include "floqem/types.hpp"

#include <string>
#include <vector>

namespace floqem {

// Matrix Schrodinger potential A(x), asymptotically periodic with periodic
// part Ap(x). Off-band data (u_star, lambda_ref) is populated only for
// constructions that know an exact bound state.
struct Potential {
  int n = 0;
  double period = 0.0;
  double beta = 2.0;  // decay weight exponent for A - Ap
  MatrixField A;
  MatrixField Ap;
  std::string name;

  // Reference spectral parameter (NaN when the construction does not fix one).
  double lambda_ref = std::numeric_limits<double>::quiet_NaN();
  VectorField u_star;     // exact localized state at lambda_ref, when known
  VectorField u_star_xx;  // its second derivative

  bool diagonal_periodic_part = false;
  std::vector<ScalarField> Ap_diagonal;  // scalar blocks when diagonal

  void validate() const;
};

struct WeightedNorm {
  double value = 0.0;
  double argmax = 0.0;
  double grid_defect = 0.0;  // |value - half-density estimate|, resolution check
};

// sup over |x| <= window of (1 + |x|)^beta * max_ij |F_ij(x)|, dense scan with
// golden-section refinement around the grid maximizer.
WeightedNorm xbeta_norm(const MatrixField& F, int n, double beta,
                        double window = 40.0, int density = 4001);
WeightedNorm xbeta_norm(const ScalarField& f, double beta, double window = 40.0,
                        int density = 4001);

// Difference between the weighted sup over windows W and 2W. Near zero means
// the weighted norm of A - Ap has stabilized, i.e. the decay weight is honest.
double tail_stabilization_defect(const Potential& pot, double window = 40.0);

// max over sample points of |F(x) - F(x)^T| entries.
double symmetry_defect(const MatrixField& F, int n, double window = 40.0,
                       int samples = 801);
// max over sample points of |F(x + period) - F(x)| entries.
double periodicity_defect(const MatrixField& F, int n, double period,
                          int samples = 801);

enum class PerturbationClass {
  full,          // symmetric pattern * profile
  diagonal,      // profile in one diagonal slot
  offdiag_row1,  // profile in slots (0, col) and (col, 0)
  t_beta,        // same placement as offdiag_row1 with b_00 = 0 kept exactly
};

std::string to_string(PerturbationClass cls);
PerturbationClass perturbation_class_from_string(const std::string& s);

// Symmetric perturbation B(x) = epsilon * direction(x). The structural zeros
// of each class are enforced by construction (exact 0.0 entries), not by
// filtering the evaluated matrix.
struct Perturbation {
  int n = 0;
  double beta = 2.0;
  PerturbationClass cls = PerturbationClass::t_beta;
  double epsilon = 0.0;
  MatrixField direction;  // unit-scale structure (epsilon = 1)
  std::string profile_name;
  int row = 0;
  int col = 1;

  MatrixXd eval(double x) const;
  MatrixField field() const;  // closure over eval, includes epsilon
  void validate() const;
};

ScalarField sech2_profile();
ScalarField gaussian_profile();
// Smooth compactly supported bump on (a, b), unit peak.
ScalarField bump_profile(double a, double b);

Perturbation make_perturbation(PerturbationClass cls, const ScalarField& profile,
                               const std::string& profile_name, double epsilon,
                               int n, double beta, int row = 0, int col = 1,
                               const MatrixXd* pattern = nullptr);

// Same structure, different amplitude.
Perturbation scaled(const Perturbation& p, double epsilon);

// Rescale so the weighted sup norm of the unit-scale direction equals 1.
Perturbation normalize_direction(const Perturbation& p, double window = 40.0);

// Two-channel example: a sech well shifted to sit at lambda0 inside the first
// band of a cosine lattice. Carries the exact bound state.
Potential make_example5(double lambda0);

// A = Ap = 0, for closed-form cross-checks.
Potential make_free_potential(int n, double period);

// Uniform-grid samples, cubic-spline interpolated. "diff" tabulates A - Ap on
// [x0, x0 + (rows-1) dx] (zero outside), "ap" tabulates one period [0, period]
// with matching endpoints. Each row is an n x n matrix in row-major order.
Potential make_table_potential(int n, double period, double beta, double x0,
                               double dx, const std::vector<std::vector<double>>& diff,
                               double ap_dx, const std::vector<std::vector<double>>& ap,
                               const std::string& name = "table");

}  // namespace floqem
