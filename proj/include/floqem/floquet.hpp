#pragma once
// Floquet analysis of periodic linear systems: monodromy matrix, multipliers
// and exponents, the decomposition Phi(x) = G(x) e^{Rx}, and spectral splits
// of R by the sign of Re(omega).

#include <vector>

#include "floqem/ode.hpp"
#include "floqem/types.hpp"

namespace floqem {

struct PeriodicSystem {
  CoefficientField field;
  double period = 0;

  void validate() const;
};

struct FloquetConfig {
  IntegratorConfig integrator;
  // Multipliers within this of unit modulus count as center multipliers.
  double center_tol = 1e-6;
  // Multipliers within this of -1 sit on the logarithm branch cut; the
  // decomposition refuses them (doubling the period resolves it).
  double branch_tol = 1e-6;
  // Spectral-gap tolerance for classifying Re(omega) in the split.
  double gap_tol = 1e-6;
  int grid_samples = 33;
};

struct SpectralSplit {
  MatrixXcd stable_basis, center_basis, unstable_basis;  // orthonormal columns
  MatrixXcd stable_proj, center_proj, unstable_proj;     // spectral projections
  int stable_dim = 0, center_dim = 0, unstable_dim = 0;
};

struct FloquetData {
  double period = 0;
  MatrixXd monodromy;
  VectorXcd multipliers;
  VectorXcd exponents;  // principal branch, e^{p omega} = mu
  MatrixXcd log_coeff;  // R = (1/p) log M, principal branch
  std::vector<double> grid;
  std::vector<MatrixXd> phi;  // Phi(x_j), Phi(0) = I
  std::vector<MatrixXcd> g;   // G(x_j) = Phi(x_j) e^{-R x_j}
  int center_count = 0;       // even by pairing; equals 2m
  SpectralSplit split;
  double omega_min = 0;       // least positive Re(omega); +inf if none
  double det_defect = 0;      // |det M - 1|
  double exp_defect = 0;      // relative defect of e^{pR} vs M
  double periodicity_defect = 0;  // |G(p) - I| = |M e^{-pR} - I|
};

MatrixXd monodromy(const PeriodicSystem& sys, const IntegratorConfig& cfg = {});

VectorXcd floquet_multipliers(const MatrixXd& monodromy);

// Principal-branch exponents omega = log(mu)/p.
VectorXcd floquet_exponents(const VectorXcd& multipliers, double period);

// Number of multipliers with | |mu| - 1 | < tol; throws if the count is odd
// (pairing forces evenness for the systems this library targets).
int count_center_multipliers(const VectorXcd& multipliers, double tol);

FloquetData floquet_decomposition(const PeriodicSystem& sys,
                                  const FloquetConfig& cfg = {});

// Split of a (possibly complex) coefficient matrix by the sign of the real
// part of its eigenvalues. The literal gap precondition "no eigenvalue with
// 0 < |Re| < tol" is not testable in floating point (true center eigenvalues
// compute to ~1e-15); the guard errors iff some |Re| lands in the ambiguity
// band [0.1 tol, tol).
SpectralSplit spectral_split(const MatrixXcd& R, double tol = 1e-6);

// Real orthonormal bases of the stable (|mu| < 1) and unstable (|mu| > 1)
// invariant subspaces of a real monodromy matrix. Branch-free: grouping by
// |mu| against 1 equals grouping by Re(omega) against 0.
struct HyperbolicBases {
  MatrixXd stable, unstable;
  int center_count = 0;
};
HyperbolicBases hyperbolic_bases(const MatrixXd& monodromy,
                                 double center_tol = 1e-6);

// On-demand evaluation of Phi(x) for x in [0, p], integrating from the
// nearest stored node; phi_reduced accepts any x and reduces it mod p.
class PeriodicFlow {
 public:
  PeriodicFlow(PeriodicSystem sys, const IntegratorConfig& cfg = {},
               int nodes = 65);

  MatrixXd phi(double x) const;          // x in [0, p]
  MatrixXd phi_reduced(double x) const;  // Phi(x mod p)
  double period() const { return sys_.period; }

 private:
  PeriodicSystem sys_;
  IntegratorConfig cfg_;
  std::vector<double> nodes_;
  std::vector<MatrixXd> values_;
};

// Checks that e^{p s} stays clear of the multiplier set, through both the
// multiplier route and the exponent route; the two must agree, which is
// itself asserted (disagreement means a branch bug).
bool shifted_spectrum_clear(const FloquetData& fd, double s,
                            double tol = 1e-8);

}  // namespace floqem
