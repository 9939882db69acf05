#pragma once

#include "floqem/quadrature.hpp"
#include "floqem/spectral.hpp"

#include <vector>

namespace floqem {

// First-order shift of the matched eigenvalue under B, from the exact state:
// -integral <u*, B u*>.
double lambda_prime(const Perturbation& pert, const VectorField& u_star,
                    const QuadratureConfig& quad = {});

// Bounded real solution of a scalar periodic channel at the reference energy,
// z(x) = Re or Im of e^{i nu x} g(x) with g periodic. Evaluation goes through
// the stored period map, so it is exact (no secular drift) for any |x|.
struct BlochFunction {
  int component = 0;  // which diagonal channel of the periodic part
  double nu = 0.0;    // reduced exponent, in (0, pi/period]
  int phase = 0;      // 0 = real part, 1 = imaginary part
  ScalarField z;      // complex envelope normalized to unit sup over one period
  double period = 0.0;
};

// All bounded solutions of the diagonal comparison channels at lambda0, two
// per center channel. Requires a diagonal periodic part.
std::vector<BlochFunction> generalized_eigenfunctions(
    const Potential& pot, double lambda0, const FloquetConfig& cfg = {});

struct FunctionalValue {
  double value = 0.0;       // -<z_k e_c, B u*> + lambda'(B) <z_k e_c, u*>
  double correction = 0.0;  // the lambda'(B) term alone
};

// Leading obstruction functional against one bounded solution.
FunctionalValue tangent_functional(const Perturbation& pert,
                                   const BlochFunction& zk,
                                   const VectorField& u_star,
                                   double lambda_prime_value,
                                   const QuadratureConfig& quad = {});

// Reduced two-channel form: integral of b_{0,c}(x) z_k(x) u_0(x). For
// perturbations with a zero slot on the localized channel the general
// functional collapses to this single integral (up to overall sign).
double example_offdiag_reduction(const Perturbation& pert,
                                 const BlochFunction& zk,
                                 const VectorField& u_star,
                                 const QuadratureConfig& quad = {});

struct Codimension {
  int tangent = 0;   // number of independent obstruction functionals, 2m
  int matching = 0;  // codimension of the matched set, 2m + 1
};

Codimension codimension(int center_count);
Codimension codimension(const FloquetData& fd);

// The tangent-space data for the worked two-channel setup: bounded solutions
// z_k, their scalar representers g_k = z_k u_0, and the Gram determinant of
// the normalized representers.
struct TangentData {
  double lambda0 = 0.0;
  VectorField u_star;
  std::vector<BlochFunction> z;
  std::vector<ScalarField> representers;
  std::vector<double> representer_norms;  // L2 norms of g_k
  double gram_det = 0.0;                  // det of the normalized Gram matrix
  Codimension codim;
};

TangentData make_tangent_data(const Potential& pot, double lambda0,
                              const FloquetConfig& cfg = {},
                              const QuadratureConfig& quad = {});

// Removes the representer components: the result psi_t has
// <psi_t, g_k> = 0 for all k, so an off-diagonal perturbation built from it
// is tangent to the persistence set at first order.
ScalarField project_tangent(const ScalarField& psi, const TangentData& td,
                            const QuadratureConfig& quad = {});

struct PersistenceRow {
  double epsilon = 0.0;
  double lambda_min = 0.0;
  double sigma_min = 0.0;
  bool flagged = false;
};

struct PersistenceScan {
  std::vector<PersistenceRow> rows;
  // log-log slope of sigma_min against epsilon over the smallest epsilons
  double fitted_exponent = std::numeric_limits<double>::quiet_NaN();
};

// Scales the unit direction by each epsilon, re-finds the mismatch minimum
// near lambda0, and fits the observed scaling exponent.
PersistenceScan persistence_scan(const Potential& pot, double lambda0,
                                 const Perturbation& direction,
                                 const std::vector<double>& epsilons,
                                 const MatchingConfig& cfg = {});

}  // namespace floqem
