#pragma once

#include "floqem/floquet.hpp"
#include "floqem/potentials.hpp"

#include <vector>

namespace floqem {

// Trace of the period map of -y'' + Vp y = lambda y.
double hill_discriminant(const ScalarField& Vp, double period, double lambda,
                         const IntegratorConfig& cfg = {});

struct BandPoint {
  double lambda = 0.0;
  double discriminant = 0.0;
  bool in_band = false;  // |discriminant| <= 2
};

struct Band {
  double lo = 0.0;
  double hi = 0.0;
  double midpoint() const { return 0.5 * (lo + hi); }
};

struct BandStructure {
  std::vector<BandPoint> table;
  std::vector<Band> bands;  // edges refined to ~1e-10; clipped at scan range
};

BandStructure band_scan(const ScalarField& Vp, double period, Interval range,
                        int samples, const IntegratorConfig& cfg = {},
                        int threads = 1);

double first_band_midpoint(const BandStructure& bs);

// U' = [[0, I], [Ap - lambda, 0]] U, the periodic comparison system.
PeriodicSystem infinity_system(const Potential& pot, double lambda);
// U' = [[0, I], [A + B - lambda, 0]] U (B omitted when pert is null).
CoefficientField full_system(const Potential& pot, const Perturbation* pert,
                             double lambda);

struct MatchingConfig {
  double T = 15.0;             // matching half-interval
  double mismatch_tol = 1e-5;  // sigma_min below this flags an eigenvalue
  double radius = 0.02;        // lambda search half-width
  int coarse_samples = 41;
  double lambda_tol = 1e-9;    // width of the final bracketing interval
  double sample_step = 0.02;   // eigenfunction grid spacing (snapped to T)
  double blend_halfwidth = 1.0;
  FloquetConfig floquet;
  int threads = 1;

  void validate() const;
};

// Everything about the comparison system at one lambda that the matching step
// needs: invariant subspaces of the monodromy operator at x = 0 and their
// push-forwards to the matching endpoints.
struct MatchContext {
  double lambda = 0.0;
  double period = 0.0;
  int center_count = 0;
  double omega_min = 0.0;
  MatrixXd stable_inv;    // orthonormal, spans the decaying set at x = 0
  MatrixXd unstable_inv;  // orthonormal, spans the growing set at x = 0
  MatrixXd anchor_s;      // orthonormal frame at x = +T for decaying solutions
  MatrixXd anchor_u;      // orthonormal frame at x = -T for growing solutions
};

MatchContext make_match_context(const Potential& pot, double lambda,
                                const MatchingConfig& cfg = {});

struct MismatchResult {
  double lambda = 0.0;
  double sigma_min = 0.0;
  int center_count = 0;
  double omega_min = 0.0;
  VectorXd coeff_s;  // projection of v0s onto the comparison stable subspace
  VectorXd coeff_u;
  VectorXd v0s;  // matched direction at x = 0 from the right, unit norm
  VectorXd v0u;
  MatrixXd S0;  // propagated frames at x = 0
  MatrixXd U0;
};

MismatchResult mismatch(const Potential& pot, const Perturbation* pert,
                        double lambda, const MatchingConfig& cfg = {});
// Same propagation with caller-supplied anchors; sigma_min is invariant under
// orthonormal re-mixing of anchor columns.
MismatchResult mismatch_with_anchors(const Potential& pot,
                                     const Perturbation* pert,
                                     const MatchContext& ctx,
                                     const MatchingConfig& cfg = {});

struct ScanPoint {
  double lambda = 0.0;
  double sigma_min = 0.0;
};

struct EigenCandidate {
  double lambda = 0.0;
  double sigma_min = 0.0;
  bool flagged = false;  // sigma_min < mismatch_tol
  int center_count = 0;
  double omega_min = 0.0;
  VectorXd coeff_s, coeff_u, v0s, v0u;
  std::vector<ScanPoint> scan;  // coarse mismatch table

  // Filled by eigenfunction():
  std::vector<double> grid;  // ascending, [-T, T]
  MatrixXd u;                // rows = grid, cols = n, first block, unit L2
  MatrixXd state;            // rows = grid, cols = 2n
  double residual = std::numeric_limits<double>::quiet_NaN();
  double seam_jump = std::numeric_limits<double>::quiet_NaN();
};

// Coarse scan of sigma_min over [guess - radius, guess + radius], then
// golden-section refinement around an interior minimum. Throws MatchingError
// when the minimum sits on the scan boundary.
EigenCandidate find_embedded_eigenvalue(const Potential& pot,
                                        const Perturbation* pert,
                                        double lambda_guess,
                                        const MatchingConfig& cfg = {});

// Reconstructs the matched profile on [-T, T] from the two one-sided
// propagations, blending across |x| <= blend_halfwidth. Fills grid, u, state,
// residual (grid L2 of -u'' + (A + B - lambda) u) and seam_jump.
void eigenfunction(const Potential& pot, const Perturbation* pert,
                   EigenCandidate& cand, const MatchingConfig& cfg = {});

}  // namespace floqem
