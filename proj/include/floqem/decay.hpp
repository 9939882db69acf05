#pragma once

#include "floqem/spectral.hpp"

namespace floqem {

struct DecayFit {
  double rate_right = 0.0;  // fitted exponential rate on the right tail
  double rate_left = 0.0;
  double r2_right = 0.0;
  double r2_left = 0.0;
  double omega_min = 0.0;  // reference hyperbolic rate of the comparison system
  double slack = 1.05;

  double kappa() const { return 0.5 * (rate_right + rate_left); }
  bool within_reference() const {
    return rate_right > 0 && rate_left > 0 &&
           rate_right <= slack * omega_min && rate_left <= slack * omega_min;
  }
};

// Least-squares fit of log |state| on each tail window
// window_frac.lo * T <= |x| <= window_frac.hi * T of a reconstructed profile.
// Throws FitRejected when a tail is not cleanly exponential (low R^2, too few
// points, or a non-decaying slope).
DecayFit fit_decay_rate(const EigenCandidate& cand,
                        Interval window_frac = {0.5, 1.0}, double min_r2 = 0.99);

// Constant-coefficient hyperbolic block plus a bounded perturbation field D
// with sup norm delta. Admissibility requires delta below the spectral-gap
// budget min(-kappa_s, kappa_u) / (2 K), K the eigenbasis condition number.
struct RoughnessProbe {
  MatrixXd base;
  MatrixField D;
  double delta = 0.0;
  double horizon = 50.0;
};

struct RoughnessResult {
  VectorXd exponents;  // averaged growth rates, descending
  double kappa_s_base = 0.0;
  double kappa_u_base = 0.0;
  double kappa_s_meas = 0.0;  // largest negative measured exponent
  double kappa_u_meas = 0.0;  // smallest positive measured exponent
  double K = 0.0;             // eigenbasis condition number of the base block
  double delta = 0.0;
  double budget = 0.0;  // admissibility bound on delta

  // Measured edge rates must stay within 2 K delta of the base rates, toward
  // the interior of the gap.
  bool within_bands(double fit_tol = 1e-2) const;
};

RoughnessResult roughness_probe(const RoughnessProbe& probe,
                                const IntegratorConfig& cfg = {});

}  // namespace floqem
