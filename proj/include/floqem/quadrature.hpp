#pragma once

#include "floqem/types.hpp"

namespace floqem {

struct QuadratureConfig {
  double half_width = 30.0;  // integrate over [-half_width, half_width]
  double tol = 1e-11;        // relative error target for the adaptive rule
  int max_depth = 15;
  double tail_tol = 1e-10;  // allowed mass on [W, 2W] on either side

  void validate() const;
};

// Adaptive Gauss-Kronrod on a finite interval.
double integrate_interval(const ScalarField& f, double a, double b,
                          const QuadratureConfig& cfg = {});

// Whole-line integral of a localized integrand: adaptive Gauss-Kronrod over
// [-W, W] plus a check that |f| carries less than tail_tol on the flanking
// windows [W, 2W] and [-2W, -W]. Throws QuadratureError when the tail check
// fails, which usually means the integrand is not localized enough for the
// chosen window.
double integrate_line(const ScalarField& f, const QuadratureConfig& cfg = {});

}  // namespace floqem
