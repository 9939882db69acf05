#include <doctest.h>

#include <cmath>

#include "floqem/decay.hpp"

using namespace floqem;

namespace {

EigenCandidate synthetic_candidate(const ScalarField& amplitude) {
  EigenCandidate cand;
  const int m = 750;
  const double h = 0.02;
  cand.grid.reserve(2 * m + 1);
  cand.state.resize(2 * m + 1, 2);
  for (int k = -m; k <= m; ++k) {
    const double x = h * k;
    cand.grid.push_back(x);
    const double a = amplitude(x);
    cand.state(k + m, 0) = a;
    cand.state(k + m, 1) = 0.5 * a;
  }
  cand.omega_min = 1.0;
  return cand;
}

MatrixField antisym_sine(double amp, double freq, double phase) {
  return [amp, freq, phase](double x) {
    MatrixXd d = MatrixXd::Zero(2, 2);
    d(0, 1) = amp * std::sin(freq * x + phase);
    d(1, 0) = -d(0, 1);
    return d;
  };
}

}  // namespace

TEST_CASE("exponential tails fit with unit rate and perfect R^2") {
  const EigenCandidate cand =
      synthetic_candidate([](double x) { return std::exp(-std::abs(x)); });
  const DecayFit fit = fit_decay_rate(cand);
  CHECK(fit.rate_right == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.rate_left == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.r2_right > 0.999999);
  CHECK(fit.r2_left > 0.999999);
  CHECK(fit.kappa() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.within_reference());
}

TEST_CASE("strongly modulated tails are rejected") {
  const EigenCandidate cand = synthetic_candidate([](double x) {
    return std::exp(-0.3 * std::abs(x)) * (1.0 + 0.8 * std::sin(4.0 * x));
  });
  CHECK_THROWS_AS(fit_decay_rate(cand), FitRejected);
}

TEST_CASE("growing tails are rejected") {
  const EigenCandidate cand =
      synthetic_candidate([](double x) { return std::exp(0.2 * std::abs(x)); });
  CHECK_THROWS_AS(fit_decay_rate(cand), FitRejected);
}

TEST_CASE("an empty profile cannot be fitted") {
  EigenCandidate cand;
  CHECK_THROWS_AS(fit_decay_rate(cand), PreconditionError);
}

TEST_CASE("rates above the comparison rate fail the reference check") {
  const EigenCandidate cand =
      synthetic_candidate([](double x) { return std::exp(-std::abs(x)); });
  DecayFit fit = fit_decay_rate(cand);
  fit.omega_min = 0.8;  // fitted rate 1.0 > 1.05 * 0.8
  CHECK_FALSE(fit.within_reference());
}

TEST_CASE("tiny perturbations keep the base growth rates") {
  RoughnessProbe probe;
  probe.base = MatrixXd::Zero(2, 2);
  probe.base.diagonal() << 1.0, -1.0;
  probe.delta = 1e-3;
  probe.D = antisym_sine(1e-3, 1.0, 0.0);
  probe.horizon = 50.0;

  const RoughnessResult r = roughness_probe(probe);
  CHECK(r.K == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.budget == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(r.exponents(0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.exponents(1) == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(r.within_bands());
}

TEST_CASE("admissible perturbations stay inside the rate bands") {
  RoughnessProbe probe;
  probe.base = MatrixXd::Zero(2, 2);
  probe.base.diagonal() << 0.9, -1.1;
  probe.delta = 0.18;  // budget is 0.45
  probe.D = antisym_sine(0.18, 1.7, 0.3);
  probe.horizon = 60.0;

  const RoughnessResult r = roughness_probe(probe);
  CHECK(r.kappa_u_base == doctest::Approx(0.9));
  CHECK(r.kappa_s_base == doctest::Approx(-1.1));
  CHECK(r.within_bands());
  // Traceless perturbation: the exponent sum equals the base trace.
  CHECK(r.exponents.sum() == doctest::Approx(-0.2).epsilon(1e-6));
}

TEST_CASE("four-dimensional probe orders its exponents") {
  RoughnessProbe probe;
  probe.base = MatrixXd::Zero(4, 4);
  probe.base.diagonal() << 1.2, 0.4, -0.5, -1.3;
  probe.delta = 0.08;  // budget is 0.2
  probe.horizon = 60.0;
  probe.D = [](double x) {
    MatrixXd d = MatrixXd::Zero(4, 4);
    d(0, 1) = 0.08 * std::sin(1.3 * x);
    d(0, 2) = 0.05 * std::cos(0.7 * x + 0.4);
    d(1, 3) = 0.06 * std::sin(2.1 * x + 1.1);
    d(2, 3) = 0.07 * std::cos(1.9 * x);
    MatrixXd a = d - d.transpose();
    return a;
  };

  const RoughnessResult r = roughness_probe(probe);
  CHECK(r.kappa_u_base == doctest::Approx(0.4));
  CHECK(r.kappa_s_base == doctest::Approx(-0.5));
  for (int i = 1; i < 4; ++i) CHECK(r.exponents(i - 1) >= r.exponents(i));
  CHECK(r.within_bands());
  CHECK(r.exponents.sum() == doctest::Approx(-0.2).epsilon(1e-6));
}

TEST_CASE("roughness preconditions are enforced") {
  RoughnessProbe probe;
  probe.base = MatrixXd::Zero(2, 2);
  probe.base.diagonal() << 0.9, -1.1;
  probe.horizon = 20.0;

  // Budget exceeded.
  probe.delta = 0.5;
  probe.D = antisym_sine(0.5, 1.0, 0.0);
  CHECK_THROWS_AS(roughness_probe(probe), PreconditionError);

  // Field exceeds its declared sup bound.
  probe.delta = 0.1;
  probe.D = antisym_sine(0.2, 1.0, 0.0);
  CHECK_THROWS_AS(roughness_probe(probe), PreconditionError);

  // Non-hyperbolic base.
  probe.base.diagonal() << 0.9, 0.0;
  probe.delta = 0.05;
  probe.D = antisym_sine(0.05, 1.0, 0.0);
  CHECK_THROWS_AS(roughness_probe(probe), PreconditionError);

  // No decaying direction at all.
  probe.base.diagonal() << 0.9, 1.1;
  CHECK_THROWS_AS(roughness_probe(probe), PreconditionError);
}
