// Acceptance harness: one pass/fail line per numbered criterion, exit code =
// number of failures. Every reference number is produced by an independent
// oracle (fixed-step RK4 + Richardson, composite Simpson, scalar shooting) or
// is a closed-form value of the constructions under test.

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "floqem/cli.hpp"
#include "floqem/config.hpp"
#include "floqem/csv.hpp"
#include "floqem/decay.hpp"
#include "floqem/persistence.hpp"
#include "oracles.hpp"

using namespace floqem;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void line(int k, bool ok, const std::string& text) {
  std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << k << ": " << text
            << std::endl;
  if (!ok) ++g_failures;
}

void note(const std::string& text) {
  std::cout << "       " << text << std::endl;
}

std::string g(double v) { return format_g(v); }

std::string s3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double sech(double x) { return 1.0 / std::cosh(x); }

// ---------------------------------------------------------------- criterion 1

struct TrigPoly {
  double c0 = 0, c1 = 0, c2 = 0, c3 = 0;
  double omega = 1.0;
  double operator()(double x) const {
    return c0 + c1 * std::cos(omega * x) + c2 * std::sin(omega * x) +
           c3 * std::cos(2.0 * omega * x);
  }
};

struct SystemStats {
  double det = 0, roundtrip = 0, closure = 0, defect = 0;
};

// One random second-order block system u'' = Q(x) u with symmetric periodic
// Q, written first order as U' = [[0, I], [Q, 0]] U (trace free).
SystemStats check_random_system(std::mt19937_64& rng, int nh, int& redraws) {
  std::uniform_real_distribution<double> uc(-0.7, 0.7), up(1.0, 1.8);

  for (int attempt = 0;; ++attempt) {
    if (attempt > 0 && ++redraws > 60)
      throw std::runtime_error("too many branch redraws");
    const double p = up(rng);
    std::vector<TrigPoly> entries;  // upper triangle, row major
    for (int a = 0; a < nh; ++a)
      for (int b = a; b < nh; ++b) {
        TrigPoly t;
        t.c0 = uc(rng);
        t.c1 = uc(rng);
        t.c2 = uc(rng);
        t.c3 = uc(rng);
        t.omega = 2.0 * M_PI / p;
        entries.push_back(t);
      }

    const int n = 2 * nh;
    PeriodicSystem sys;
    sys.period = p;
    sys.field.size = n;
    sys.field.trace_free = true;
    sys.field.eval = [entries, nh, n](double x) {
      MatrixXd c = MatrixXd::Zero(n, n);
      c.block(0, nh, nh, nh).setIdentity();
      int idx = 0;
      for (int a = 0; a < nh; ++a)
        for (int b = a; b < nh; ++b) {
          const double v = entries[idx++](x);
          c(nh + a, b) = v;
          c(nh + b, a) = v;
        }
      return c;
    };

    FloquetConfig fc;
    fc.integrator.rel_tol = 1e-11;
    fc.integrator.abs_tol = 1e-13;

    FloquetData fd;
    try {
      fd = floquet_decomposition(sys, fc);
    } catch (const BranchFailure&) {
      continue;  // multiplier on the logarithm cut; draw a fresh system
    } catch (const GapViolation&) {
      continue;  // modulus inside the center-classification ambiguity band
    }

    SystemStats st;
    st.det = fd.det_defect;

    // Spectral mapping: eigenvalues of R, exponentiated over one period, must
    // reproduce the multiplier multiset.
    Eigen::ComplexEigenSolver<MatrixXcd> es(fd.log_coeff, false);
    std::vector<bool> used(n, false);
    for (int i = 0; i < n; ++i) {
      const std::complex<double> val = std::exp(p * es.eigenvalues()(i));
      double best = 1e300;
      int pick = -1;
      for (int j = 0; j < n; ++j) {
        if (used[j]) continue;
        const double d = std::abs(val - fd.multipliers(j));
        if (d < best) {
          best = d;
          pick = j;
        }
      }
      used[pick] = true;
      st.roundtrip = std::max(
          st.roundtrip, best / std::max(1.0, std::abs(fd.multipliers(pick))));
    }

    // Multiplier moduli close under r -> 1/r: sorted moduli pair up to
    // reciprocal products of one.
    std::vector<double> mods(n);
    for (int i = 0; i < n; ++i) mods[i] = std::abs(fd.multipliers(i));
    std::sort(mods.begin(), mods.end());
    for (int i = 0; i < n; ++i)
      st.closure = std::max(st.closure, std::abs(mods[i] * mods[n - 1 - i] - 1.0));

    // Decomposition defect on 32 fresh grid points of the second period:
    // Phi(y) = G(y - p) e^{R y} there, equivalently Phi(y) = Phi(y - p) e^{pR}.
    // Neither point set touches the nodes stored by the decomposition.
    const MatrixXcd ep = (p * fd.log_coeff).exp();
    std::vector<double> pts;
    for (int j = 0; j < 32; ++j) {
      const double y = p + p * (j + 0.5) / 32.0;
      pts.push_back(y - p);
      pts.push_back(y);
    }
    std::sort(pts.begin(), pts.end());
    std::vector<MatrixXd> phi(pts.size());
    MatrixXd acc = MatrixXd::Identity(n, n);
    double prev = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
      acc = integrate_matrix_ode(sys.field, acc, prev, pts[i], fc.integrator);
      prev = pts[i];
      phi[i] = acc;
    }
    auto at = [&](double x) {
      const auto it = std::lower_bound(pts.begin(), pts.end(), x - 1e-12);
      return phi[static_cast<size_t>(it - pts.begin())];
    };
    for (int j = 0; j < 32; ++j) {
      const double y = p + p * (j + 0.5) / 32.0;
      const MatrixXcd lhs = at(y).cast<std::complex<double>>();
      const MatrixXcd rhs = at(y - p).cast<std::complex<double>>() * ep;
      st.defect = std::max(st.defect, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    return st;
  }
}

void criterion1() {
  std::mt19937_64 rng(20240517u);
  int redraws = 0;
  SystemStats worst;
  for (int i = 0; i < 25; ++i) {
    const SystemStats st = check_random_system(rng, (i % 2) ? 2 : 1, redraws);
    worst.det = std::max(worst.det, st.det);
    worst.roundtrip = std::max(worst.roundtrip, st.roundtrip);
    worst.closure = std::max(worst.closure, st.closure);
    worst.defect = std::max(worst.defect, st.defect);
  }
  const bool ok = worst.det < 1e-7 && worst.roundtrip < 1e-8 &&
                  worst.closure < 1e-6 && worst.defect < 1e-6;
  line(1, ok,
       "25 random trace-free periodic systems (13 of size 2, 12 of size 4): "
       "max |det M - 1| = " + s3(worst.det) +
       " (tol 1e-7), spectral round trip e^{p omega} vs mu = " +
       s3(worst.roundtrip) + " (tol 1e-8), modulus reciprocal pairing = " +
       s3(worst.closure) + " (tol 1e-6), decomposition defect on 32 fresh "
       "points = " + s3(worst.defect) + " (tol 1e-6)" +
       (redraws ? ", " + std::to_string(redraws) + " redraw(s)" : ""));
}

// ---------------------------------------------------------------- criterion 2

double criterion2() {
  // (a) Free potential: Delta(lambda) = 2 cos(p sqrt(lambda)).
  const ScalarField zero = [](double) { return 0.0; };
  IntegratorConfig tight;
  tight.rel_tol = 1e-10;
  tight.abs_tol = 1e-12;
  double free_err = 0.0;
  for (int k = 1; k <= 50; ++k) {
    const double lam = 0.08 * k;
    free_err = std::max(free_err,
                        std::abs(hill_discriminant(zero, M_PI, lam, tight) -
                                 2.0 * std::cos(M_PI * std::sqrt(lam))));
  }

  // (b) Cosine-lattice band edges across two integrator tolerance settings.
  const ScalarField vp = [](double x) { return 2.0 * std::cos(2.0 * x); };
  IntegratorConfig loose;
  loose.rel_tol = 1e-8;
  loose.abs_tol = 1e-10;
  const BandStructure bs_a = band_scan(vp, M_PI, {-1.0, 4.0}, 601, tight);
  const BandStructure bs_b = band_scan(vp, M_PI, {-1.0, 4.0}, 601, loose);
  double edge_err = 0.0;
  bool edges_ok = bs_a.bands.size() >= 2 && bs_a.bands.size() == bs_b.bands.size();
  if (edges_ok)
    for (size_t i = 0; i < 2; ++i) {
      edge_err = std::max(edge_err, std::abs(bs_a.bands[i].lo - bs_b.bands[i].lo));
      edge_err = std::max(edge_err, std::abs(bs_a.bands[i].hi - bs_b.bands[i].hi));
    }

  // (c) The reference energy sits strictly inside the first band.
  const double lambda0 = first_band_midpoint(bs_a);
  const double disc0 = hill_discriminant(vp, M_PI, lambda0, tight);

  const bool ok =
      free_err < 1e-8 && edges_ok && edge_err < 1e-6 && std::abs(disc0) < 2.0;
  line(2, ok,
       "free discriminant vs 2cos(p sqrt(lambda)) on 50 energies: max err = " +
       s3(free_err) + " (tol 1e-8); band edges across tolerance settings: "
       "max shift = " + s3(edge_err) + " (tol 1e-6); lambda0 = " + g(lambda0) +
       " with |Delta(lambda0)| = " + s3(std::abs(disc0)) + " < 2");
  return lambda0;
}

// ---------------------------------------------------------------- criterion 3

EigenCandidate criterion3(const ResolvedExperiment& rx) {
  const MismatchResult at0 =
      mismatch(rx.pot, rx.pert_ptr(), rx.lambda0, rx.cfg.matching);

  EigenCandidate cand = find_embedded_eigenvalue(rx.pot, rx.pert_ptr(),
                                                 rx.lambda0, rx.cfg.matching);
  eigenfunction(rx.pot, rx.pert_ptr(), cand, rx.cfg.matching);

  // Alignment: both profiles unit-L2 on the same grid with positive peak.
  const int rows = static_cast<int>(cand.grid.size());
  VectorXd exact(rows);
  for (int i = 0; i < rows; ++i)
    exact(i) = sech(cand.grid[i]) / std::sqrt(2.0);
  const double h = cand.grid[1] - cand.grid[0];
  double l2 = 0.0;
  for (int i = 0; i < rows; ++i)
    l2 += ((i == 0 || i == rows - 1) ? 0.5 : 1.0) * h * exact(i) * exact(i);
  exact /= std::sqrt(l2);
  const double state_err =
      std::max((cand.u.col(0) - exact).cwiseAbs().maxCoeff(),
               cand.u.col(1).cwiseAbs().maxCoeff());

  const Codimension codim = codimension(cand.center_count);
  const bool ok = at0.sigma_min < 1e-5 && state_err < 1e-5 &&
                  cand.residual < 1e-5 && cand.center_count == 2 &&
                  codim.matching == 3 && cand.flagged;
  line(3, ok,
       "sigma_min(lambda0) = " + s3(at0.sigma_min) +
       " (tol 1e-5); matched state vs (sech x, 0)/sqrt(2): max err = " +
       s3(state_err) + " (tol 1e-5); eigenvalue-equation residual = " +
       s3(cand.residual) + " (tol 1e-5); center multiplicity 2m = " +
       std::to_string(cand.center_count) + ", matched-set codimension = " +
       std::to_string(codim.matching));
  return cand;
}

// ---------------------------------------------------------------- criterion 4

void criterion4(const ResolvedExperiment& rx) {
  // (a) Quadrature side of the first-order formula for B = diag(sech^2, 0).
  const Perturbation b = make_perturbation(
      PerturbationClass::diagonal, sech2_profile(), "sech2", 1.0, 2, 2.0, 0);
  const double lp = lambda_prime(b, rx.pot.u_star);
  const double i4 = oracle::simpson(
      [](double x) { return std::pow(sech(x), 4); }, -30.0, 30.0, 60000);
  const double quad_err = std::abs(lp + 0.5 * i4);
  const double stated_err = std::abs(lp - (-2.0 / 3.0));
  const bool quad_ok = quad_err < 1e-8 && stated_err < 1e-8;

  // (b) Richardson-extrapolated finite-difference slope of the decoupled
  // channel eigenvalue from the shooting oracle.
  const double lam0 = rx.lambda0;
  auto channel = [lam0](double eps) {
    return [lam0, eps](double x) {
      const double s2 = sech(x) * sech(x);
      return 1.0 + lam0 - (2.0 - eps) * s2;
    };
  };
  const double vinf = 1.0 + lam0;
  auto ev = [&](double eps) {
    return oracle::shoot_eigenvalue(channel(eps), vinf, lam0 - 0.05,
                                    lam0 + 0.05);
  };
  const double s1 = (ev(0.02) - ev(-0.02)) / 0.04;
  const double s2 = (ev(0.01) - ev(-0.01)) / 0.02;
  const double slope = (4.0 * s2 - s1) / 3.0;
  const double fd_err = std::abs(slope - (-2.0 / 3.0));
  const bool fd_ok = fd_err < 1e-4;

  line(4, quad_ok && fd_ok,
       "quadrature lambda'(0)[B] = " + g(lp) + ", vs -2/3 err = " +
       s3(stated_err) + " and vs -(1/2) Simpson integral of sech^4 err = " +
       s3(quad_err) + " (tol 1e-8); Richardson shooting slope = " + g(slope) +
       ", |slope - (-2/3)| = " + s3(fd_err) + " (tol 1e-4)");
  if (!fd_ok)
    note("the measured eigenvalue slope is +2/3: it matches the stated "
         "first-order value in magnitude (" +
         s3(std::abs(std::abs(slope) - 2.0 / 3.0)) +
         ") and differs in sign; the quadrature half above is consistent "
         "with the stated -2/3");
}

// ---------------------------------------------------------------- criterion 5

ScalarField random_profile(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double c0 = u(rng), c1 = u(rng), c2 = u(rng);
  const ScalarField s2 = sech2_profile();
  const ScalarField ga = gaussian_profile();
  const ScalarField bu = bump_profile(-2.5, 1.5);
  return [c0, c1, c2, s2, ga, bu](double x) {
    return c0 * s2(x) + c1 * ga(x) + c2 * bu(x);
  };
}

void criterion5(const ResolvedExperiment& rx,
                const std::vector<BlochFunction>& z) {
  std::mt19937_64 rng(424242u);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  double worst_lp = 0.0;
  for (int i = 0; i < 10; ++i) {
    const Perturbation p = make_perturbation(
        PerturbationClass::t_beta, random_profile(rng), "random", 1.0, 2, 2.0);
    worst_lp = std::max(worst_lp, std::abs(lambda_prime(p, rx.pot.u_star)));
  }

  double worst_fk = 0.0;
  for (int i = 0; i < 10; ++i) {
    MatrixXd pat = MatrixXd::Zero(2, 2);
    pat(0, 0) = u(rng);
    pat(1, 1) = u(rng);
    const Perturbation p =
        make_perturbation(PerturbationClass::full, random_profile(rng),
                          "random", 1.0, 2, 2.0, 0, 1, &pat);
    const double lp = lambda_prime(p, rx.pot.u_star);
    for (const BlochFunction& zk : z) {
      const FunctionalValue fv = tangent_functional(p, zk, rx.pot.u_star, lp);
      worst_fk = std::max(worst_fk, std::abs(fv.value));
    }
  }

  const bool ok = worst_lp < 1e-12 && worst_fk < 1e-10;
  line(5, ok,
       "lambda'(0)[B] over 10 random coupling-only directions: max |value| = " +
       s3(worst_lp) + " (tol 1e-12); obstruction functionals over 10 random "
       "diagonal directions: max |value| = " + s3(worst_fk) + " (tol 1e-10)");
}

// ---------------------------------------------------------------- criterion 6

struct Directions {
  Perturbation transversal, tangent, diagonal;
};

Directions build_directions(const ResolvedExperiment& rx, uint64_t seed) {
  Directions d{
      normalize_direction(make_perturbation(PerturbationClass::t_beta,
                                            sech2_profile(), "sech2", 1.0, 2,
                                            2.0)),
      Perturbation{},
      normalize_direction(make_perturbation(PerturbationClass::diagonal,
                                            sech2_profile(), "sech2", 1.0, 2,
                                            2.0, 0))};

  const TangentData td = make_tangent_data(rx.pot, rx.lambda0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::array<double, 5> cv{};
  for (double& v : cv) v = u(rng);
  ScalarField raw = [cv](double x) {
    const double s = sech(x);
    return s * s *
           (cv[0] + cv[1] * std::sin(x) + cv[2] * std::cos(x) +
            cv[3] * std::sin(2.0 * x) + cv[4] * std::cos(2.0 * x));
  };
  ScalarField proj = project_tangent(raw, td);
  d.tangent = normalize_direction(make_perturbation(
      PerturbationClass::t_beta, proj, "tangent_projected", 1.0, 2, 2.0));
  return d;
}

std::vector<PersistenceScan> criterion6(const ResolvedExperiment& rx,
                                        const Directions& dirs) {
  const std::vector<double>& eps = rx.cfg.persist.epsilons;
  const PersistenceScan tr =
      persistence_scan(rx.pot, rx.lambda0, dirs.transversal, eps,
                       rx.cfg.matching);
  const PersistenceScan tg = persistence_scan(rx.pot, rx.lambda0, dirs.tangent,
                                              eps, rx.cfg.matching);
  const PersistenceScan dg =
      persistence_scan(rx.pot, rx.lambda0, dirs.diagonal, eps, rx.cfg.matching);

  bool diag_flagged = !dg.rows.empty();
  for (const PersistenceRow& r : dg.rows) diag_flagged = diag_flagged && r.flagged;

  const bool tr_ok = std::abs(tr.fitted_exponent - 1.0) <= 0.2;
  const bool tg_ok = tg.fitted_exponent >= 1.8;
  line(6, tr_ok && tg_ok && diag_flagged,
       "transversal mismatch-scaling exponent = " + g(tr.fitted_exponent) +
       " (want 1.0 +- 0.2); tangent-projected exponent = " +
       g(tg.fitted_exponent) + " (want >= 1.8); decoupled diagonal direction "
       "flagged persistent at all epsilons: " +
       (diag_flagged ? "yes" : "no"));

  return {tr, tg, dg};
}

// ---------------------------------------------------------------- criterion 7

void criterion7(const ResolvedExperiment& rx, const EigenCandidate& base,
                const Directions& dirs) {
  struct Row {
    std::string name;
    double kappa, r2, omega;
    bool ok;
  };
  std::vector<Row> rows;
  bool all_ok = true;
  double kappa0 = 0.0;

  auto add = [&](const std::string& name, const EigenCandidate& cand) {
    const DecayFit fit = fit_decay_rate(cand);
    const double r2 = std::min(fit.r2_right, fit.r2_left);
    const bool ok = r2 > 0.99 && fit.kappa() > 0 && fit.within_reference();
    rows.push_back({name, fit.kappa(), r2, fit.omega_min, ok});
    all_ok = all_ok && ok;
    if (name == "unperturbed") kappa0 = fit.kappa();
  };

  add("unperturbed", base);
  for (double eps : rx.cfg.persist.epsilons) {
    const Perturbation p = scaled(dirs.diagonal, eps);
    EigenCandidate cand =
        find_embedded_eigenvalue(rx.pot, &p, rx.lambda0, rx.cfg.matching);
    eigenfunction(rx.pot, &p, cand, rx.cfg.matching);
    if (!cand.flagged) all_ok = false;
    add("diagonal eps=" + g(eps), cand);
  }

  const bool kappa_ok = std::abs(kappa0 - 1.0) <= 0.02;
  all_ok = all_ok && kappa_ok;

  std::string detail;
  for (const Row& r : rows)
    detail += (detail.empty() ? "" : "; ") + r.name + ": kappa = " +
              g(r.kappa) + ", min R^2 = " + g(r.r2) +
              (r.ok ? "" : " [out of band]");
  line(7, all_ok,
       "tail fits of every flagged state (R^2 > 0.99, 0 < kappa <= 1.05 "
       "omega_min); unperturbed kappa = " + g(kappa0) + " (want 1.00 +- 0.02). " +
       detail);
}

// ---------------------------------------------------------------- criterion 8

void criterion8() {
  std::mt19937_64 rng(777u);
  std::uniform_real_distribution<double> uu(0.5, 1.5), usep(0.4, 0.9),
      umid(0.2, 0.6), ufrac(0.3, 0.6), uamp(0.3, 1.0), ufreq(0.5, 3.0),
      uph(0.0, 2.0 * M_PI);

  int inside = 0;
  double worst_excess = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int N = (t < 12) ? 2 : 4;
    RoughnessProbe probe;
    probe.base = MatrixXd::Zero(N, N);
    if (N == 2) {
      probe.base.diagonal() << uu(rng), -uu(rng);
    } else {
      const double ku2 = umid(rng), ks2 = umid(rng);
      probe.base.diagonal() << ku2 + usep(rng), ku2, -ks2, -ks2 - usep(rng);
    }

    double ks = -1e300, ku = 1e300;
    for (int i = 0; i < N; ++i) {
      const double v = probe.base(i, i);
      if (v < 0) ks = std::max(ks, v);
      if (v > 0) ku = std::min(ku, v);
    }
    const double budget = std::min(-ks, ku) / 2.0;  // K = 1 for diagonal bases
    probe.delta = ufrac(rng) * budget;
    probe.horizon = 60.0;

    // Random antisymmetric field with sup norm exactly delta.
    std::vector<std::array<double, 4>> terms;  // i, j packed with amp/freq/ph
    std::vector<std::pair<int, int>> slots;
    for (int i = 0; i < N; ++i)
      for (int j = i + 1; j < N; ++j) slots.push_back({i, j});
    double amax = 0.0;
    std::vector<std::array<double, 3>> coef(slots.size());
    for (auto& cfp : coef) {
      cfp = {uamp(rng), ufreq(rng), uph(rng)};
      amax = std::max(amax, cfp[0]);
    }
    const double scale = probe.delta * 0.999 / amax;
    const double delta = probe.delta;
    probe.D = [slots, coef, scale, N](double x) {
      MatrixXd d = MatrixXd::Zero(N, N);
      for (size_t s = 0; s < slots.size(); ++s) {
        const double v = scale * coef[s][0] * std::sin(coef[s][1] * x + coef[s][2]);
        d(slots[s].first, slots[s].second) = v;
        d(slots[s].second, slots[s].first) = -v;
      }
      return d;
    };

    const RoughnessResult res = roughness_probe(probe);
    if (res.within_bands(1e-2)) ++inside;
    const double width = 2.0 * res.K * delta;
    worst_excess = std::max(
        worst_excess,
        std::max({res.kappa_s_base - res.kappa_s_meas,
                  res.kappa_s_meas - (res.kappa_s_base + width),
                  (res.kappa_u_base - width) - res.kappa_u_meas,
                  res.kappa_u_meas - res.kappa_u_base}));
  }

  line(8, inside == 20,
       std::to_string(inside) + "/20 random constant-plus-bounded probes with "
       "admissible delta keep measured rates inside [kappa_s, kappa_s + "
       "2K delta] and [kappa_u - 2K delta, kappa_u] (fit tol 1e-2); worst "
       "band excess = " + s3(worst_excess));
}

// ---------------------------------------------------------------- criterion 9

void criterion9(const std::string& config_path) {
  const fs::path root = fs::temp_directory_path() / "floqem_acceptance_rep";
  fs::remove_all(root);
  fs::create_directories(root);

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  bool ok = true;
  std::string detail;

  const fs::path ea = root / "eig_a", eb = root / "eig_b";
  ok = ok &&
       run_cli({"eig", "--config", config_path, "--out", ea.string()}) == 0;
  ok = ok &&
       run_cli({"eig", "--config", config_path, "--out", eb.string()}) == 0;
  for (const char* f : {"mismatch.csv", "candidate.csv", "eigenfunction.csv"}) {
    const bool same = ok && slurp(ea / f) == slurp(eb / f) &&
                      !slurp(ea / f).empty();
    if (!same) detail += std::string(" ") + f + " differs;";
    ok = ok && same;
  }

  const fs::path ba = root / "bands_a", bb = root / "bands_b";
  ok = run_cli({"bands", "--config", config_path, "--out", ba.string()}) == 0 && ok;
  ok = run_cli({"bands", "--config", config_path, "--out", bb.string(),
                "--threads", "2"}) == 0 && ok;
  for (const char* f : {"bands.csv", "band_edges.csv"}) {
    const bool same = slurp(ba / f) == slurp(bb / f) && !slurp(ba / f).empty();
    if (!same) detail += std::string(" ") + f + " differs;";
    ok = ok && same;
  }

  fs::remove_all(root);
  line(9, ok,
       "repeated runs produce byte-identical tables (eig twice; bands twice, "
       "the second with two threads)" + detail);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <config.json>" << std::endl;
    return 64;
  }

  try {
    const ExperimentConfig cfg = load_config(argv[1]);
    const ResolvedExperiment rx = resolve(cfg, 1);
    std::cout << "# config " << argv[1] << ", hash " << cfg.hash
              << ", lambda0 = " << g(rx.lambda0) << std::endl;

    criterion1();
    const double lambda0_scan = criterion2();
    if (std::abs(lambda0_scan - rx.lambda0) > 1e-6)
      note("scan midpoint " + g(lambda0_scan) +
           " differs from the resolved lambda0 " + g(rx.lambda0));

    const EigenCandidate base = criterion3(rx);
    criterion4(rx);

    const std::vector<BlochFunction> z =
        generalized_eigenfunctions(rx.pot, rx.lambda0);
    criterion5(rx, z);

    const Directions dirs = build_directions(rx, 12345u);
    criterion6(rx, dirs);
    criterion7(rx, base, dirs);
    criterion8();
    criterion9(argv[1]);
  } catch (const std::exception& e) {
    std::cout << "[FAIL] harness aborted: " << e.what() << std::endl;
    return 99;
  }

  std::cout << (g_failures == 0 ? "all criteria passed"
                                : std::to_string(g_failures) +
                                      " criterion(s) failed")
            << std::endl;
  return g_failures;
}
