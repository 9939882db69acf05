#include "floqem/spectral.hpp"

#include "floqem/parallel.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <optional>

namespace floqem {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

MatrixXd orthonormal_real(const MatrixXd& m) {
  Eigen::HouseholderQR<MatrixXd> qr(m);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(m.rows(), m.cols());
  MatrixXd r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  for (int j = 0; j < m.cols(); ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

VectorXd normalize_or_zero(const VectorXd& v) {
  const double n = v.norm();
  if (n < 1e-12) return VectorXd::Zero(v.size());
  return v / n;
}

struct NullData {
  double sigma = 0.0;
  VectorXd a, b;
};

// Smallest singular triple of [S0 | -U0]; the null vector is signed so its
// largest entry is positive, making downstream output deterministic.
NullData smallest_null(const MatrixXd& S0, const MatrixXd& U0) {
  const int k = static_cast<int>(S0.cols());
  if (U0.cols() != k || S0.rows() != U0.rows())
    throw MatchingError("one-sided frames have incompatible shapes");
  MatrixXd m(S0.rows(), 2 * k);
  m << S0, -U0;
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeThinV);
  VectorXd v = svd.matrixV().col(2 * k - 1);
  int imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v(imax) < 0) v = -v;
  NullData nd;
  nd.sigma = svd.singularValues()(2 * k - 1);
  nd.a = v.head(k);
  nd.b = v.tail(k);
  return nd;
}

double smoothstep5(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

}  // namespace

double hill_discriminant(const ScalarField& Vp, double period, double lambda,
                         const IntegratorConfig& cfg) {
  if (!(period > 0)) throw ConfigError("hill_discriminant: period must be positive");
  CoefficientField f;
  f.size = 2;
  f.trace_free = true;
  f.eval = [Vp, lambda](double x) {
    MatrixXd c(2, 2);
    c << 0.0, 1.0, Vp(x) - lambda, 0.0;
    return c;
  };
  return fundamental_matrix(f, 0.0, period, cfg).trace();
}

namespace {

// Bisection for the lambda where the discriminant crosses +-2, bracketed by
// one sample outside the band and one inside.
double refine_edge(const ScalarField& Vp, double period, double lam_out,
                   double disc_out, double lam_in, const IntegratorConfig& cfg) {
  const double target = (disc_out > 2.0) ? 2.0 : -2.0;
  double a = lam_out, b = lam_in;
  double fa = disc_out - target;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (a + b);
    if (std::abs(b - a) < 1e-10 * std::max(1.0, std::abs(mid))) break;
    const double fm = hill_discriminant(Vp, period, mid, cfg) - target;
    if ((fm > 0) == (fa > 0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

BandStructure band_scan(const ScalarField& Vp, double period, Interval range,
                        int samples, const IntegratorConfig& cfg, int threads) {
  if (!(range.hi > range.lo)) throw ConfigError("band_scan: empty lambda range");
  if (samples < 8) throw ConfigError("band_scan: need at least 8 samples");
  BandStructure bs;
  bs.table.assign(samples, BandPoint{});
  parallel_for(samples, threads, [&](int i) {
    const double lam = range.lo + (range.hi - range.lo) * i / (samples - 1);
    const double d = hill_discriminant(Vp, period, lam, cfg);
    bs.table[i] = {lam, d, std::abs(d) <= 2.0};
  });
  int i = 0;
  while (i < samples) {
    if (!bs.table[i].in_band) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < samples && bs.table[j + 1].in_band) ++j;
    Band band;
    band.lo = (i == 0) ? range.lo
                       : refine_edge(Vp, period, bs.table[i - 1].lambda,
                                     bs.table[i - 1].discriminant,
                                     bs.table[i].lambda, cfg);
    band.hi = (j == samples - 1)
                  ? range.hi
                  : refine_edge(Vp, period, bs.table[j + 1].lambda,
                                bs.table[j + 1].discriminant,
                                bs.table[j].lambda, cfg);
    bs.bands.push_back(band);
    i = j + 1;
  }
  return bs;
}

double first_band_midpoint(const BandStructure& bs) {
  if (bs.bands.empty())
    throw MatchingError("no spectral band found in the scanned range");
  return bs.bands.front().midpoint();
}

PeriodicSystem infinity_system(const Potential& pot, double lambda) {
  const int n = pot.n;
  CoefficientField f;
  f.size = 2 * n;
  f.trace_free = true;
  f.eval = [Ap = pot.Ap, n, lambda](double x) {
    MatrixXd c = MatrixXd::Zero(2 * n, 2 * n);
    c.topRightCorner(n, n).setIdentity();
    c.bottomLeftCorner(n, n) = Ap(x) - lambda * MatrixXd::Identity(n, n);
    return c;
  };
  return PeriodicSystem{f, pot.period};
}

CoefficientField full_system(const Potential& pot, const Perturbation* pert,
                             double lambda) {
  const int n = pot.n;
  std::optional<Perturbation> p;
  if (pert) {
    pert->validate();
    if (pert->n != n)
      throw ConfigError("perturbation dimension does not match the potential");
    p = *pert;
  }
  CoefficientField f;
  f.size = 2 * n;
  f.trace_free = true;
  f.eval = [A = pot.A, p, n, lambda](double x) {
    MatrixXd c = MatrixXd::Zero(2 * n, 2 * n);
    c.topRightCorner(n, n).setIdentity();
    MatrixXd q = A(x);
    if (p) q += p->eval(x);
    q.diagonal().array() -= lambda;
    c.bottomLeftCorner(n, n) = q;
    return c;
  };
  return f;
}

void MatchingConfig::validate() const {
  if (!(T > 0)) throw ConfigError("matching T must be positive");
  if (!(mismatch_tol > 0)) throw ConfigError("mismatch_tol must be positive");
  if (!(radius > 0)) throw ConfigError("lambda search radius must be positive");
  if (coarse_samples < 5) throw ConfigError("coarse_samples must be >= 5");
  if (!(lambda_tol > 0)) throw ConfigError("lambda_tol must be positive");
  if (!(sample_step > 0)) throw ConfigError("sample_step must be positive");
  if (!(blend_halfwidth > 0)) throw ConfigError("blend_halfwidth must be positive");
  if (!(blend_halfwidth < T)) throw ConfigError("blend_halfwidth must be < T");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  floquet.integrator.validate();
  if (!(floquet.center_tol > 0)) throw ConfigError("center_tol must be positive");
}

MatchContext make_match_context(const Potential& pot, double lambda,
                                const MatchingConfig& cfg) {
  cfg.validate();
  PeriodicSystem inf = infinity_system(pot, lambda);
  const MatrixXd M = monodromy(inf, cfg.floquet.integrator);
  const HyperbolicBases hb = hyperbolic_bases(M, cfg.floquet.center_tol);
  if (hb.stable.cols() == 0)
    throw MatchingError("no decaying directions at lambda = " + fmt(lambda) +
                        "; lambda is outside every spectral band complement");
  if (hb.stable.cols() != hb.unstable.cols())
    throw MatchingError(
        "decaying and growing multiplier counts differ at lambda = " + fmt(lambda) +
        "; the first-order system is not in symmetric Schrodinger form");

  MatchContext ctx;
  ctx.lambda = lambda;
  ctx.period = pot.period;
  ctx.center_count = hb.center_count;

  const VectorXcd mu = floquet_multipliers(M);
  double wmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < mu.size(); ++i) {
    const double r = std::abs(mu(i));
    if (std::abs(r - 1.0) < cfg.floquet.center_tol) continue;
    wmin = std::min(wmin, std::abs(std::log(r)) / pot.period);
  }
  ctx.omega_min = wmin;

  ctx.stable_inv = hb.stable;
  ctx.unstable_inv = hb.unstable;

  const double p = pot.period;
  auto mod_p = [p](double x) {
    double r = x - p * std::floor(x / p);
    if (r < 0) r += p;
    if (r >= p) r -= p;
    return r;
  };
  const MatrixXd phi_pos =
      fundamental_matrix(inf.field, 0.0, mod_p(cfg.T), cfg.floquet.integrator);
  const MatrixXd phi_neg =
      fundamental_matrix(inf.field, 0.0, mod_p(-cfg.T), cfg.floquet.integrator);
  ctx.anchor_s = orthonormal_real(phi_pos * hb.stable);
  ctx.anchor_u = orthonormal_real(phi_neg * hb.unstable);
  return ctx;
}

MismatchResult mismatch_with_anchors(const Potential& pot,
                                     const Perturbation* pert,
                                     const MatchContext& ctx,
                                     const MatchingConfig& cfg) {
  cfg.validate();
  const CoefficientField full = full_system(pot, pert, ctx.lambda);
  const IntegratorConfig& ic = cfg.floquet.integrator;
  const MatrixXd S0 = evolve_subspace(full, ctx.anchor_s, cfg.T, 0.0, ic);
  const MatrixXd U0 = evolve_subspace(full, ctx.anchor_u, -cfg.T, 0.0, ic);
  const NullData nd = smallest_null(S0, U0);

  MismatchResult r;
  r.lambda = ctx.lambda;
  r.sigma_min = nd.sigma;
  r.center_count = ctx.center_count;
  r.omega_min = ctx.omega_min;
  r.S0 = S0;
  r.U0 = U0;
  r.v0s = normalize_or_zero(S0 * nd.a);
  r.v0u = normalize_or_zero(U0 * nd.b);
  r.coeff_s = ctx.stable_inv.transpose() * r.v0s;
  r.coeff_u = ctx.unstable_inv.transpose() * r.v0u;
  return r;
}

MismatchResult mismatch(const Potential& pot, const Perturbation* pert,
                        double lambda, const MatchingConfig& cfg) {
  return mismatch_with_anchors(pot, pert, make_match_context(pot, lambda, cfg),
                               cfg);
}

EigenCandidate find_embedded_eigenvalue(const Potential& pot,
                                        const Perturbation* pert,
                                        double lambda_guess,
                                        const MatchingConfig& cfg) {
  cfg.validate();
  const double lo = lambda_guess - cfg.radius;
  const double hi = lambda_guess + cfg.radius;
  const int m = cfg.coarse_samples;

  std::vector<ScanPoint> scan(m);
  parallel_for(m, cfg.threads, [&](int i) {
    const double lam = lo + (hi - lo) * i / (m - 1);
    scan[i] = {lam, mismatch(pot, pert, lam, cfg).sigma_min};
  });

  int imin = 0;
  for (int i = 1; i < m; ++i)
    if (scan[i].sigma_min < scan[imin].sigma_min) imin = i;
  if (imin == 0 || imin == m - 1)
    throw MatchingError(
        "mismatch minimum sits on the boundary of the lambda search interval "
        "[" + fmt(lo) + ", " + fmt(hi) + "]; enlarge radius or re-center");

  double best_lambda = scan[imin].lambda;
  double best_sigma = scan[imin].sigma_min;
  auto eval = [&](double lam) {
    const double s = mismatch(pot, pert, lam, cfg).sigma_min;
    if (s < best_sigma) {
      best_sigma = s;
      best_lambda = lam;
    }
    return s;
  };

  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = scan[imin - 1].lambda;
  double b = scan[imin + 1].lambda;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double sc = eval(c), sd = eval(d);
  for (int it = 0; it < 200 && (b - a) > cfg.lambda_tol; ++it) {
    if (sc < sd) {
      b = d;
      d = c;
      sd = sc;
      c = b - gr * (b - a);
      sc = eval(c);
    } else {
      a = c;
      c = d;
      sc = sd;
      d = a + gr * (b - a);
      sd = eval(d);
    }
  }

  const MismatchResult final = mismatch(pot, pert, best_lambda, cfg);
  EigenCandidate cand;
  cand.lambda = final.lambda;
  cand.sigma_min = final.sigma_min;
  cand.flagged = final.sigma_min < cfg.mismatch_tol;
  cand.center_count = final.center_count;
  cand.omega_min = final.omega_min;
  cand.coeff_s = final.coeff_s;
  cand.coeff_u = final.coeff_u;
  cand.v0s = final.v0s;
  cand.v0u = final.v0u;
  cand.scan = std::move(scan);
  return cand;
}

void eigenfunction(const Potential& pot, const Perturbation* pert,
                   EigenCandidate& cand, const MatchingConfig& cfg) {
  cfg.validate();
  const int n = pot.n;
  const double lambda = cand.lambda;
  const MatchContext ctx = make_match_context(pot, lambda, cfg);
  const CoefficientField full = full_system(pot, pert, lambda);
  const IntegratorConfig& ic = cfg.floquet.integrator;

  // Snap the grid so x = 0 and +-blend_halfwidth are checkpoints.
  const long mt = std::max(2L, std::lround(cfg.T / cfg.sample_step));
  const double dx = cfg.T / static_cast<double>(mt);
  const long mw = std::min(
      mt - 1, std::max(1L, std::lround(cfg.blend_halfwidth / dx)));
  const double w = mw * dx;

  const SubspacePath right =
      evolve_subspace_path(full, ctx.anchor_s, cfg.T, -w, dx, ic);
  const SubspacePath left =
      evolve_subspace_path(full, ctx.anchor_u, -cfg.T, w, dx, ic);

  auto locate_zero = [](const SubspacePath& path) {
    size_t j0 = 0;
    double best = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < path.x.size(); ++j) {
      if (std::abs(path.x[j]) < best) {
        best = std::abs(path.x[j]);
        j0 = j;
      }
    }
    if (best > 1e-9)
      throw MatchingError("matching grid does not contain x = 0");
    return j0;
  };
  const size_t jr = locate_zero(right);
  const size_t jl = locate_zero(left);

  const NullData nd = smallest_null(right.frames[jr], left.frames[jl]);
  cand.seam_jump = nd.sigma;

  // Coefficients of the matched solution in each renormalized frame:
  // c_j = T_j c_{j-1} along the path, anchored at the matching point.
  auto coefficients = [](const SubspacePath& path, size_t j0, const VectorXd& c0) {
    std::vector<VectorXd> c(path.frames.size());
    c[j0] = c0;
    for (size_t j = j0 + 1; j < c.size(); ++j)
      c[j] = path.transitions[j] * c[j - 1];
    for (size_t j = j0; j-- > 0;)
      c[j] = path.transitions[j + 1]
                 .triangularView<Eigen::Upper>()
                 .solve(c[j + 1]);
    return c;
  };
  const auto cr = coefficients(right, jr, nd.a);
  const auto cl = coefficients(left, jl, nd.b);

  const long K = 2 * mt + 1;
  cand.grid.assign(K, 0.0);
  cand.state.resize(K, 2 * n);
  cand.u.resize(K, n);

  for (long k = 0; k < K; ++k) {
    const double x = dx * static_cast<double>(k - mt);
    cand.grid[k] = x;
    const bool has_left = (k <= mt + mw);    // x <= w
    const bool has_right = (k >= mt - mw);   // x >= -w
    VectorXd value;
    if (has_left && has_right) {
      const VectorXd vl = left.frames[k] * cl[k];
      const VectorXd vr = right.frames[2 * mt - k] * cr[2 * mt - k];
      const double phi = smoothstep5((x + w) / (2.0 * w));
      value = (1.0 - phi) * vl + phi * vr;
    } else if (has_left) {
      value = left.frames[k] * cl[k];
    } else {
      value = right.frames[2 * mt - k] * cr[2 * mt - k];
    }
    cand.state.row(k) = value.transpose();
  }
  cand.u = cand.state.leftCols(n);

  // Unit L2 norm of the function block, deterministic sign.
  double q = 0.0;
  for (long k = 0; k < K; ++k) {
    const double wk = (k == 0 || k == K - 1) ? 0.5 : 1.0;
    q += wk * cand.u.row(k).squaredNorm();
  }
  q = std::sqrt(q * dx);
  if (!(q > 1e-300)) throw MatchingError("matched profile vanishes");
  double scale = 1.0 / q;
  {
    Eigen::Index kmax = 0, cmax = 0;
    cand.u.cwiseAbs().maxCoeff(&kmax, &cmax);
    if (cand.u(kmax, cmax) < 0) scale = -scale;
  }
  cand.state *= scale;
  cand.u = cand.state.leftCols(n);

  // Grid L2 of -u'' + (A + B - lambda) u, fourth-order interior stencil.
  double acc = 0.0;
  for (long k = 2; k + 2 < K; ++k) {
    const double x = cand.grid[k];
    const VectorXd upp =
        (-cand.u.row(k - 2) + 16.0 * cand.u.row(k - 1) - 30.0 * cand.u.row(k) +
         16.0 * cand.u.row(k + 1) - cand.u.row(k + 2))
            .transpose() /
        (12.0 * dx * dx);
    MatrixXd m = pot.A(x);
    if (pert) m += pert->eval(x);
    m.diagonal().array() -= lambda;
    const VectorXd r = -upp + m * cand.u.row(k).transpose();
    acc += r.squaredNorm();
  }
  cand.residual = std::sqrt(acc * dx);
}

}  // namespace floqem
