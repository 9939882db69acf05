#include "floqem/decay.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace floqem {

namespace {

struct LineFit {
  double slope = 0.0;
  double r2 = 0.0;
  int count = 0;
};

LineFit fit_line(const std::vector<double>& t, const std::vector<double>& y) {
  const int m = static_cast<int>(t.size());
  LineFit f;
  f.count = m;
  if (m < 2) return f;
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (int i = 0; i < m; ++i) {
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
  }
  const double denom = m * stt - st * st;
  if (std::abs(denom) < 1e-30) return f;
  f.slope = (m * sty - st * sy) / denom;
  const double icpt = (sy - f.slope * st) / m;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / m;
  for (int i = 0; i < m; ++i) {
    const double e = y[i] - (icpt + f.slope * t[i]);
    ss_res += e * e;
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
  }
  f.r2 = (ss_tot > 1e-30) ? 1.0 - ss_res / ss_tot : 0.0;
  return f;
}

}  // namespace

DecayFit fit_decay_rate(const EigenCandidate& cand, Interval window_frac,
                        double min_r2) {
  if (cand.grid.empty())
    throw PreconditionError("decay fit needs a reconstructed profile");
  if (!(window_frac.lo >= 0 && window_frac.hi <= 1.0 &&
        window_frac.lo < window_frac.hi))
    throw ConfigError("decay fit window fractions must satisfy 0 <= lo < hi <= 1");
  const double T = std::max(std::abs(cand.grid.front()), std::abs(cand.grid.back()));
  const double lo = window_frac.lo * T;
  const double hi = window_frac.hi * T;

  auto fit_side = [&](int sign) {
    std::vector<double> t, y;
    for (size_t k = 0; k < cand.grid.size(); ++k) {
      const double x = cand.grid[k];
      if (sign * x < lo || sign * x > hi) continue;
      const double nrm = cand.state.row(static_cast<Eigen::Index>(k)).norm();
      if (!(nrm > 1e-300)) continue;
      t.push_back(std::abs(x));
      y.push_back(std::log(nrm));
    }
    if (t.size() < 8)
      throw FitRejected("too few tail samples for a decay fit");
    const LineFit lf = fit_line(t, y);
    const double rate = -lf.slope;
    if (!(rate > 0)) throw FitRejected("profile tail does not decay");
    if (lf.r2 < min_r2)
      throw FitRejected("profile tail is not cleanly exponential");
    return std::pair<double, double>(rate, lf.r2);
  };

  DecayFit out;
  out.omega_min = cand.omega_min;
  std::tie(out.rate_right, out.r2_right) = fit_side(+1);
  std::tie(out.rate_left, out.r2_left) = fit_side(-1);
  return out;
}

bool RoughnessResult::within_bands(double fit_tol) const {
  const double width = 2.0 * K * delta;
  return kappa_s_meas >= kappa_s_base - fit_tol &&
         kappa_s_meas <= kappa_s_base + width + fit_tol &&
         kappa_u_meas >= kappa_u_base - width - fit_tol &&
         kappa_u_meas <= kappa_u_base + fit_tol;
}

RoughnessResult roughness_probe(const RoughnessProbe& probe,
                                const IntegratorConfig& cfg) {
  const int N = static_cast<int>(probe.base.rows());
  if (N < 2 || probe.base.cols() != N)
    throw ConfigError("roughness probe base must be square, at least 2 x 2");
  if (!probe.D) throw ConfigError("roughness probe needs a perturbation field");
  if (!(probe.delta > 0)) throw ConfigError("roughness delta must be positive");
  if (!(probe.horizon > 0)) throw ConfigError("roughness horizon must be positive");

  RoughnessResult out;
  out.delta = probe.delta;

  Eigen::EigenSolver<MatrixXd> es(probe.base, true);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigendecomposition of the base block failed");
  double ks = -std::numeric_limits<double>::infinity();
  double ku = std::numeric_limits<double>::infinity();
  for (int i = 0; i < N; ++i) {
    const double re = es.eigenvalues()(i).real();
    if (std::abs(re) < 1e-9)
      throw PreconditionError("roughness base block must be hyperbolic");
    if (re < 0) ks = std::max(ks, re);
    if (re > 0) ku = std::min(ku, re);
  }
  if (!std::isfinite(ks) || !std::isfinite(ku))
    throw PreconditionError(
        "roughness base block needs both decaying and growing directions");
  out.kappa_s_base = ks;
  out.kappa_u_base = ku;

  {
    Eigen::JacobiSVD<MatrixXcd> svd(es.eigenvectors());
    const auto& sv = svd.singularValues();
    out.K = sv(0) / sv(sv.size() - 1);
  }
  out.budget = std::min(-ks, ku) / (2.0 * out.K);
  if (!(probe.delta < out.budget))
    throw PreconditionError(
        "delta exceeds the admissible roughness budget for this spectral gap");

  double sup = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double x = probe.horizon * i / 1000.0;
    const MatrixXd d = probe.D(x);
    if (d.rows() != N || d.cols() != N)
      throw ConfigError("roughness field has wrong dimensions");
    sup = std::max(sup, d.cwiseAbs().maxCoeff());
  }
  if (sup > probe.delta * (1.0 + 1e-6))
    throw PreconditionError("roughness field exceeds its declared sup bound");

  CoefficientField f;
  f.size = N;
  f.trace_free = false;
  f.eval = [base = probe.base, D = probe.D](double x) {
    return MatrixXd(base + D(x));
  };
  const SubspacePath path = evolve_subspace_path(
      f, MatrixXd::Identity(N, N), 0.0, probe.horizon, 0.5, cfg);

  VectorXd sums = VectorXd::Zero(N);
  for (size_t j = 1; j < path.transitions.size(); ++j)
    for (int i = 0; i < N; ++i) sums(i) += std::log(path.transitions[j](i, i));
  VectorXd expn = sums / probe.horizon;
  std::sort(expn.data(), expn.data() + N, std::greater<double>());
  out.exponents = expn;

  double ks_m = -std::numeric_limits<double>::infinity();
  double ku_m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < N; ++i) {
    if (expn(i) < 0) ks_m = std::max(ks_m, expn(i));
    if (expn(i) > 0) ku_m = std::min(ku_m, expn(i));
  }
  if (!std::isfinite(ks_m) || !std::isfinite(ku_m))
    throw NumericalError("measured growth rates do not split by sign");
  out.kappa_s_meas = ks_m;
  out.kappa_u_meas = ku_m;
  return out;
}

}  // namespace floqem
