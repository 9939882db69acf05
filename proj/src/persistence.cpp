#include "floqem/persistence.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>

namespace floqem {

double lambda_prime(const Perturbation& pert, const VectorField& u_star,
                    const QuadratureConfig& quad) {
  pert.validate();
  if (!u_star) throw ConfigError("lambda_prime: u_star must be set");
  auto f = [&pert, &u_star](double x) {
    const VectorXd u = u_star(x);
    return -u.dot(pert.direction(x) * u);
  };
  return integrate_line(f, quad);
}

std::vector<BlochFunction> generalized_eigenfunctions(const Potential& pot,
                                                      double lambda0,
                                                      const FloquetConfig& cfg) {
  pot.validate();
  if (!pot.diagonal_periodic_part)
    throw NumericalError(
        "bounded-solution construction requires a diagonal periodic part");
  std::vector<BlochFunction> out;
  for (int c = 0; c < pot.n; ++c) {
    const ScalarField v = pot.Ap_diagonal[c];
    CoefficientField f;
    f.size = 2;
    f.trace_free = true;
    f.eval = [v, lambda0](double x) {
      MatrixXd m(2, 2);
      m << 0.0, 1.0, v(x) - lambda0, 0.0;
      return m;
    };
    PeriodicSystem channel{f, pot.period};
    const MatrixXd M = monodromy(channel, cfg.integrator);
    const VectorXcd mu = floquet_multipliers(M);

    const bool c0 = std::abs(std::abs(mu(0)) - 1.0) < cfg.center_tol;
    const bool c1 = std::abs(std::abs(mu(1)) - 1.0) < cfg.center_tol;
    if (!c0 && !c1) continue;  // hyperbolic channel, no bounded solution
    if (c0 != c1)
      throw NumericalError("channel multipliers split across the unit circle");
    if (std::abs(mu(0) - mu(1)) < 1e-8)
      throw NumericalError(
          "channel has a double unit multiplier; the reference energy sits on "
          "a band edge of channel " + std::to_string(c));

    Eigen::ComplexEigenSolver<MatrixXcd> es(MatrixXcd(M.cast<std::complex<double>>()),
                                            true);
    int pick = -1;
    for (int i = 0; i < 2; ++i)
      if (std::arg(es.eigenvalues()(i)) > 0) pick = i;
    if (pick < 0)
      throw NumericalError("channel has unit multipliers with no rotation");
    const std::complex<double> mu_pick = es.eigenvalues()(pick);
    VectorXcd vec = es.eigenvectors().col(pick);
    // Deterministic phase: the largest entry is made real and positive.
    int imax = 0;
    vec.cwiseAbs().maxCoeff(&imax);
    vec *= std::conj(vec(imax)) / std::abs(vec(imax));

    const double p = pot.period;
    const double nu = std::arg(mu_pick) / p;
    auto flow = std::make_shared<PeriodicFlow>(channel, cfg.integrator);

    auto envelope = [flow, vec](double xred) {
      return std::complex<double>(
          (flow->phi(xred).cast<std::complex<double>>() * vec)(0));
    };
    // Unit sup of the complex envelope over one period.
    double sup = 0.0;
    for (int i = 0; i <= 2048; ++i)
      sup = std::max(sup, std::abs(envelope(p * i / 2048.0)));
    if (!(sup > 0)) throw NumericalError("degenerate bounded solution");

    auto value = [flow, vec, mu_pick, p, sup](double x) {
      double xred = x - p * std::floor(x / p);
      if (xred < 0) xred += p;
      if (xred >= p) xred -= p;
      const long k = std::lround((x - xred) / p);
      const std::complex<double> w =
          std::pow(mu_pick, static_cast<double>(k)) *
          (flow->phi(xred).cast<std::complex<double>>() * vec)(0);
      return w / sup;
    };
    for (int phase = 0; phase < 2; ++phase) {
      BlochFunction bf;
      bf.component = c;
      bf.nu = nu;
      bf.phase = phase;
      bf.period = p;
      bf.z = phase == 0
                 ? ScalarField([value](double x) { return value(x).real(); })
                 : ScalarField([value](double x) { return value(x).imag(); });
      out.push_back(std::move(bf));
    }
  }
  return out;
}

FunctionalValue tangent_functional(const Perturbation& pert,
                                   const BlochFunction& zk,
                                   const VectorField& u_star,
                                   double lambda_prime_value,
                                   const QuadratureConfig& quad) {
  pert.validate();
  if (!u_star) throw ConfigError("tangent_functional: u_star must be set");
  const int c = zk.component;
  if (c < 0 || c >= pert.n)
    throw ConfigError("bounded solution channel out of range");
  auto f_main = [&pert, &zk, &u_star, c](double x) {
    const VectorXd bu = pert.direction(x) * u_star(x);
    return -zk.z(x) * bu(c);
  };
  auto f_corr = [&zk, &u_star, c](double x) { return zk.z(x) * u_star(x)(c); };
  FunctionalValue out;
  out.correction = lambda_prime_value * integrate_line(f_corr, quad);
  out.value = integrate_line(f_main, quad) + out.correction;
  return out;
}

double example_offdiag_reduction(const Perturbation& pert,
                                 const BlochFunction& zk,
                                 const VectorField& u_star,
                                 const QuadratureConfig& quad) {
  pert.validate();
  if (!u_star) throw ConfigError("example_offdiag_reduction: u_star must be set");
  const int c = zk.component;
  auto f = [&pert, &zk, &u_star, c](double x) {
    return pert.direction(x)(0, c) * zk.z(x) * u_star(x)(0);
  };
  return integrate_line(f, quad);
}

Codimension codimension(int center_count) {
  if (center_count < 0 || center_count % 2 != 0)
    throw NumericalError("center multiplicity must be a nonnegative even count");
  return Codimension{center_count, center_count + 1};
}

Codimension codimension(const FloquetData& fd) {
  return codimension(fd.center_count);
}

TangentData make_tangent_data(const Potential& pot, double lambda0,
                              const FloquetConfig& cfg,
                              const QuadratureConfig& quad) {
  if (!pot.u_star)
    throw ConfigError("tangent data needs a potential with an exact localized state");
  TangentData td;
  td.lambda0 = lambda0;
  td.u_star = pot.u_star;
  td.z = generalized_eigenfunctions(pot, lambda0, cfg);
  if (td.z.empty())
    throw NumericalError("no bounded comparison solutions at the reference energy");
  td.codim = codimension(static_cast<int>(td.z.size()));

  const int k = static_cast<int>(td.z.size());
  td.representers.reserve(k);
  for (const BlochFunction& zk : td.z) {
    ScalarField g = [z = zk.z, u = pot.u_star](double x) { return z(x) * u(x)(0); };
    td.representers.push_back(std::move(g));
  }
  td.representer_norms.resize(k);
  std::vector<ScalarField> ghat(k);
  for (int i = 0; i < k; ++i) {
    const ScalarField& g = td.representers[i];
    const double nrm = std::sqrt(
        integrate_line([&g](double x) { return g(x) * g(x); }, quad));
    if (!(nrm > 1e-12))
      throw NumericalError("a tangent representer has vanishing norm");
    td.representer_norms[i] = nrm;
    ghat[i] = [g, nrm](double x) { return g(x) / nrm; };
  }
  MatrixXd gram(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) {
      const double v = integrate_line(
          [&gi = ghat[i], &gj = ghat[j]](double x) { return gi(x) * gj(x); },
          quad);
      gram(i, j) = gram(j, i) = v;
    }
  td.gram_det = gram.determinant();
  return td;
}

ScalarField project_tangent(const ScalarField& psi, const TangentData& td,
                            const QuadratureConfig& quad) {
  if (!psi) throw ConfigError("project_tangent: profile must be set");
  const int k = static_cast<int>(td.representers.size());
  if (k == 0) return psi;
  if (std::abs(td.gram_det) < 1e-10)
    throw NumericalError("tangent representers are nearly dependent");

  MatrixXd gram(k, k);
  VectorXd rhs(k);
  for (int i = 0; i < k; ++i) {
    const ScalarField& gi = td.representers[i];
    rhs(i) = integrate_line([&psi, &gi](double x) { return psi(x) * gi(x); }, quad);
    for (int j = i; j < k; ++j) {
      const ScalarField& gj = td.representers[j];
      const double v =
          integrate_line([&gi, &gj](double x) { return gi(x) * gj(x); }, quad);
      gram(i, j) = gram(j, i) = v;
    }
  }
  const VectorXd alpha = gram.ldlt().solve(rhs);
  auto reps = std::make_shared<std::vector<ScalarField>>(td.representers);
  return [psi, reps, alpha](double x) {
    double v = psi(x);
    for (int i = 0; i < alpha.size(); ++i) v -= alpha(i) * (*reps)[i](x);
    return v;
  };
}

PersistenceScan persistence_scan(const Potential& pot, double lambda0,
                                 const Perturbation& direction,
                                 const std::vector<double>& epsilons,
                                 const MatchingConfig& cfg) {
  if (epsilons.empty()) throw ConfigError("persistence scan needs epsilons");
  for (double e : epsilons)
    if (!(e > 0)) throw ConfigError("persistence epsilons must be positive");

  PersistenceScan out;
  out.rows.reserve(epsilons.size());
  for (double eps : epsilons) {
    const Perturbation p = scaled(direction, eps);
    const EigenCandidate cand = find_embedded_eigenvalue(pot, &p, lambda0, cfg);
    out.rows.push_back(
        PersistenceRow{eps, cand.lambda, cand.sigma_min, cand.flagged});
  }

  // Slope of log sigma against log eps over the three smallest epsilons.
  std::vector<std::pair<double, double>> pts;
  for (const PersistenceRow& r : out.rows)
    if (r.sigma_min > 1e-15) pts.emplace_back(r.epsilon, r.sigma_min);
  std::sort(pts.begin(), pts.end());
  if (pts.size() > 3) pts.resize(3);
  if (pts.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [e, s] : pts) {
      const double lx = std::log(e), ly = std::log(s);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double m = static_cast<double>(pts.size());
    const double denom = m * sxx - sx * sx;
    if (std::abs(denom) > 1e-12)
      out.fitted_exponent = (m * sxy - sx * sy) / denom;
  }
  return out;
}

}  // namespace floqem
