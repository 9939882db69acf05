#include "floqem/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <unsupported/Eigen/MatrixFunctions>

namespace floqem {

void PeriodicSystem::validate() const {
  if (!(period > 0)) throw ConfigError("period must be positive");
  if (field.size <= 0) throw ConfigError("field dimension must be positive");
}

MatrixXd monodromy(const PeriodicSystem& sys, const IntegratorConfig& cfg) {
  sys.validate();
  return fundamental_matrix(sys.field, 0.0, sys.period, cfg);
}

VectorXcd floquet_multipliers(const MatrixXd& monodromy) {
  Eigen::ComplexEigenSolver<MatrixXcd> es(
      monodromy.cast<std::complex<double>>(), false);
  if (es.info() != Eigen::Success)
    throw NumericalError("multiplier eigensolve failed");
  return es.eigenvalues();
}

VectorXcd floquet_exponents(const VectorXcd& multipliers, double period) {
  if (!(period > 0)) throw ConfigError("period must be positive");
  VectorXcd w(multipliers.size());
  for (Eigen::Index i = 0; i < multipliers.size(); ++i) {
    if (std::abs(multipliers(i)) == 0.0)
      throw NumericalError("zero Floquet multiplier (singular monodromy)");
    w(i) = std::log(multipliers(i)) / period;
  }
  return w;
}

int count_center_multipliers(const VectorXcd& multipliers, double tol) {
  int count = 0;
  for (Eigen::Index i = 0; i < multipliers.size(); ++i)
    if (std::abs(std::abs(multipliers(i)) - 1.0) < tol) ++count;
  if (count % 2 != 0)
    throw NumericalError(
        "odd number of unit-modulus multipliers; pairing is broken or the "
        "modulus tolerance straddles a band edge");
  return count;
}

namespace {

MatrixXcd orthonormal_columns(const MatrixXcd& cols) {
  const Eigen::Index n = cols.rows(), k = cols.cols();
  if (k == 0) return MatrixXcd(n, 0);
  Eigen::HouseholderQR<MatrixXcd> qr(cols);
  return qr.householderQ() * MatrixXcd::Identity(n, k);
}

}  // namespace

SpectralSplit spectral_split(const MatrixXcd& R, double tol) {
  Eigen::ComplexEigenSolver<MatrixXcd> es(R, true);
  if (es.info() != Eigen::Success)
    throw NumericalError("spectral split eigensolve failed");
  const VectorXcd w = es.eigenvalues();
  const MatrixXcd V = es.eigenvectors();

  Eigen::JacobiSVD<MatrixXcd> svd(V);
  const double cond =
      svd.singularValues()(0) / svd.singularValues()(V.cols() - 1);
  if (!(cond < 1e10))
    throw NumericalError(
        "eigenvector basis is near-defective (condition number " +
        std::to_string(cond) + "); spectral projections are unreliable");

  std::vector<int> sidx, cidx, uidx;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double re = w(i).real();
    const double mag = std::abs(re);
    if (mag >= 0.1 * tol && mag < tol)
      throw GapViolation("eigenvalue real part " + std::to_string(re) +
                         " falls in the spectral-gap ambiguity band");
    if (mag < tol)
      cidx.push_back(static_cast<int>(i));
    else if (re < 0)
      sidx.push_back(static_cast<int>(i));
    else
      uidx.push_back(static_cast<int>(i));
  }

  const Eigen::Index n = R.rows();
  auto gather = [&](const std::vector<int>& idx) {
    MatrixXcd cols(n, static_cast<Eigen::Index>(idx.size()));
    for (size_t j = 0; j < idx.size(); ++j) cols.col(j) = V.col(idx[j]);
    return cols;
  };
  auto projection = [&](const std::vector<int>& idx) {
    MatrixXcd d = MatrixXcd::Zero(n, n);
    for (int i : idx) d(i, i) = 1.0;
    return MatrixXcd(V * d * V.inverse());
  };

  SpectralSplit split;
  split.stable_basis = orthonormal_columns(gather(sidx));
  split.center_basis = orthonormal_columns(gather(cidx));
  split.unstable_basis = orthonormal_columns(gather(uidx));
  split.stable_proj = projection(sidx);
  split.center_proj = projection(cidx);
  split.unstable_proj = projection(uidx);
  split.stable_dim = static_cast<int>(sidx.size());
  split.center_dim = static_cast<int>(cidx.size());
  split.unstable_dim = static_cast<int>(uidx.size());
  return split;
}

namespace {

MatrixXd real_invariant_span(const MatrixXcd& cols, int expected_dim) {
  const Eigen::Index n = cols.rows();
  if (expected_dim == 0) return MatrixXd(n, 0);
  MatrixXd cand(n, 2 * cols.cols());
  cand << cols.real(), cols.imag();
  Eigen::ColPivHouseholderQR<MatrixXd> qr(cand);
  qr.setThreshold(1e-8);
  if (qr.rank() != expected_dim)
    throw NumericalError(
        "real invariant subspace extraction failed (rank " +
        std::to_string(qr.rank()) + ", expected " +
        std::to_string(expected_dim) + "); monodromy may be near-defective");
  return qr.householderQ() * MatrixXd::Identity(n, expected_dim);
}

}  // namespace

HyperbolicBases hyperbolic_bases(const MatrixXd& monodromy, double center_tol) {
  Eigen::ComplexEigenSolver<MatrixXcd> es(
      monodromy.cast<std::complex<double>>(), true);
  if (es.info() != Eigen::Success)
    throw NumericalError("monodromy eigensolve failed");
  const VectorXcd mu = es.eigenvalues();
  const MatrixXcd V = es.eigenvectors();

  std::vector<int> sidx, uidx;
  int center = 0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double m = std::abs(mu(i));
    if (std::abs(m - 1.0) < center_tol)
      ++center;
    else if (m < 1.0)
      sidx.push_back(static_cast<int>(i));
    else
      uidx.push_back(static_cast<int>(i));
  }

  auto gather = [&](const std::vector<int>& idx) {
    MatrixXcd cols(monodromy.rows(), static_cast<Eigen::Index>(idx.size()));
    for (size_t j = 0; j < idx.size(); ++j) cols.col(j) = V.col(idx[j]);
    return cols;
  };

  HyperbolicBases bases;
  bases.center_count = center;
  bases.stable =
      real_invariant_span(gather(sidx), static_cast<int>(sidx.size()));
  bases.unstable =
      real_invariant_span(gather(uidx), static_cast<int>(uidx.size()));
  return bases;
}

FloquetData floquet_decomposition(const PeriodicSystem& sys,
                                  const FloquetConfig& cfg) {
  sys.validate();
  const double p = sys.period;
  const int samples = std::max(2, cfg.grid_samples);
  const Eigen::Index n = sys.field.size;

  FloquetData fd;
  fd.period = p;
  fd.grid.resize(samples);
  fd.phi.resize(samples);
  fd.grid[0] = 0.0;
  fd.phi[0] = MatrixXd::Identity(n, n);
  for (int j = 1; j < samples; ++j) {
    fd.grid[j] = p * static_cast<double>(j) / (samples - 1);
    fd.phi[j] = integrate_matrix_ode(sys.field, fd.phi[j - 1], fd.grid[j - 1],
                                     fd.grid[j], cfg.integrator);
  }
  fd.monodromy = fd.phi.back();

  fd.multipliers = floquet_multipliers(fd.monodromy);
  for (Eigen::Index i = 0; i < fd.multipliers.size(); ++i)
    if (std::abs(fd.multipliers(i) + 1.0) < cfg.branch_tol)
      throw BranchFailure(
          "Floquet multiplier within tolerance of -1 (principal logarithm "
          "branch cut); analyze the period-doubled system instead");
  fd.center_count = count_center_multipliers(fd.multipliers, cfg.center_tol);
  fd.exponents = floquet_exponents(fd.multipliers, p);

  const MatrixXcd mc = fd.monodromy.cast<std::complex<double>>();
  fd.log_coeff = MatrixXcd(mc.log()) / p;

  fd.g.resize(samples);
  for (int j = 0; j < samples; ++j)
    fd.g[j] = fd.phi[j].cast<std::complex<double>>() *
              MatrixXcd((-fd.log_coeff * fd.grid[j]).exp());

  fd.det_defect = std::abs(fd.monodromy.determinant() - 1.0);
  const MatrixXcd reconstructed = MatrixXcd((fd.log_coeff * p).exp());
  fd.exp_defect =
      (reconstructed - mc).norm() / std::max(1.0, mc.norm());
  fd.periodicity_defect =
      (mc * MatrixXcd((-fd.log_coeff * p).exp()) - MatrixXcd::Identity(n, n))
          .norm();

  fd.split = spectral_split(fd.log_coeff, cfg.gap_tol);

  fd.omega_min = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < fd.exponents.size(); ++i) {
    const double re = fd.exponents(i).real();
    if (re > cfg.gap_tol) fd.omega_min = std::min(fd.omega_min, re);
  }
  return fd;
}

PeriodicFlow::PeriodicFlow(PeriodicSystem sys, const IntegratorConfig& cfg,
                           int nodes)
    : sys_(std::move(sys)), cfg_(cfg) {
  sys_.validate();
  const int count = std::max(2, nodes);
  const Eigen::Index n = sys_.field.size;
  nodes_.resize(count);
  values_.resize(count);
  nodes_[0] = 0.0;
  values_[0] = MatrixXd::Identity(n, n);
  for (int j = 1; j < count; ++j) {
    nodes_[j] = sys_.period * static_cast<double>(j) / (count - 1);
    values_[j] = integrate_matrix_ode(sys_.field, values_[j - 1],
                                      nodes_[j - 1], nodes_[j], cfg_);
  }
}

MatrixXd PeriodicFlow::phi(double x) const {
  const double p = sys_.period;
  if (x < -1e-12 || x > p + 1e-12)
    throw PreconditionError("PeriodicFlow::phi expects x in [0, p]");
  x = std::clamp(x, 0.0, p);
  const double h = p / static_cast<double>(nodes_.size() - 1);
  auto k = static_cast<size_t>(std::min<double>(
      std::floor(x / h), static_cast<double>(nodes_.size() - 1)));
  if (std::abs(x - nodes_[k]) < 1e-14) return values_[k];
  return integrate_matrix_ode(sys_.field, values_[k], nodes_[k], x, cfg_);
}

MatrixXd PeriodicFlow::phi_reduced(double x) const {
  const double p = sys_.period;
  double r = x - p * std::floor(x / p);
  if (r < 0) r += p;
  if (r >= p) r -= p;
  return phi(r);
}

bool shifted_spectrum_clear(const FloquetData& fd, double s, double tol) {
  const double target = std::exp(fd.period * s);
  double dist_mu = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < fd.multipliers.size(); ++i)
    dist_mu = std::min(dist_mu, std::abs(fd.multipliers(i) - target));
  const bool clear_mu = dist_mu > tol * std::max(1.0, target);

  double dist_w = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < fd.exponents.size(); ++i)
    dist_w = std::min(dist_w,
                      std::abs(fd.exponents(i) - std::complex<double>(s, 0)));
  const bool clear_w = dist_w > tol;

  if (clear_mu != clear_w)
    throw NumericalError(
        "multiplier and exponent spectrum checks disagree (branch defect)");
  return clear_mu;
}

}  // namespace floqem
