#include "floqem/potentials.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <algorithm>
#include <cmath>
#include <memory>

namespace floqem {

namespace {

double sech(double x) { return 1.0 / std::cosh(x); }

double maxabs_entry(const MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

double weight(double x, double beta) { return std::pow(1.0 + std::abs(x), beta); }

// Golden-section maximization of g on [a, b] (g assumed unimodal there).
double golden_max(const std::function<double(double)>& g, double a, double b,
                  double* arg) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 200 && (b - a) > 1e-12 * std::max(1.0, std::abs(a) + std::abs(b));
       ++it) {
    if (gc > gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - gr * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + gr * (b - a);
      gd = g(d);
    }
  }
  const double mid = 0.5 * (a + b);
  if (arg) *arg = mid;
  return g(mid);
}

WeightedNorm scan_norm(const std::function<double(double)>& g, double window,
                       int density) {
  if (density < 9) throw ConfigError("xbeta_norm density too small");
  auto scan = [&](int pts, double* arg_out) {
    double best = -1.0, best_x = 0.0;
    int best_i = 0;
    std::vector<double> xs(pts);
    for (int i = 0; i < pts; ++i) {
      const double x = -window + 2.0 * window * i / (pts - 1);
      xs[i] = x;
      const double v = g(x);
      if (!std::isfinite(v)) throw NonFiniteField("weighted norm scan hit a non-finite value");
      if (v > best) {
        best = v;
        best_x = x;
        best_i = i;
      }
    }
    const double lo = xs[std::max(0, best_i - 1)];
    const double hi = xs[std::min(pts - 1, best_i + 1)];
    double arg = best_x;
    const double refined = golden_max(g, lo, hi, &arg);
    if (refined > best) {
      best = refined;
      best_x = arg;
    }
    if (arg_out) *arg_out = best_x;
    return best;
  };
  WeightedNorm out;
  out.value = scan(density, &out.argmax);
  const double coarse = scan(density / 2 + 1, nullptr);
  out.grid_defect = std::abs(out.value - coarse);
  return out;
}

}  // namespace

void Potential::validate() const {
  if (n < 1) throw ConfigError("potential dimension must be >= 1");
  if (!(period > 0)) throw ConfigError("potential period must be positive");
  if (!(beta > 1.0))
    throw ConfigError(
        "beta must be > 1 (perturbations live in a (1+|x|)^beta weighted space)");
  if (!A || !Ap) throw ConfigError("potential fields A and Ap must be set");
  if (symmetry_defect(A, n, 10.0, 101) > 1e-8)
    throw ConfigError("A(x) must be symmetric");
  if (symmetry_defect(Ap, n, 10.0, 101) > 1e-8)
    throw ConfigError("Ap(x) must be symmetric");
  if (periodicity_defect(Ap, n, period, 257) > 1e-7)
    throw ConfigError("Ap(x) must have the declared period");
  if (diagonal_periodic_part &&
      static_cast<int>(Ap_diagonal.size()) != n)
    throw ConfigError("diagonal periodic part needs one scalar block per channel");
}

WeightedNorm xbeta_norm(const MatrixField& F, int n, double beta, double window,
                        int density) {
  if (n < 1) throw ConfigError("xbeta_norm: dimension must be >= 1");
  auto g = [&F, n, beta](double x) {
    const MatrixXd m = F(x);
    if (m.rows() != n || m.cols() != n)
      throw ConfigError("xbeta_norm: field has wrong dimensions");
    return weight(x, beta) * maxabs_entry(m);
  };
  return scan_norm(g, window, density);
}

WeightedNorm xbeta_norm(const ScalarField& f, double beta, double window,
                        int density) {
  auto g = [&f, beta](double x) { return weight(x, beta) * std::abs(f(x)); };
  return scan_norm(g, window, density);
}

double tail_stabilization_defect(const Potential& pot, double window) {
  MatrixField diff = [A = pot.A, Ap = pot.Ap](double x) {
    return MatrixXd(A(x) - Ap(x));
  };
  const WeightedNorm near = xbeta_norm(diff, pot.n, pot.beta, window, 4001);
  const WeightedNorm far = xbeta_norm(diff, pot.n, pot.beta, 2.0 * window, 8001);
  return std::abs(far.value - near.value);
}

double symmetry_defect(const MatrixField& F, int n, double window, int samples) {
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double x = -window + 2.0 * window * i / (samples - 1);
    const MatrixXd m = F(x);
    if (m.rows() != n || m.cols() != n)
      throw ConfigError("symmetry_defect: field has wrong dimensions");
    worst = std::max(worst, maxabs_entry(MatrixXd(m - m.transpose())));
  }
  return worst;
}

double periodicity_defect(const MatrixField& F, int n, double period,
                          int samples) {
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double x = -period + 2.0 * period * i / (samples - 1);
    const MatrixXd a = F(x);
    const MatrixXd b = F(x + period);
    if (a.rows() != n || a.cols() != n)
      throw ConfigError("periodicity_defect: field has wrong dimensions");
    worst = std::max(worst, maxabs_entry(MatrixXd(b - a)));
  }
  return worst;
}

std::string to_string(PerturbationClass cls) {
  switch (cls) {
    case PerturbationClass::full: return "full";
    case PerturbationClass::diagonal: return "diagonal";
    case PerturbationClass::offdiag_row1: return "offdiag_row1";
    case PerturbationClass::t_beta: return "t_beta";
  }
  throw ConfigError("unknown perturbation class");
}

PerturbationClass perturbation_class_from_string(const std::string& s) {
  if (s == "full") return PerturbationClass::full;
  if (s == "diagonal") return PerturbationClass::diagonal;
  if (s == "offdiag_row1") return PerturbationClass::offdiag_row1;
  if (s == "t_beta") return PerturbationClass::t_beta;
  throw ConfigError("unknown perturbation class '" + s + "'");
}

MatrixXd Perturbation::eval(double x) const {
  MatrixXd b = epsilon * direction(x);
  if (b.rows() != n || b.cols() != n)
    throw ConfigError("perturbation direction has wrong dimensions");
  if (!b.allFinite())
    throw NonFiniteField("perturbation is not finite at x = " + std::to_string(x));
  return b;
}

MatrixField Perturbation::field() const {
  return [p = *this](double x) { return p.eval(x); };
}

void Perturbation::validate() const {
  if (n < 1) throw ConfigError("perturbation dimension must be >= 1");
  if (!(beta > 1.0))
    throw ConfigError(
        "beta must be > 1 (perturbations live in a (1+|x|)^beta weighted space)");
  if (!direction) throw ConfigError("perturbation direction must be set");
  if (!(epsilon >= 0)) throw ConfigError("epsilon must be >= 0");
  if (cls != PerturbationClass::diagonal && n < 2)
    throw ConfigError("off-diagonal perturbation classes need n >= 2");
  if (col < 0 || col >= n || row < 0 || row >= n)
    throw ConfigError("perturbation slot indices out of range");
}

ScalarField sech2_profile() {
  return [](double x) {
    const double s = sech(x);
    return s * s;
  };
}

ScalarField gaussian_profile() {
  return [](double x) { return std::exp(-x * x); };
}

ScalarField bump_profile(double a, double b) {
  if (!(a < b)) throw ConfigError("bump profile needs a < b");
  return [a, b](double x) {
    const double t = (2.0 * x - a - b) / (b - a);
    const double t2 = t * t;
    if (t2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - t2));
  };
}

Perturbation make_perturbation(PerturbationClass cls, const ScalarField& profile,
                               const std::string& profile_name, double epsilon,
                               int n, double beta, int row, int col,
                               const MatrixXd* pattern) {
  if (!profile) throw ConfigError("perturbation profile must be set");
  Perturbation p;
  p.n = n;
  p.beta = beta;
  p.cls = cls;
  p.epsilon = epsilon;
  p.profile_name = profile_name;
  p.row = row;
  p.col = col;
  switch (cls) {
    case PerturbationClass::diagonal: {
      if (row < 0 || row >= n) throw ConfigError("diagonal slot out of range");
      p.col = row;
      p.direction = [profile, n, row](double x) {
        MatrixXd b = MatrixXd::Zero(n, n);
        b(row, row) = profile(x);
        return b;
      };
      break;
    }
    case PerturbationClass::t_beta:
      if (n < 2) throw ConfigError("t_beta class needs n >= 2");
      p.row = 0;
      p.col = 1;
      p.direction = [profile, n](double x) {
        MatrixXd b = MatrixXd::Zero(n, n);
        b(0, 1) = b(1, 0) = profile(x);
        return b;
      };
      break;
    case PerturbationClass::offdiag_row1: {
      if (col < 1 || col >= n)
        throw ConfigError("offdiag_row1 column must be in [1, n)");
      p.row = 0;
      p.direction = [profile, n, col](double x) {
        MatrixXd b = MatrixXd::Zero(n, n);
        b(0, col) = b(col, 0) = profile(x);
        return b;
      };
      break;
    }
    case PerturbationClass::full: {
      if (!pattern) throw ConfigError("full perturbation class needs a pattern");
      if (pattern->rows() != n || pattern->cols() != n)
        throw ConfigError("perturbation pattern has wrong dimensions");
      if (maxabs_entry(MatrixXd(*pattern - pattern->transpose())) > 1e-12)
        throw ConfigError("perturbation pattern must be symmetric");
      MatrixXd sym = 0.5 * (*pattern + pattern->transpose());
      p.direction = [profile, sym](double x) { return MatrixXd(profile(x) * sym); };
      break;
    }
  }
  p.validate();
  return p;
}

Perturbation scaled(const Perturbation& p, double epsilon) {
  Perturbation out = p;
  out.epsilon = epsilon;
  out.validate();
  return out;
}

Perturbation normalize_direction(const Perturbation& p, double window) {
  const WeightedNorm nrm = xbeta_norm(p.direction, p.n, p.beta, window, 4001);
  if (!(nrm.value > 0))
    throw ConfigError("cannot normalize a vanishing perturbation direction");
  Perturbation out = p;
  out.direction = [dir = p.direction, s = nrm.value](double x) {
    return MatrixXd(dir(x) / s);
  };
  return out;
}

Potential make_example5(double lambda0) {
  Potential pot;
  pot.n = 2;
  pot.period = M_PI;
  pot.beta = 2.0;
  pot.name = "example5";
  pot.lambda_ref = lambda0;
  ScalarField vc = [lambda0](double x) {
    const double s = sech(x);
    return 1.0 - 2.0 * s * s + lambda0;
  };
  ScalarField vp = [](double x) { return 2.0 * std::cos(2.0 * x); };
  pot.A = [vc, vp](double x) {
    MatrixXd a = MatrixXd::Zero(2, 2);
    a(0, 0) = vc(x);
    a(1, 1) = vp(x);
    return a;
  };
  pot.Ap = [lambda0, vp](double x) {
    MatrixXd a = MatrixXd::Zero(2, 2);
    a(0, 0) = 1.0 + lambda0;
    a(1, 1) = vp(x);
    return a;
  };
  pot.u_star = [](double x) {
    Eigen::VectorXd u(2);
    u << sech(x) / std::sqrt(2.0), 0.0;
    return u;
  };
  pot.u_star_xx = [](double x) {
    const double s = sech(x);
    Eigen::VectorXd u(2);
    u << (s - 2.0 * s * s * s) / std::sqrt(2.0), 0.0;
    return u;
  };
  pot.diagonal_periodic_part = true;
  pot.Ap_diagonal = {[lambda0](double) { return 1.0 + lambda0; }, vp};
  pot.validate();
  return pot;
}

Potential make_free_potential(int n, double period) {
  Potential pot;
  pot.n = n;
  pot.period = period;
  pot.beta = 2.0;
  pot.name = "free";
  pot.A = [n](double) { return MatrixXd(MatrixXd::Zero(n, n)); };
  pot.Ap = pot.A;
  pot.diagonal_periodic_part = true;
  pot.Ap_diagonal.assign(n, [](double) { return 0.0; });
  pot.validate();
  return pot;
}

namespace {

using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;

struct SplineTable {
  int n = 0;
  double x0 = 0.0, x1 = 0.0;
  std::vector<Spline> entries;  // n*n splines, row-major

  MatrixXd eval(double x) const {
    MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = entries[i * n + j](x);
    return MatrixXd(0.5 * (m + m.transpose()));
  }
};

SplineTable build_table(int n, double x0, double dx,
                        const std::vector<std::vector<double>>& rows,
                        const char* what) {
  if (rows.size() < 5)
    throw ConfigError(std::string(what) + " table needs at least 5 sample rows");
  if (!(dx > 0)) throw ConfigError(std::string(what) + " table needs dx > 0");
  SplineTable t;
  t.n = n;
  t.x0 = x0;
  t.x1 = x0 + dx * (static_cast<double>(rows.size()) - 1.0);
  t.entries.reserve(static_cast<size_t>(n) * n);
  for (int e = 0; e < n * n; ++e) {
    std::vector<double> series(rows.size());
    for (size_t r = 0; r < rows.size(); ++r) {
      if (static_cast<int>(rows[r].size()) != n * n)
        throw ConfigError(std::string(what) + " table rows must have n*n entries");
      series[r] = rows[r][e];
      if (!std::isfinite(series[r]))
        throw ConfigError(std::string(what) + " table has non-finite entries");
    }
    t.entries.emplace_back(series.data(), series.size(), x0, dx);
  }
  return t;
}

}  // namespace

Potential make_table_potential(int n, double period, double beta, double x0,
                               double dx, const std::vector<std::vector<double>>& diff,
                               double ap_dx, const std::vector<std::vector<double>>& ap,
                               const std::string& name) {
  if (n < 1) throw ConfigError("table potential dimension must be >= 1");
  const double ap_span = ap_dx * (static_cast<double>(ap.size()) - 1.0);
  if (std::abs(ap_span - period) > 1e-9 * std::max(1.0, period))
    throw ConfigError("periodic table must cover exactly one period [0, period]");
  if (!ap.empty() && !ap.front().empty()) {
    for (size_t e = 0; e < ap.front().size(); ++e)
      if (std::abs(ap.front()[e] - ap.back()[e]) > 1e-8)
        throw ConfigError("periodic table endpoints must match");
  }
  auto ap_table = std::make_shared<SplineTable>(build_table(n, 0.0, ap_dx, ap, "Ap"));
  auto diff_table =
      std::make_shared<SplineTable>(build_table(n, x0, dx, diff, "A - Ap"));

  Potential pot;
  pot.n = n;
  pot.period = period;
  pot.beta = beta;
  pot.name = name;
  pot.Ap = [ap_table, period](double x) {
    double r = x - period * std::floor(x / period);
    if (r < 0) r = 0;
    if (r > period) r = period;
    return ap_table->eval(r);
  };
  pot.A = [ap = pot.Ap, diff_table, n](double x) {
    MatrixXd base = ap(x);
    if (x >= diff_table->x0 && x <= diff_table->x1) base += diff_table->eval(x);
    return base;
  };
  pot.validate();
  return pot;
}

}  // namespace floqem
