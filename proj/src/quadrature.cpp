#include "floqem/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

namespace floqem {

namespace {
using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
}

void QuadratureConfig::validate() const {
  if (!(half_width > 0)) throw ConfigError("quadrature half_width must be positive");
  if (!(tol > 0)) throw ConfigError("quadrature tol must be positive");
  if (max_depth < 1 || max_depth > 25)
    throw ConfigError("quadrature max_depth out of range [1, 25]");
  if (!(tail_tol > 0)) throw ConfigError("quadrature tail_tol must be positive");
}

double integrate_interval(const ScalarField& f, double a, double b,
                          const QuadratureConfig& cfg) {
  cfg.validate();
  if (a == b) return 0.0;
  double error = 0.0, l1 = 0.0;
  const double value =
      Rule::integrate(f, a, b, static_cast<unsigned>(cfg.max_depth), cfg.tol,
                      &error, &l1);
  if (!std::isfinite(value))
    throw QuadratureError("integral is not finite");
  if (error > 100.0 * cfg.tol * std::max(1.0, l1))
    throw QuadratureError("quadrature did not converge to the requested tolerance");
  return value;
}

double integrate_line(const ScalarField& f, const QuadratureConfig& cfg) {
  cfg.validate();
  const double w = cfg.half_width;
  const double core = integrate_interval(f, -w, w, cfg);
  const auto abs_f = [&f](double x) { return std::abs(f(x)); };
  const double tail = integrate_interval(abs_f, w, 2.0 * w, cfg) +
                      integrate_interval(abs_f, -2.0 * w, -w, cfg);
  if (!(tail <= cfg.tail_tol))
    throw QuadratureError(
        "integrand mass beyond the quadrature window exceeds tail_tol; "
        "widen half_width");
  return core;
}

}  // namespace floqem
