#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace holder {

struct QuadSettings {
  double abs_tol = 1e-9;
  double rel_tol = 1e-12;
  int max_depth = 40;
  std::size_t max_intervals = 5000;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

using Integrand = std::function<double(double)>;

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature with interval
/// bisection. The interval with the largest error estimate is split until
/// the summed estimate is below max(abs_tol, rel_tol*|I|); intervals at
/// max_depth are never split again.
QuadResult integrate(const Integrand& f, double a, double b,
                     const QuadSettings& settings = {});

/// As integrate(), but throws QuadratureError when not converged.
double integrate_checked(const Integrand& f, double a, double b,
                         const QuadSettings& settings = {});

/// Integral over [a, m] of f where f(u) ~ (m-u)^(2*gamma) near u = m,
/// gamma in (-1/2, 0). Substitutes u = m - v^k with k = 1/(1+2*gamma),
/// which leaves a bounded integrand.
double integrate_upper_singular(const Integrand& f, double a, double m,
                                double gamma, const QuadSettings& settings);

/// Integral of f over [a, infinity) via the map u = a/x (requires a > 0).
double integrate_to_infinity(const Integrand& f, double a,
                             const QuadSettings& settings);

/// Wynn's epsilon algorithm applied to a sequence of partial sums; returns
/// the accelerated limit estimate.
double wynn_epsilon(std::span<const double> partial_sums);

}  // namespace holder
