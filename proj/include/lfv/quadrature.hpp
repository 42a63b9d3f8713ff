#pragma once

#include <functional>

namespace lfv {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  int panels = 0;
};

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  int max_panels = 6000;
};

// Integrand on (0,1) evaluated as f(x, 1 - x). Both coordinates are passed so
// endpoint singularities at x = 1 can be evaluated without cancellation.
using UnitIntegrand = std::function<double(double x, double one_minus_x)>;

// Global adaptive Gauss-Kronrod (21 point) integration over (0,1). Each half
// of the interval is integrated in the coordinate measuring distance to its
// endpoint, starting from panels geometrically refined toward 0 and 1.
// Throws QuadratureDivergence when the error target is not met.
QuadratureResult integrate_unit(const UnitIntegrand& f,
                                const QuadratureOptions& opts = {});

// Adaptive integration over a finite interval [a, b] with optional interior
// breakpoints laid out geometrically (useful when the integrand varies on a
// logarithmic scale).
QuadratureResult integrate_interval(const std::function<double(double)>& f,
                                    double a, double b,
                                    const QuadratureOptions& opts = {},
                                    bool geometric_breaks = false);

}  // namespace lfv
