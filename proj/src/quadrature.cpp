#include "vortex/quadrature.hpp"

#include <cmath>

#include "vortex/common.hpp"

namespace vortex {

GaussLegendre::GaussLegendre(int order) {
  if (order < 2) throw ConfigError("gauss-legendre order must be >= 2");
  nodes.resize(order);
  weights.resize(order);
  const int n = order;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-based initial guess, then Newton on P_n.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

double integrate_composite(double a, double b, int panels, int order,
                           const std::function<double(double)>& f) {
  static thread_local int cached_order = -1;
  static thread_local GaussLegendre* cached = nullptr;
  if (cached_order != order) {
    delete cached;
    cached = new GaussLegendre(order);
    cached_order = order;
  }
  const double step = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) s += cached->integrate(a + p * step, a + (p + 1) * step, f);
  return s;
}

}  // namespace vortex
