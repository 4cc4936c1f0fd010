#ifndef VORTEX_QUADRATURE_HPP
#define VORTEX_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace vortex {

/// Gauss-Legendre nodes/weights on [-1, 1], computed once per order by
/// Newton iteration on the Legendre recurrence.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int order);

  double integrate(double a, double b, const std::function<double(double)>& f) const {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(mid + half * nodes[i]);
    return s * half;
  }
};

/// Composite Gauss-Legendre over [a, b] split into n panels.
double integrate_composite(double a, double b, int panels, int order,
                           const std::function<double(double)>& f);

}  // namespace vortex

#endif
