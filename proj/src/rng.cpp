#include "vortex/rng.hpp"

#include <cmath>

namespace vortex {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi); }

}  // namespace

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw NumericalError("inverse_normal_cdf: p outside (0,1)");
  // Initial guess: Shore-style logistic approximation, then Halley refinement.
  const double q = p < 0.5 ? p : 1.0 - p;
  double t = std::sqrt(-2.0 * std::log(q));
  double x = t - (2.30753 + 0.27061 * t) / (1.0 + 0.99229 * t + 0.04481 * t * t);
  if (p < 0.5) x = -x;
  for (int it = 0; it < 3; ++it) {
    const double err = normal_cdf(x) - p;
    const double d = normal_pdf(x);
    if (d == 0.0) break;
    const double u = err / d;
    x -= u / (1.0 + 0.5 * x * u);  // Halley step
  }
  return x;
}

}  // namespace vortex
