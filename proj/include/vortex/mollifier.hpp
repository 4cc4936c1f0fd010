#ifndef VORTEX_MOLLIFIER_HPP
#define VORTEX_MOLLIFIER_HPP

#include <cstdint>
#include <vector>

#include "vortex/common.hpp"

namespace vortex {

/// Moderate-interaction scaling data: V^N(y) = N^beta V(N^(beta/d) y) with the
/// smooth exponential profile V(y) = Cbar exp(-sqrt(1+|y|^2)), d = 2.
struct MollifierSpec {
  double beta{0.2};
  double alpha{1.1};
  std::int64_t N{1};
  double cbar{0.0};  // normalization so that V integrates to one
  int d{2};

  /// Kernel-density bandwidth N^(-beta/d).
  double bandwidth() const;
  /// N^beta, the sup of V^N relative to sup V.
  double peak_scale() const;
};

/// Admissible beta range for a positive convergence exponent; both strict.
bool beta_admissible(double beta, double alpha, int d);
double beta_upper_bound_martingale(int d);          // 1 / (2 (1 + 1/d))
double beta_upper_bound_qv(double alpha, int d);    // 1 / (1 + 2/d + 2 alpha)

/// Builds a spec; rejects beta outside the admissible range or alpha <= d/2.
MollifierSpec make_mollifier_spec(double beta, double alpha, std::int64_t N);

/// Normalization constant Cbar, computed once by high-resolution radial
/// quadrature and cached.
double mollifier_normalization();

/// V at radius r (profile is radial).
double mollifier_value_radial(double r);
double mollifier_value(Vec2 y);

/// V^N(y) = N^beta V(N^(beta/d) y).
double mollified_value(const MollifierSpec& spec, Vec2 y);

/// d/dr of V at radius r: -V(r) * r / sqrt(1 + r^2).
double mollifier_radial_derivative(double r);

/// Gradient of V^N.
Vec2 mollified_gradient(const MollifierSpec& spec, Vec2 y);

/// Mass of V inside radius r (unscaled units); exact in the limit r -> inf.
double mollifier_radial_mass(double r);

/// Mass of V^N inside radius r (physical units). Scaling preserves mass.
double mollified_radial_mass(const MollifierSpec& spec, double r);

/// Radius in unscaled units beyond which V < rel_tol * V(0).
double mollifier_cutoff_radius(double rel_tol);

/// Inverse of the radial mass: r with mass(r) = m, for sampling.
double mollifier_radial_mass_inverse(double m);

/// Empirical constants of the mollifier assumption, measured on a radial
/// sample grid: |grad V| <= c_grad * V and V <= c_decay * (1+|y|^2)^(-alpha).
struct MollifierAssumptionReport {
  double c_grad{0.0};
  double c_decay{0.0};
  double scan_radius{0.0};
  bool ok{false};
};
MollifierAssumptionReport check_mollifier_assumption(double alpha, double scan_radius = 60.0);

/// Cubic-Hermite lookup of V along the scaled radius; exact knot values and
/// derivatives, relative error ~1e-10. This is the hot path of the density
/// scatter, which evaluates V^N at every grid node near every particle.
class RadialLut {
 public:
  RadialLut();

  /// V(u) for scaled radius u >= 0; returns 0 beyond the 1e-16 cutoff.
  double value(double u) const {
    if (u >= umax_) return 0.0;
    const double s = u * inv_du_;
    const std::size_t k = static_cast<std::size_t>(s);
    const double t = s - static_cast<double>(k);
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * f_[k] + h10 * du_ * g_[k] + h01 * f_[k + 1] + h11 * du_ * g_[k + 1];
  }

  double cutoff() const { return umax_; }

 private:
  double du_{0.0};
  double inv_du_{0.0};
  double umax_{0.0};
  std::vector<double> f_;
  std::vector<double> g_;
};

const RadialLut& mollifier_lut();

}  // namespace vortex

#endif
