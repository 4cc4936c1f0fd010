#include "vortex/mollifier.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "vortex/quadrature.hpp"

namespace vortex {

namespace {

double profile_unnormalized(double r) { return std::exp(-std::sqrt(1.0 + r * r)); }

// Cumulative radial mass table of V on [0, rmax]; monotone, dense enough for
// binary-search inversion.
struct RadialMassTable {
  double rmax{80.0};
  double dr{0.0};
  std::vector<double> mass;  // mass[k] = integral of V over |y| <= k*dr

  RadialMassTable() {
    const int n = 32768;
    dr = rmax / n;
    mass.resize(n + 1, 0.0);
    const double cbar = mollifier_normalization();
    GaussLegendre gl(12);
    for (int k = 0; k < n; ++k) {
      const double a = k * dr;
      const double b = a + dr;
      const double piece = gl.integrate(a, b, [cbar](double r) {
        return kTwoPi * cbar * r * profile_unnormalized(r);
      });
      mass[k + 1] = mass[k] + piece;
    }
  }

  double eval(double r) const {
    if (r <= 0.0) return 0.0;
    if (r >= rmax) return mass.back();
    const double s = r / dr;
    const std::size_t k = static_cast<std::size_t>(s);
    const double t = s - static_cast<double>(k);
    return mass[k] * (1.0 - t) + mass[k + 1] * t;
  }

  double inverse(double m) const {
    if (m <= 0.0) return 0.0;
    if (m >= mass.back()) return rmax;
    const auto it = std::upper_bound(mass.begin(), mass.end(), m);
    const std::size_t k = static_cast<std::size_t>(it - mass.begin()) - 1;
    const double lo = mass[k];
    const double hi = mass[k + 1];
    const double t = hi > lo ? (m - lo) / (hi - lo) : 0.0;
    return (static_cast<double>(k) + t) * dr;
  }
};

const RadialMassTable& mass_table() {
  static RadialMassTable table;
  return table;
}

}  // namespace

double MollifierSpec::bandwidth() const {
  return std::pow(static_cast<double>(N), -beta / d);
}

double MollifierSpec::peak_scale() const { return std::pow(static_cast<double>(N), beta); }

double beta_upper_bound_martingale(int d) { return 1.0 / (2.0 * (1.0 + 1.0 / d)); }

double beta_upper_bound_qv(double alpha, int d) { return 1.0 / (1.0 + 2.0 / d + 2.0 * alpha); }

bool beta_admissible(double beta, double alpha, int d) {
  return beta > 0.0 && beta < beta_upper_bound_martingale(d) &&
         beta < beta_upper_bound_qv(alpha, d);
}

MollifierSpec make_mollifier_spec(double beta, double alpha, std::int64_t N) {
  constexpr int d = 2;
  if (N < 1) throw ConfigError("mollifier spec needs N >= 1");
  if (!(alpha > d / 2.0)) throw AssumptionError("mollifier decay exponent alpha must exceed d/2");
  if (!beta_admissible(beta, alpha, d)) {
    throw AssumptionError(
        "beta outside the admissible range (0, min(" +
        std::to_string(beta_upper_bound_martingale(d)) + ", " +
        std::to_string(beta_upper_bound_qv(alpha, d)) + "))");
  }
  MollifierSpec spec;
  spec.beta = beta;
  spec.alpha = alpha;
  spec.N = N;
  spec.cbar = mollifier_normalization();
  spec.d = d;
  return spec;
}

double mollifier_normalization() {
  static std::once_flag flag;
  static double cbar = 0.0;
  std::call_once(flag, [] {
    // integral of exp(-sqrt(1+r^2)) over R^2 in polar coordinates; the
    // integrand decays like r e^-r, so [0, 120] is exhaustive at double
    // precision.
    const double total = integrate_composite(0.0, 120.0, 240, 16, [](double r) {
      return kTwoPi * r * profile_unnormalized(r);
    });
    cbar = 1.0 / total;
  });
  return cbar;
}

double mollifier_value_radial(double r) { return mollifier_normalization() * profile_unnormalized(r); }

double mollifier_value(Vec2 y) { return mollifier_value_radial(y.norm()); }

double mollified_value(const MollifierSpec& spec, Vec2 y) {
  const double s = 1.0 / spec.bandwidth();
  return spec.peak_scale() * mollifier_value_radial(s * y.norm());
}

double mollifier_radial_derivative(double r) {
  return -mollifier_value_radial(r) * r / std::sqrt(1.0 + r * r);
}

Vec2 mollified_gradient(const MollifierSpec& spec, Vec2 y) {
  const double r = y.norm();
  if (r == 0.0) return {0.0, 0.0};
  const double s = 1.0 / spec.bandwidth();
  const double dv = spec.peak_scale() * s * mollifier_radial_derivative(s * r);
  return y * (dv / r);
}

double mollifier_radial_mass(double r) { return mass_table().eval(r); }

double mollified_radial_mass(const MollifierSpec& spec, double r) {
  return mollifier_radial_mass(r / spec.bandwidth());
}

double mollifier_cutoff_radius(double rel_tol) {
  // V(u)/V(0) = exp(1 - sqrt(1+u^2)) = rel_tol
  const double s = 1.0 - std::log(rel_tol);
  return std::sqrt(std::max(0.0, s * s - 1.0));
}

double mollifier_radial_mass_inverse(double m) { return mass_table().inverse(m); }

MollifierAssumptionReport check_mollifier_assumption(double alpha, double scan_radius) {
  MollifierAssumptionReport rep;
  rep.scan_radius = scan_radius;
  double cg = 0.0;
  double cd = 0.0;
  const int n = 200000;
  for (int k = 0; k <= n; ++k) {
    const double r = scan_radius * k / n;
    const double v = mollifier_value_radial(r);
    const double dv = std::fabs(mollifier_radial_derivative(r));
    if (v > 0.0) cg = std::max(cg, dv / v);
    cd = std::max(cd, v * std::pow(1.0 + r * r, alpha));
  }
  rep.c_grad = cg;
  rep.c_decay = cd;
  rep.ok = std::isfinite(cg) && std::isfinite(cd) && cg <= 1.0 + 1e-12;
  return rep;
}

RadialLut::RadialLut() {
  umax_ = mollifier_cutoff_radius(1e-16);
  const int knots_per_unit = 64;
  const std::size_t n = static_cast<std::size_t>(umax_ * knots_per_unit) + 2;
  du_ = umax_ / static_cast<double>(n - 1);
  inv_du_ = 1.0 / du_;
  f_.resize(n + 1);
  g_.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double u = static_cast<double>(k) * du_;
    f_[k] = mollifier_value_radial(u);
    g_[k] = mollifier_radial_derivative(u);
  }
}

const RadialLut& mollifier_lut() {
  static RadialLut lut;
  return lut;
}

}  // namespace vortex
