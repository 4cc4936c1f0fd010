#ifndef VORTEX_KERNELS_HPP
#define VORTEX_KERNELS_HPP

#include <complex>
#include <string>
#include <vector>

#include "vortex/grid.hpp"
#include "vortex/mollifier.hpp"

namespace vortex {

using Cpx = std::complex<double>;

/// Biot-Savart kernel K(x) = (1/2pi) x_perp / |x|^2 with the counterclockwise
/// convention x_perp = (-x2, x1). Throws on the singular input x = 0.
Vec2 biot_savart(Vec2 x);

/// Bounded antiderivative matrix K0(x) = (1/2pi) arctan(x1/x2) I, entries in
/// [-1/4, 1/4]. Throws on the discontinuity line x2 = 0.
Mat2 biot_savart_antiderivative(Vec2 x);

/// Precomputed mollified interaction K * V^N on a centered square grid.
///
/// Real-space node values come from the exact radial reduction: for radial
/// V^N the convolution is K(z) times the V^N-mass enclosed in |z|, which is
/// free-space exact, exactly antisymmetric and exactly zero at the origin.
/// The grid-sampled spectrum of V^N is kept alongside; the particle-mesh
/// path applies i xi_perp/|xi|^2 vhat(xi) mode by mode (xi = 0 removed), so
/// every retained mode is divergence-free by construction.
struct KernelTable {
  GridSpec spec;
  MollifierSpec moll;
  VecField values;
  std::vector<Cpx> vhat;  // DFT of V^N samples, zero mode removed

  double h() const { return spec.h(); }
};

/// Builds the table. Requires power-of-two M and a box large enough that the
/// V^N mass outside it stays below tail_tol (configuration error otherwise).
KernelTable build_interaction_table(const MollifierSpec& moll, double L, int M,
                                    double tail_tol = 1e-10);

/// Bilinear interpolation of the table; reproduces node values exactly and
/// throws OutOfBoxError when z leaves the covered box.
Vec2 interpolate(const KernelTable& table, Vec2 z);

/// Spectral velocity multiplier for mode (kx, ky) in DFT index convention,
/// factored as xi_perp times a shared complex scalar: the mode value is
/// (perp_x, perp_y) * factor = i xi_perp/|xi|^2 vhat (zero at the mean
/// mode). Keeping the odd factor explicit makes xi . uhat an exact zero.
struct VelocityMode {
  double perp_x{0.0};
  double perp_y{0.0};
  Cpx factor{0.0, 0.0};

  Cpx ux() const { return perp_x * factor; }
  Cpx uy() const { return perp_y * factor; }
};
VelocityMode velocity_mode(const KernelTable& table, int kx, int ky);

/// Max over retained modes of |xi . uhat(xi)|; zero by construction.
double max_mode_divergence(const KernelTable& table);

// Table reuse across runs: values in the binary field format, spectrum
// rebuilt on load from the stored mollifier data.
void save_table(const std::string& path, const KernelTable& table);
KernelTable load_table(const std::string& path, const MollifierSpec& moll);

}  // namespace vortex

#endif
