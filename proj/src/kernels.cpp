#include "vortex/kernels.hpp"

#include <cmath>

#include "vortex/fft.hpp"

namespace vortex {

Vec2 biot_savart(Vec2 x) {
  const double r2 = x.norm2();
  if (r2 == 0.0) throw SingularInputError("biot_savart at x = 0");
  return x.perp() * (1.0 / (kTwoPi * r2));
}

Mat2 biot_savart_antiderivative(Vec2 x) {
  if (x.y == 0.0) throw SingularInputError("biot_savart_antiderivative on the line x2 = 0");
  return Mat2::scalar(std::atan(x.x / x.y) / kTwoPi);
}

KernelTable build_interaction_table(const MollifierSpec& moll, double L, int M,
                                    double tail_tol) {
  GridSpec spec{L, M};
  spec.validate();

  // Mass of V^N outside the inscribed circle bounds the mass outside the box.
  const double tail = 1.0 - mollified_radial_mass(moll, L);
  if (tail > tail_tol) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "interaction table box too small: V^N tail mass %.3e exceeds tolerance %.3e",
                  tail, tail_tol);
    throw ConfigError(buf);
  }

  KernelTable table;
  table.spec = spec;
  table.moll = moll;
  table.values = VecField(spec);

  const double h = spec.h();
  const int half = M / 2;
  for (int iy = 0; iy < M; ++iy) {
    const double zy = h * (iy - half);
    for (int ix = 0; ix < M; ++ix) {
      const double zx = h * (ix - half);
      const double r2 = zx * zx + zy * zy;
      if (r2 == 0.0) continue;  // odd kernel: exactly zero at the origin
      const double m = mollified_radial_mass(moll, std::sqrt(r2));
      const double s = m / (kTwoPi * r2);
      table.values.set(ix, iy, Vec2{-zy * s, zx * s});
    }
  }

  // Grid spectrum of V^N for the particle-mesh path, mean mode removed.
  // Samples are displacement-indexed (origin at index 0, negative lags in
  // the upper half) so that the spectrum convolves node-indexed densities.
  table.vhat.assign(spec.nodes(), Cpx(0.0, 0.0));
  const double inv_bw = 1.0 / moll.bandwidth();
  const double peak = moll.peak_scale();
  auto lag = [M](int i) { return i <= M / 2 ? i : i - M; };
  for (int iy = 0; iy < M; ++iy) {
    const double zy = h * lag(iy);
    for (int ix = 0; ix < M; ++ix) {
      const double zx = h * lag(ix);
      const double r = std::sqrt(zx * zx + zy * zy);
      table.vhat[spec.idx(ix, iy)] = peak * mollifier_value_radial(inv_bw * r);
    }
  }
  Fft2 fft(static_cast<std::size_t>(M));
  fft.forward(table.vhat);
  table.vhat[0] = Cpx(0.0, 0.0);
  return table;
}

Vec2 interpolate(const KernelTable& table, Vec2 z) {
  const int M = table.spec.M;
  const double h = table.spec.h();
  const double sx = z.x / h + M / 2;
  const double sy = z.y / h + M / 2;
  const int ix = static_cast<int>(std::floor(sx));
  const int iy = static_cast<int>(std::floor(sy));
  if (ix < 0 || iy < 0 || ix + 1 >= M || iy + 1 >= M) {
    throw OutOfBoxError("kernel table lookup at |z| = " + std::to_string(z.norm()));
  }
  const double tx = sx - ix;
  const double ty = sy - iy;
  const VecField& v = table.values;
  const std::size_t k00 = table.spec.idx(ix, iy);
  const std::size_t k10 = k00 + 1;
  const std::size_t k01 = k00 + M;
  const std::size_t k11 = k01 + 1;
  const double w00 = (1.0 - tx) * (1.0 - ty);
  const double w10 = tx * (1.0 - ty);
  const double w01 = (1.0 - tx) * ty;
  const double w11 = tx * ty;
  return {w00 * v.x[k00] + w10 * v.x[k10] + w01 * v.x[k01] + w11 * v.x[k11],
          w00 * v.y[k00] + w10 * v.y[k10] + w01 * v.y[k01] + w11 * v.y[k11]};
}

namespace {

// DFT index -> signed wavenumber factor xi = (pi / L) * ktilde.
inline double wavenumber(int k, int M, double L) {
  const int kt = k <= M / 2 ? k : k - M;
  return kPi / L * kt;
}

}  // namespace

VelocityMode velocity_mode(const KernelTable& table, int kx, int ky) {
  const int M = table.spec.M;
  const double xx = wavenumber(kx, M, table.spec.L);
  const double xy = wavenumber(ky, M, table.spec.L);
  const double x2 = xx * xx + xy * xy;
  if (x2 == 0.0) return {};
  VelocityMode mode;
  mode.perp_x = -xy;
  mode.perp_y = xx;
  // with the e^{-i xi x} forward transform the Biot-Savart multiplier picks
  // up a minus sign: uhat = -i xi_perp / |xi|^2 what
  mode.factor = Cpx(0.0, -1.0) / x2 * table.vhat[table.spec.idx(kx, ky)];
  return mode;
}

double max_mode_divergence(const KernelTable& table) {
  const int M = table.spec.M;
  double worst = 0.0;
  for (int ky = 0; ky < M; ++ky) {
    for (int kx = 0; kx < M; ++kx) {
      const VelocityMode mode = velocity_mode(table, kx, ky);
      const double xx = wavenumber(kx, M, table.spec.L);
      const double xy = wavenumber(ky, M, table.spec.L);
      // xi . xi_perp cancels term by term in IEEE arithmetic
      const double odd = xx * mode.perp_x + xy * mode.perp_y;
      worst = std::max(worst, std::abs(odd * mode.factor));
    }
  }
  return worst;
}

void save_table(const std::string& path, const KernelTable& table) {
  write_field(path, table.values);
}

KernelTable load_table(const std::string& path, const MollifierSpec& moll) {
  VecField values = read_vec_field(path);
  KernelTable rebuilt = build_interaction_table(moll, values.spec.L, values.spec.M);
  rebuilt.values = std::move(values);
  return rebuilt;
}

}  // namespace vortex
