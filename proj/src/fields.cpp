#include "vortex/fields.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "vortex/fft.hpp"

namespace vortex {

namespace {

void scatter_particle(ScalarField& acc, Vec2 pos, double inv_bw, double peak, double r_cut,
                      double weight) {
  const GridSpec& g = acc.spec;
  const double h = g.h();
  const int M = g.M;
  const int ix_lo = std::max(0, static_cast<int>(std::ceil((pos.x - r_cut + g.L) / h)));
  const int ix_hi = std::min(M - 1, static_cast<int>(std::floor((pos.x + r_cut + g.L) / h)));
  const int iy_lo = std::max(0, static_cast<int>(std::ceil((pos.y - r_cut + g.L) / h)));
  const int iy_hi = std::min(M - 1, static_cast<int>(std::floor((pos.y + r_cut + g.L) / h)));
  const double r_cut2 = r_cut * r_cut;
  const RadialLut& lut = mollifier_lut();
  const double scale = peak * weight;
  for (int iy = iy_lo; iy <= iy_hi; ++iy) {
    const double dy = g.coord(iy) - pos.y;
    const double dy2 = dy * dy;
    double* row = acc.v.data() + g.idx(0, iy);
    for (int ix = ix_lo; ix <= ix_hi; ++ix) {
      const double dx = g.coord(ix) - pos.x;
      const double q = dx * dx + dy2;
      if (q >= r_cut2) continue;
      row[ix] += scale * lut.value(std::sqrt(q) * inv_bw);
    }
  }
}

}  // namespace

ScalarField mollified_density(std::span<const Vec2> positions, const MollifierSpec& moll,
                              GridSpec grid, int threads) {
  grid.validate();
  if (positions.empty()) throw ConfigError("mollified_density: empty ensemble");
  for (const Vec2& p : positions) {
    if (!grid.inside(p)) {
      throw OutOfBoxError("particle at (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                          ") outside the density box");
    }
  }

  const double bw = moll.bandwidth();
  const double inv_bw = 1.0 / bw;
  const double peak = moll.peak_scale();
  const double r_cut = bw * mollifier_lut().cutoff();
  const double weight = 1.0 / static_cast<double>(positions.size());

  if (threads <= 1 || positions.size() < 64) {
    ScalarField acc(grid);
    for (const Vec2& p : positions) scatter_particle(acc, p, inv_bw, peak, r_cut, weight);
    return acc;
  }

  const int t = std::min<int>(threads, 16);
  std::vector<ScalarField> partial(t, ScalarField(grid));
  std::vector<std::thread> pool;
  const std::size_t chunk = (positions.size() + t - 1) / t;
  for (int w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(positions.size(), lo + chunk);
      for (std::size_t i = lo; i < hi; ++i) {
        scatter_particle(partial[w], positions[i], inv_bw, peak, r_cut, weight);
      }
    });
  }
  for (auto& th : pool) th.join();
  // merge in fixed worker order so the result is independent of scheduling
  ScalarField acc(grid);
  for (int w = 0; w < t; ++w) {
    for (std::size_t k = 0; k < acc.v.size(); ++k) acc.v[k] += partial[w].v[k];
  }
  return acc;
}

namespace {

inline double wavenumber(int k, int M, double L) {
  const int kt = k <= M / 2 ? k : k - M;
  return kPi / L * kt;
}

}  // namespace

VecField gradient(const ScalarField& f, GradientMethod method) {
  const int M = f.spec.M;
  VecField out(f.spec);
  if (method == GradientMethod::kCentral) {
    const double inv2h = 1.0 / (2.0 * f.spec.h());
    for (int iy = 0; iy < M; ++iy) {
      const int ym = (iy + M - 1) % M;
      const int yp = (iy + 1) % M;
      for (int ix = 0; ix < M; ++ix) {
        const int xm = (ix + M - 1) % M;
        const int xp = (ix + 1) % M;
        out.set(ix, iy,
                {(f.at(xp, iy) - f.at(xm, iy)) * inv2h, (f.at(ix, yp) - f.at(ix, ym)) * inv2h});
      }
    }
    return out;
  }

  Fft2 fft(static_cast<std::size_t>(M));
  std::vector<Cpx> hat(f.spec.nodes());
  for (std::size_t k = 0; k < hat.size(); ++k) hat[k] = f.v[k];
  fft.forward(hat);
  std::vector<Cpx> gx(hat.size());
  std::vector<Cpx> gy(hat.size());
  for (int ky = 0; ky < M; ++ky) {
    const double xy = wavenumber(ky, M, f.spec.L);
    for (int kx = 0; kx < M; ++kx) {
      const double xx = wavenumber(kx, M, f.spec.L);
      const Cpx v = hat[f.spec.idx(kx, ky)];
      // zero the Nyquist line of each odd-order derivative
      gx[f.spec.idx(kx, ky)] = (kx == M / 2) ? Cpx(0.0) : Cpx(0.0, xx) * v;
      gy[f.spec.idx(kx, ky)] = (ky == M / 2) ? Cpx(0.0) : Cpx(0.0, xy) * v;
    }
  }
  fft.inverse(gx);
  fft.inverse(gy);
  for (std::size_t k = 0; k < hat.size(); ++k) {
    out.x[k] = gx[k].real();
    out.y[k] = gy[k].real();
  }
  return out;
}

ScalarField shift_field(const ScalarField& f, Vec2 a, ShiftMethod method) {
  const double limit = 0.25 * f.spec.L;
  if (std::fabs(a.x) > limit || std::fabs(a.y) > limit) {
    throw NumericalError("excessive shift |a| > L/4");
  }
  const int M = f.spec.M;
  ScalarField out(f.spec);

  if (method == ShiftMethod::kBilinear) {
    const double h = f.spec.h();
    for (int iy = 0; iy < M; ++iy) {
      for (int ix = 0; ix < M; ++ix) {
        // sample position x - a in index space, clamped to the node range
        const double sx = std::clamp((f.spec.coord(ix) - a.x + f.spec.L) / h, 0.0, double(M - 1));
        const double sy = std::clamp((f.spec.coord(iy) - a.y + f.spec.L) / h, 0.0, double(M - 1));
        const int jx = std::min(M - 2, static_cast<int>(std::floor(sx)));
        const int jy = std::min(M - 2, static_cast<int>(std::floor(sy)));
        const double tx = sx - jx;
        const double ty = sy - jy;
        out.at(ix, iy) = (1.0 - tx) * (1.0 - ty) * f.at(jx, jy) + tx * (1.0 - ty) * f.at(jx + 1, jy) +
                         (1.0 - tx) * ty * f.at(jx, jy + 1) + tx * ty * f.at(jx + 1, jy + 1);
      }
    }
    return out;
  }

  Fft2 fft(static_cast<std::size_t>(M));
  std::vector<Cpx> hat(f.spec.nodes());
  for (std::size_t k = 0; k < hat.size(); ++k) hat[k] = f.v[k];
  fft.forward(hat);
  for (int ky = 0; ky < M; ++ky) {
    const double xy = wavenumber(ky, M, f.spec.L);
    for (int kx = 0; kx < M; ++kx) {
      const double xx = wavenumber(kx, M, f.spec.L);
      const double phase = -(xx * a.x + xy * a.y);
      hat[f.spec.idx(kx, ky)] *= Cpx(std::cos(phase), std::sin(phase));
    }
  }
  fft.inverse(hat);
  for (std::size_t k = 0; k < hat.size(); ++k) out.v[k] = hat[k].real();
  return out;
}

Vec2 field_mean(const ScalarField& f) {
  double sx = 0.0, sy = 0.0, s = 0.0;
  for (int iy = 0; iy < f.spec.M; ++iy) {
    for (int ix = 0; ix < f.spec.M; ++ix) {
      const double v = f.at(ix, iy);
      s += v;
      sx += v * f.spec.coord(ix);
      sy += v * f.spec.coord(iy);
    }
  }
  if (s <= 0.0) throw NumericalError("field_mean of a nonpositive field");
  return {sx / s, sy / s};
}

GridSampler::GridSampler(const ScalarField& f) : spec_(f.spec) {
  cdf_.resize(f.v.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < f.v.size(); ++k) {
    acc += std::max(0.0, f.v[k]);
    cdf_[k] = acc;
  }
  if (acc <= 0.0) throw NumericalError("GridSampler needs positive total mass");
  for (double& c : cdf_) c /= acc;
}

Vec2 GridSampler::sample(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t k = static_cast<std::size_t>(it - cdf_.begin());
  if (k >= cdf_.size()) k = cdf_.size() - 1;
  const int ix = static_cast<int>(k % spec_.M);
  const int iy = static_cast<int>(k / spec_.M);
  const double h = spec_.h();
  return {spec_.coord(ix) + (rng.uniform() - 0.5) * h, spec_.coord(iy) + (rng.uniform() - 0.5) * h};
}

}  // namespace vortex
