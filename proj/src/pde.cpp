#include "vortex/pde.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "vortex/fft.hpp"
#include "vortex/fields.hpp"

namespace vortex {

namespace {

inline double wavenumber(int k, int M, double L) {
  const int kt = k <= M / 2 ? k : k - M;
  return kPi / L * kt;
}

class VorticitySolver {
 public:
  VorticitySolver(GridSpec spec, const PdeOptions& opts)
      : spec_(spec),
        opts_(opts),
        fft_(static_cast<std::size_t>(spec.M)),
        rho_hat_(spec.nodes()),
        kx_(spec.M),
        ky_(spec.M),
        mask_(spec.nodes(), 1.0) {
    const int M = spec_.M;
    for (int k = 0; k < M; ++k) {
      kx_[k] = wavenumber(k, M, spec_.L);
      ky_[k] = wavenumber(k, M, spec_.L);
    }
    if (opts_.dealias) {
      const int kmax = M / 3;  // 2/3 rule
      for (int jy = 0; jy < M; ++jy) {
        const int kty = jy <= M / 2 ? jy : jy - M;
        for (int jx = 0; jx < M; ++jx) {
          const int ktx = jx <= M / 2 ? jx : jx - M;
          if (std::abs(ktx) > kmax || std::abs(kty) > kmax) mask_[spec_.idx(jx, jy)] = 0.0;
        }
      }
    }
  }

  void load(const ScalarField& rho0) {
    for (std::size_t k = 0; k < rho_hat_.size(); ++k) rho_hat_[k] = rho0.v[k];
    fft_.forward(rho_hat_);
  }

  ScalarField current() const {
    std::vector<Cpx> tmp = rho_hat_;
    fft_.inverse(tmp);
    ScalarField f(spec_);
    for (std::size_t k = 0; k < tmp.size(); ++k) f.v[k] = tmp[k].real();
    return f;
  }

  double max_speed() const { return last_max_speed_; }

  /// One Heun step with exact diffusion factor exp(-|xi|^2 dt).
  void step(double dt) {
    ensure_exp(dt);
    std::vector<Cpx> n0 = nonlinear(rho_hat_, true);
    if (last_max_speed_ * dt > opts_.cfl_limit * spec_.h()) {
      throw NumericalError("CFL violation: max |u| dt = " +
                           std::to_string(last_max_speed_ * dt) + " exceeds " +
                           std::to_string(opts_.cfl_limit) + " h");
    }
    std::vector<Cpx> pred(rho_hat_.size());
    for (std::size_t k = 0; k < pred.size(); ++k) {
      pred[k] = exp_fac_[k] * (rho_hat_[k] + dt * n0[k]);
    }
    const std::vector<Cpx> n1 = nonlinear(pred, false);
    for (std::size_t k = 0; k < pred.size(); ++k) {
      rho_hat_[k] = exp_fac_[k] * (rho_hat_[k] + 0.5 * dt * n0[k]) + 0.5 * dt * n1[k];
    }
  }

 private:
  void ensure_exp(double dt) {
    if (dt == exp_dt_) return;
    exp_fac_.resize(spec_.nodes());
    const int M = spec_.M;
    for (int jy = 0; jy < M; ++jy) {
      for (int jx = 0; jx < M; ++jx) {
        const double k2 = kx_[jx] * kx_[jx] + ky_[jy] * ky_[jy];
        exp_fac_[spec_.idx(jx, jy)] = std::exp(-k2 * dt);
      }
    }
    exp_dt_ = dt;
  }

  // -div(rho u) in spectral space, with u = K * rho by the multiplier
  // i xi_perp / |xi|^2 (mean velocity mode removed).
  std::vector<Cpx> nonlinear(const std::vector<Cpx>& rho_hat, bool track_speed) {
    const int M = spec_.M;
    std::vector<Cpx> ux(rho_hat.size()), uy(rho_hat.size()), rho(rho_hat.size());
    for (int jy = 0; jy < M; ++jy) {
      for (int jx = 0; jx < M; ++jx) {
        const std::size_t k = spec_.idx(jx, jy);
        const Cpx r = rho_hat[k] * mask_[k];
        rho[k] = r;
        const double k2 = kx_[jx] * kx_[jx] + ky_[jy] * ky_[jy];
        if (k2 == 0.0) {
          ux[k] = uy[k] = Cpx(0.0, 0.0);
        } else {
          // uhat = -i xi_perp/|xi|^2 rhohat under the e^{-i xi x} transform
          const Cpx psi = Cpx(0.0, -1.0) * r / k2;
          ux[k] = -ky_[jy] * psi;
          uy[k] = kx_[jx] * psi;
        }
      }
    }
    fft_.inverse(ux);
    fft_.inverse(uy);
    fft_.inverse(rho);
    double vmax2 = 0.0;
    for (std::size_t k = 0; k < rho.size(); ++k) {
      const double a = ux[k].real();
      const double b = uy[k].real();
      if (track_speed) vmax2 = std::max(vmax2, a * a + b * b);
      const double r = rho[k].real();
      ux[k] = Cpx(r * a, 0.0);
      uy[k] = Cpx(r * b, 0.0);
    }
    if (track_speed) last_max_speed_ = std::sqrt(vmax2);
    fft_.forward(ux);
    fft_.forward(uy);
    std::vector<Cpx> out(rho.size());
    for (int jy = 0; jy < M; ++jy) {
      for (int jx = 0; jx < M; ++jx) {
        const std::size_t k = spec_.idx(jx, jy);
        out[k] = -Cpx(0.0, 1.0) * (kx_[jx] * ux[k] + ky_[jy] * uy[k]) * mask_[k];
      }
    }
    return out;
  }

  GridSpec spec_;
  PdeOptions opts_;
  Fft2 fft_;
  std::vector<Cpx> rho_hat_;
  std::vector<double> kx_, ky_;
  std::vector<double> mask_;
  std::vector<double> exp_fac_;
  double exp_dt_{-1.0};
  double last_max_speed_{0.0};
};

}  // namespace

LimitSolution solve_vorticity(const ScalarField& rho0, double T, double dt, int snapshots,
                              const PdeOptions& opts) {
  rho0.spec.validate();
  if (!(T > 0.0) || !(dt > 0.0)) throw ConfigError("solve_vorticity: T and dt must be positive");
  if (snapshots < 2) throw ConfigError("solve_vorticity: need at least 2 snapshots");
  if (rho0.min_value() < -1e-12 * std::max(1.0, rho0.max_value())) {
    throw ConfigError("solve_vorticity: negative initial data");
  }

  const int intervals = snapshots - 1;
  const std::int64_t per_interval =
      std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(T / intervals / dt - 1e-12)));
  const double dt_eff = T / static_cast<double>(per_interval * intervals);

  VorticitySolver solver(rho0.spec, opts);
  solver.load(rho0);

  LimitSolution sol;
  sol.spec = rho0.spec;
  sol.times.reserve(snapshots);
  sol.snapshots.reserve(snapshots);
  sol.times.push_back(0.0);
  sol.snapshots.push_back(rho0);

  const double peak0 = rho0.max_value();
  for (int s = 1; s <= intervals; ++s) {
    for (std::int64_t j = 0; j < per_interval; ++j) solver.step(dt_eff);
    ScalarField snap = solver.current();
    const double neg = snap.min_value();
    if (neg < -opts.negative_floor_rel * std::max(peak0, snap.max_value())) {
      throw NumericalError("solve_vorticity: negative density " + std::to_string(neg));
    }
    sol.times.push_back(T * s / intervals);
    sol.snapshots.push_back(std::move(snap));
  }
  return sol;
}

std::vector<Vec2> shift_path_from_increments(const std::vector<Vec2>& increments,
                                             const SigmaSchedule& sigma, double dt) {
  std::vector<Vec2> path;
  path.reserve(increments.size() + 1);
  path.push_back({0.0, 0.0});
  Vec2 acc{0.0, 0.0};
  double t = 0.0;
  for (const Vec2& db : increments) {
    acc += sigma.value(t).apply(db);
    t += dt;
    path.push_back(acc);
  }
  return path;
}

std::vector<Vec2> subsample_path(const std::vector<Vec2>& path, int count) {
  if (count < 2) throw ConfigError("subsample_path: need at least 2 snapshots");
  const std::size_t steps = path.size() - 1;
  if (steps % static_cast<std::size_t>(count - 1) != 0) {
    throw ConfigError("subsample_path: path length mismatch with snapshot count");
  }
  const std::size_t stride = steps / (count - 1);
  std::vector<Vec2> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) out.push_back(path[k * stride]);
  return out;
}

void attach_shift(LimitSolution& sol, std::vector<Vec2> shift_at_snapshots) {
  if (shift_at_snapshots.size() != sol.times.size()) {
    throw ConfigError("attach_shift: path length mismatch");
  }
  sol.shift = std::move(shift_at_snapshots);
}

ScalarField shifted_solution(const LimitSolution& sol, std::size_t k) {
  if (k >= sol.snapshots.size()) throw ConfigError("shifted_solution: snapshot out of range");
  const Vec2 a = sol.shift_at(k);
  if (a.x == 0.0 && a.y == 0.0) return sol.snapshots[k];
  return shift_field(sol.snapshots[k], a, ShiftMethod::kFourier);
}

DecayReport check_decay_bounds(const LimitSolution& sol, std::size_t k, double floor) {
  if (k >= sol.snapshots.size()) throw ConfigError("check_decay_bounds: snapshot out of range");
  const ScalarField& rho = sol.snapshots[k];
  const GridSpec& g = rho.spec;
  const VecField grad = gradient(rho, GradientMethod::kSpectral);
  const VecField grad_x = gradient([&] {
    ScalarField fx(g);
    fx.v = grad.x;
    return fx;
  }());
  const VecField grad_y = gradient([&] {
    ScalarField fy(g);
    fy.v = grad.y;
    return fy;
  }());

  DecayReport rep;
  rep.gauss_bound_holds = true;
  for (int iy = 0; iy < g.M; ++iy) {
    for (int ix = 0; ix < g.M; ++ix) {
      const std::size_t kk = g.idx(ix, iy);
      const double r = rho.v[kk];
      if (r <= floor) continue;
      const Vec2 y{g.coord(ix), g.coord(iy)};
      const double w = 1.0 + y.norm2();
      const double gx = grad.x[kk] / r;
      const double gy = grad.y[kk] / r;
      rep.c1 = std::max(rep.c1, (gx * gx + gy * gy) / w);
      // hess ln rho = hess rho / rho - (grad rho)(grad rho)^T / rho^2
      const double hxx = grad_x.x[kk] / r - gx * gx;
      const double hxy = grad_x.y[kk] / r - gx * gy;
      const double hyy = grad_y.y[kk] / r - gy * gy;
      const double frob = std::sqrt(hxx * hxx + 2.0 * hxy * hxy + hyy * hyy);
      rep.c2 = std::max(rep.c2, frob / w);
      const double envelope = 2.0 * std::exp(-kTwoPi * y.norm2());
      const double ratio = envelope > 0.0 ? r / envelope : 1e300;
      rep.gauss_ratio = std::max(rep.gauss_ratio, ratio);
    }
  }
  rep.gauss_bound_holds = rep.gauss_ratio <= 1.0;
  return rep;
}

bool shifted_gauss_bound_holds(const LimitSolution& sol, std::size_t k, double floor,
                               double* worst_ratio) {
  const ScalarField rho = shifted_solution(sol, k);
  const Vec2 shift = sol.shift_at(k);
  const GridSpec& g = rho.spec;
  double worst = 0.0;
  for (int iy = 0; iy < g.M; ++iy) {
    for (int ix = 0; ix < g.M; ++ix) {
      const double r = rho.at(ix, iy);
      if (r <= floor) continue;
      const Vec2 y = Vec2{g.coord(ix), g.coord(iy)} - shift;
      const double envelope = 2.0 * std::exp(-kTwoPi * y.norm2());
      const double ratio = envelope > 0.0 ? r / envelope : 1e300;
      worst = std::max(worst, ratio);
    }
  }
  if (worst_ratio) *worst_ratio = worst;
  return worst <= 1.0;
}

double decay_time_horizon(double c3_tilde) {
  if (!(c3_tilde > 0.0)) throw ConfigError("decay_time_horizon: c3 must be positive");
  return std::min(c3_tilde / 8.0, 8.0 * (1.0 - kTwoPi * c3_tilde) / kTwoPi);
}

void write_solution(const std::string& dir, const LimitSolution& sol) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["snapshots"] = nlohmann::json::array();
  for (std::size_t k = 0; k < sol.snapshots.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof(name), "snapshot_%04zu.vfld", k);
    write_field((fs::path(dir) / name).string(), sol.snapshots[k]);
    const Vec2 s = sol.shift_at(k);
    manifest["snapshots"].push_back(
        {{"t", sol.times[k]}, {"file", name}, {"shift", {s.x, s.y}}});
  }
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw IoError("cannot open manifest in " + dir);
  out << manifest.dump(2) << "\n";
}

}  // namespace vortex
