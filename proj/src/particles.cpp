#include "vortex/particles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include "vortex/fft.hpp"
#include "vortex/fields.hpp"

namespace vortex {

std::vector<Vec2> ParticleEnsemble::positions() const {
  std::vector<Vec2> out(core.size());
  for (std::size_t i = 0; i < core.size(); ++i) out[i] = core[i] + common_offset;
  return out;
}

bool ParticleEnsemble::finite() const {
  if (!common_offset.finite()) return false;
  for (const Vec2& p : core) {
    if (!p.finite()) return false;
  }
  return true;
}

Mat2 SigmaSchedule::value(double) const {
  switch (kind) {
    case Kind::kZero:
      return Mat2::zero();
    case Kind::kIdentity:
      return Mat2::identity();
    case Kind::kScalar:
      return Mat2::scalar(scale);
    case Kind::kMatrix:
      return matrix;
  }
  return Mat2::zero();
}

double SigmaSchedule::sup_norm() const {
  const Mat2 m = value(0.0);
  if (!m.finite()) throw AssumptionError("sigma schedule is not bounded");
  return m.max_abs_entry();
}

void GaussianMixture::validate() const {
  if (components.empty()) throw ConfigError("initial density has no components");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) throw ConfigError("initial density weights must be positive");
    // point-mass limits are outside W^{2,inf}
    if (!(c.variance >= 1e-8)) {
      throw AssumptionError("initial density component degenerates to a point mass");
    }
    total += c.weight;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw ConfigError("initial density weights must sum to 1");
}

double GaussianMixture::pdf(Vec2 x) const {
  double p = 0.0;
  for (const auto& c : components) {
    const double q = (x - c.center).norm2() / (2.0 * c.variance);
    p += c.weight / (kTwoPi * c.variance) * std::exp(-q);
  }
  return p;
}

Vec2 GaussianMixture::sample(Rng& rng) const {
  double u = rng.uniform();
  const Component* pick = &components.back();
  for (const auto& c : components) {
    if (u < c.weight) {
      pick = &c;
      break;
    }
    u -= c.weight;
  }
  // inverse-CDF per coordinate: exact for isotropic Gaussian components
  const double sd = std::sqrt(pick->variance);
  const double gx = inverse_normal_cdf(rng.uniform());
  const double gy = inverse_normal_cdf(rng.uniform());
  return pick->center + Vec2{sd * gx, sd * gy};
}

ScalarField GaussianMixture::rasterize(GridSpec grid) const {
  validate();
  ScalarField f(grid);
  for (int iy = 0; iy < grid.M; ++iy) {
    for (int ix = 0; ix < grid.M; ++ix) {
      f.at(ix, iy) = pdf({grid.coord(ix), grid.coord(iy)});
    }
  }
  return f;
}

double GaussianMixture::gaussian_tail_constant() const {
  // single centered component: c3 = max(peak constraint, decay constraint)
  double c3 = 0.0;
  for (const auto& c : components) {
    c3 = std::max(c3, std::max(1.0 / (kTwoPi * c.variance), 2.0 * c.variance));
  }
  return c3;
}

ScalarField rasterize_tail_envelope(double c3, GridSpec grid) {
  if (!(c3 > 0.0)) throw ConfigError("tail envelope constant must be positive");
  ScalarField f(grid);
  for (int iy = 0; iy < grid.M; ++iy) {
    for (int ix = 0; ix < grid.M; ++ix) {
      const Vec2 x{grid.coord(ix), grid.coord(iy)};
      f.at(ix, iy) = c3 * std::exp(-x.norm2() / c3);
    }
  }
  return f;
}

ParticleEnsemble sample_initial(std::size_t n, const GaussianMixture& rho0, Rng& rng) {
  if (n < 1) throw ConfigError("sample_initial: need n >= 1");
  rho0.validate();
  ParticleEnsemble ens;
  ens.core.resize(n);
  for (std::size_t i = 0; i < n; ++i) ens.core[i] = rho0.sample(rng);
  return ens;
}

ParticleEnsemble sample_initial(std::size_t n, const ScalarField& rho0, Rng& rng) {
  if (n < 1) throw ConfigError("sample_initial: need n >= 1");
  const double mass = rho0.mass();
  if (std::fabs(mass - 1.0) > 1e-3) {
    throw ConfigError("sample_initial: grid density mass " + std::to_string(mass) +
                      " is not normalized");
  }
  if (rho0.min_value() < -1e-12 * rho0.max_value()) {
    throw ConfigError("sample_initial: grid density has negative values");
  }

  // moments for the Gaussian envelope
  const Vec2 mu = field_mean(rho0);
  double vx = 0.0, vy = 0.0;
  const double cell = rho0.spec.h() * rho0.spec.h();
  for (int iy = 0; iy < rho0.spec.M; ++iy) {
    for (int ix = 0; ix < rho0.spec.M; ++ix) {
      const double w = std::max(0.0, rho0.at(ix, iy)) * cell;
      const double dx = rho0.spec.coord(ix) - mu.x;
      const double dy = rho0.spec.coord(iy) - mu.y;
      vx += w * dx * dx;
      vy += w * dy * dy;
    }
  }
  const double h = rho0.spec.h();
  if (vx < 4.0 * h * h || vy < 4.0 * h * h) {
    throw AssumptionError("sample_initial: grid density too concentrated for the grid");
  }
  const double env_var = 1.5 * std::max(vx, vy);
  GaussianMixture envelope{{{1.0, env_var, mu}}};

  // rejection constant from the node-wise ratio, with a safety margin
  double ratio = 0.0;
  for (int iy = 0; iy < rho0.spec.M; ++iy) {
    for (int ix = 0; ix < rho0.spec.M; ++ix) {
      const Vec2 x{rho0.spec.coord(ix), rho0.spec.coord(iy)};
      const double e = envelope.pdf(x);
      if (e > 0.0) ratio = std::max(ratio, rho0.at(ix, iy) / e);
    }
  }
  const double accept_scale = 1.05 * ratio;

  auto bilinear = [&rho0](Vec2 p) -> double {
    const GridSpec& g = rho0.spec;
    const double sx = (p.x + g.L) / g.h();
    const double sy = (p.y + g.L) / g.h();
    if (sx < 0.0 || sy < 0.0 || sx > g.M - 1 || sy > g.M - 1) return 0.0;
    const int jx = std::min(g.M - 2, static_cast<int>(sx));
    const int jy = std::min(g.M - 2, static_cast<int>(sy));
    const double tx = sx - jx;
    const double ty = sy - jy;
    return (1.0 - tx) * (1.0 - ty) * rho0.at(jx, jy) + tx * (1.0 - ty) * rho0.at(jx + 1, jy) +
           (1.0 - tx) * ty * rho0.at(jx, jy + 1) + tx * ty * rho0.at(jx + 1, jy + 1);
  };

  ParticleEnsemble ens;
  ens.core.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 100000) throw NumericalError("sample_initial: rejection sampling stalled");
      const Vec2 cand = envelope.sample(rng);
      const double e = envelope.pdf(cand);
      if (rng.uniform() * accept_scale * e <= std::max(0.0, bilinear(cand))) {
        ens.core[i] = cand;
        break;
      }
    }
  }
  return ens;
}

Vec2 drift(const ParticleEnsemble& ens, const KernelTable& table, std::size_t i) {
  const std::size_t n = ens.size();
  Vec2 acc{0.0, 0.0};
  const Vec2 xi = ens.core[i];
  for (std::size_t k = 0; k < n; ++k) {
    acc += interpolate(table, xi - ens.core[k]);
  }
  return acc * (1.0 / static_cast<double>(n));
}

namespace {

std::vector<Vec2> drift_direct(const ParticleEnsemble& ens, const KernelTable& table,
                               int threads) {
  const std::size_t n = ens.size();
  std::vector<Vec2> out(n);
  auto worker = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) out[i] = drift(ens, table, i);
  };
  if (threads <= 1 || n < 128) {
    worker(0, n);
  } else {
    const int t = std::min<int>(threads, 16);
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + t - 1) / t;
    for (int w = 0; w < t; ++w) {
      pool.emplace_back(worker, std::min<std::size_t>(w * chunk, n),
                        std::min<std::size_t>((w + 1) * chunk, n));
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

// CIC transfer function per axis in DFT index convention.
inline double cic_transfer(int k, int M) {
  const int kt = k <= M / 2 ? k : k - M;
  if (kt == 0) return 1.0;
  const double a = kPi * kt / M;
  const double s = std::sin(a) / a;
  return s * s;
}

std::vector<Vec2> drift_mesh(const ParticleEnsemble& ens, const KernelTable& table) {
  const GridSpec& g = table.spec;
  const int M = g.M;
  const double h = g.h();
  const std::size_t n = ens.size();
  const double w_particle = 1.0 / (static_cast<double>(n) * h * h);  // unit total mass

  // CIC scatter of the point cloud onto the table grid
  std::vector<Cpx> dens(g.nodes(), Cpx(0.0, 0.0));
  for (const Vec2& p : ens.core) {
    const double sx = p.x / h + M / 2;
    const double sy = p.y / h + M / 2;
    const int jx = static_cast<int>(std::floor(sx));
    const int jy = static_cast<int>(std::floor(sy));
    if (jx < 0 || jy < 0 || jx + 1 >= M || jy + 1 >= M) {
      throw OutOfBoxError("particle-mesh scatter outside the table box");
    }
    const double tx = sx - jx;
    const double ty = sy - jy;
    dens[g.idx(jx, jy)] += w_particle * (1.0 - tx) * (1.0 - ty);
    dens[g.idx(jx + 1, jy)] += w_particle * tx * (1.0 - ty);
    dens[g.idx(jx, jy + 1)] += w_particle * (1.0 - tx) * ty;
    dens[g.idx(jx + 1, jy + 1)] += w_particle * tx * ty;
  }

  Fft2 fft(static_cast<std::size_t>(M));
  fft.forward(dens);

  // velocity_mode is the raw DFT of the sampled interaction kernel, so the
  // node velocities are IDFT(mode * DFT(dens)) * h^2, deconvolved once for
  // scatter and once for gather CIC smoothing.
  std::vector<Cpx> ux(g.nodes()), uy(g.nodes());
  const double cell = h * h;
  for (int ky = 0; ky < M; ++ky) {
    for (int kx = 0; kx < M; ++kx) {
      const std::size_t kidx = g.idx(kx, ky);
      const VelocityMode mode = velocity_mode(table, kx, ky);
      const double w = cic_transfer(kx, M) * cic_transfer(ky, M);
      const Cpx d = dens[kidx] * (cell / (w * w));
      ux[kidx] = mode.ux() * d;
      uy[kidx] = mode.uy() * d;
    }
  }
  fft.inverse(ux);
  fft.inverse(uy);

  // gather with CIC
  std::vector<Vec2> out(n);
  Vec2 mean{0.0, 0.0};
  for (const Vec2& p : ens.core) mean += p;
  mean = mean * (1.0 / static_cast<double>(n));
  const double area = (2.0 * g.L) * (2.0 * g.L);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = ens.core[i];
    const double sx = p.x / h + M / 2;
    const double sy = p.y / h + M / 2;
    const int jx = static_cast<int>(std::floor(sx));
    const int jy = static_cast<int>(std::floor(sy));
    const double tx = sx - jx;
    const double ty = sy - jy;
    auto val = [&](const std::vector<Cpx>& f) {
      return (1.0 - tx) * (1.0 - ty) * f[g.idx(jx, jy)].real() +
             tx * (1.0 - ty) * f[g.idx(jx + 1, jy)].real() +
             (1.0 - tx) * ty * f[g.idx(jx, jy + 1)].real() +
             tx * ty * f[g.idx(jx + 1, jy + 1)].real();
    };
    Vec2 u{val(ux), val(uy)};
    // remove the mean-free periodic background: the zero-mode fix acts like
    // a uniform counter-vorticity -1/area inducing a solid-body rotation
    u += (p - mean).perp() * (1.0 / (2.0 * area));
    out[i] = u;
  }
  return out;
}

}  // namespace

std::vector<Vec2> drift_all(const ParticleEnsemble& ens, const KernelTable& table, DriftMode mode,
                            int threads) {
  if (mode == DriftMode::kParticleMesh) return drift_mesh(ens, table);
  return drift_direct(ens, table, threads);
}

void step_em(ParticleEnsemble& ens, const KernelTable& table, const NoiseConfig& noise,
             std::vector<Rng>& w_streams, Rng& b_stream, std::vector<Vec2>& common_increments,
             DriftMode mode, int threads) {
  const std::size_t n = ens.size();
  if (w_streams.size() != n) throw ConfigError("step_em: need one noise stream per particle");
  const double dt = noise.dt;
  const double root_dt = std::sqrt(dt);
  const double root2 = std::sqrt(2.0);

  const std::vector<Vec2> d = drift_all(ens, table, mode, threads);

  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 dw = w_streams[i].normal_vec2() * root_dt;
    ens.core[i] += d[i] * dt + dw * root2;
  }

  // the shared increment is always drawn and recorded, so runs that differ
  // only in sigma consume identical streams
  const Vec2 db = b_stream.normal_vec2() * root_dt;
  common_increments.push_back(db);
  ens.common_offset += noise.sigma.value(ens.t).apply(db);
  ens.t += dt;
}

SimulationResult simulate(ParticleEnsemble ens, const KernelTable& table, NoiseConfig noise,
                          const SimulationPlan& plan,
                          std::vector<std::vector<Vec2>>* full_trajectory) {
  if (!(plan.T > 0.0) || !(noise.dt > 0.0)) throw ConfigError("simulate: T and dt must be positive");
  if (plan.snapshots < 2) throw ConfigError("simulate: need at least 2 snapshots");
  (void)noise.sigma.sup_norm();  // boundedness gate

  // snap dt so snapshots land exactly on steps
  const int intervals = plan.snapshots - 1;
  const std::int64_t per_interval =
      std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(plan.T / intervals / noise.dt - 1e-12)));
  const std::int64_t steps = per_interval * intervals;
  const double dt = plan.T / static_cast<double>(steps);
  noise.dt = dt;

  if (!noise.stream_ids.empty() && noise.stream_ids.size() != ens.size()) {
    throw ConfigError("simulate: stream_ids size mismatch");
  }
  std::vector<Rng> w_streams;
  w_streams.reserve(ens.size());
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const std::uint64_t sid = noise.stream_ids.empty() ? i : noise.stream_ids[i];
    w_streams.emplace_back(noise.master_seed,
                           static_cast<std::uint64_t>(StreamPurpose::kIndividualNoise),
                           (noise.run_index << 24) ^ sid);
  }
  Rng b_stream(noise.master_seed, static_cast<std::uint64_t>(StreamPurpose::kCommonNoise),
               noise.run_index);

  SimulationResult res;
  res.dt = dt;
  res.exit.radius = plan.exit_radius;
  res.exit.tau = plan.T;
  res.exit.exited = false;

  auto out_of_ball = [&](const ParticleEnsemble& e) {
    if (plan.exit_radius <= 0.0) return false;
    const double r2 = plan.exit_radius * plan.exit_radius;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e.position(i).norm2() >= r2) return true;
    }
    return false;
  };

  auto record_snapshot = [&](const ParticleEnsemble& e) {
    res.snap_times.push_back(e.t);
    res.snap_positions.push_back(e.positions());
    res.snap_shift.push_back(e.common_offset);
  };

  bool fired = out_of_ball(ens);
  if (fired) res.exit = {0.0, plan.exit_radius, true};
  record_snapshot(ens);  // t = 0 is always part of the trace
  if (full_trajectory) full_trajectory->push_back(ens.positions());

  for (std::int64_t step = 0; step < steps && !fired; ++step) {
    step_em(ens, table, noise, w_streams, b_stream, res.common_increments, plan.mode,
            plan.threads);
    if (!ens.finite()) throw NumericalError("simulate: non-finite particle state");
    if (full_trajectory) full_trajectory->push_back(ens.positions());
    if (out_of_ball(ens)) {
      fired = true;
      res.exit = {ens.t, plan.exit_radius, true};
      // the state at tau still belongs to the trace
    }
    if ((step + 1) % per_interval == 0) record_snapshot(ens);
  }
  return res;
}

ExitRecord exit_time(const std::vector<std::vector<Vec2>>& trajectory, double dt, double beta,
                     std::int64_t n_for_radius, double T) {
  if (trajectory.empty()) throw ConfigError("exit_time: empty trajectory");
  const double radius = std::pow(static_cast<double>(n_for_radius), beta);
  const double r2 = radius * radius;
  for (std::size_t s = 0; s < trajectory.size(); ++s) {
    for (const Vec2& p : trajectory[s]) {
      if (p.norm2() >= r2) return {std::min(T, s * dt), radius, true};
    }
  }
  return {T, radius, false};
}

void write_trajectory(const std::string& path, double dt, const std::vector<double>& times,
                      const std::vector<std::vector<Vec2>>& positions) {
  if (times.size() != positions.size()) throw ConfigError("write_trajectory: size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path);
  const std::uint32_t magic = 0x4a525456;  // "VTRJ"
  const std::uint32_t version = 1;
  const std::uint64_t n = positions.empty() ? 0 : positions.front().size();
  const std::uint64_t records = positions.size();
  out.write(reinterpret_cast<const char*>(&magic), 4);
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(&dt), 8);
  out.write(reinterpret_cast<const char*>(&records), 8);
  for (std::size_t s = 0; s < positions.size(); ++s) {
    if (positions[s].size() != n) throw ConfigError("write_trajectory: ragged records");
    out.write(reinterpret_cast<const char*>(&times[s]), 8);
    out.write(reinterpret_cast<const char*>(positions[s].data()),
              static_cast<std::streamsize>(n * sizeof(Vec2)));
  }
  if (!out) throw IoError("short write to " + path);
}

std::pair<std::vector<double>, std::vector<std::vector<Vec2>>> read_trajectory(
    const std::string& path, double& dt_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::uint32_t magic = 0, version = 0;
  std::uint64_t n = 0, records = 0;
  in.read(reinterpret_cast<char*>(&magic), 4);
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&n), 8);
  in.read(reinterpret_cast<char*>(&dt_out), 8);
  in.read(reinterpret_cast<char*>(&records), 8);
  if (!in || magic != 0x4a525456) throw IoError("not a trajectory file: " + path);
  std::vector<double> times(records);
  std::vector<std::vector<Vec2>> positions(records, std::vector<Vec2>(n));
  for (std::size_t s = 0; s < records; ++s) {
    in.read(reinterpret_cast<char*>(&times[s]), 8);
    in.read(reinterpret_cast<char*>(positions[s].data()),
            static_cast<std::streamsize>(n * sizeof(Vec2)));
  }
  if (!in) throw IoError("short read from " + path);
  return {std::move(times), std::move(positions)};
}

}  // namespace vortex
