#ifndef VORTEX_PARTICLES_HPP
#define VORTEX_PARTICLES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "vortex/density.hpp"
#include "vortex/kernels.hpp"
#include "vortex/rng.hpp"

namespace vortex {

/// N interacting particles. Positions are stored as core + common_offset,
/// where the offset accumulates the shared noise sigma_t dB_t. The drift
/// depends on pairwise differences only, so the core evolution is bitwise
/// identical across runs that differ only in sigma; the decomposition makes
/// the common-noise cancellation exact rather than approximate.
struct ParticleEnsemble {
  std::vector<Vec2> core;
  Vec2 common_offset{0.0, 0.0};
  double t{0.0};

  std::size_t size() const { return core.size(); }
  Vec2 position(std::size_t i) const { return core[i] + common_offset; }
  std::vector<Vec2> positions() const;
  bool finite() const;
};

/// Time-dependent diffusion coefficient of the shared noise; spatial
/// independence is enforced by the type (a function of time only).
struct SigmaSchedule {
  enum class Kind { kZero, kIdentity, kScalar, kMatrix };
  Kind kind{Kind::kZero};
  double scale{1.0};
  Mat2 matrix{};

  Mat2 value(double t) const;
  double sup_norm() const;
  static SigmaSchedule zero() { return {}; }
  static SigmaSchedule identity() { return {Kind::kIdentity, 1.0, {}}; }
  static SigmaSchedule scalar(double c) { return {Kind::kScalar, c, {}}; }
};

struct NoiseConfig {
  std::uint64_t master_seed{0};
  std::uint64_t run_index{0};
  double dt{1e-3};
  SigmaSchedule sigma{};
  /// Per-particle noise stream ids; defaults to the particle index. The
  /// exchangeability property is pathwise: permuting initial positions and
  /// stream ids together permutes the trajectories.
  std::vector<std::uint64_t> stream_ids{};
};

struct ExitRecord {
  double tau{0.0};
  double radius{0.0};
  bool exited{false};
};

/// i.i.d. draws from an analytic mixture (inverse-CDF radius free: direct
/// normal sampling per component).
ParticleEnsemble sample_initial(std::size_t n, const GaussianMixture& rho0, Rng& rng);

/// i.i.d. draws from a grid density by rejection against a fitted Gaussian
/// envelope. Rejects non-normalized or degenerate (point-mass-like) data.
ParticleEnsemble sample_initial(std::size_t n, const ScalarField& rho0, Rng& rng);

enum class DriftMode { kDirect, kParticleMesh };

/// Drift on particle i: the full average (1/n) sum_k (K*V^N)(X_i - X_k),
/// self term included (the table holds an exact zero at the origin).
Vec2 drift(const ParticleEnsemble& ens, const KernelTable& table, std::size_t i);

/// All drifts at once. The direct path is the O(n^2) reference; the
/// particle-mesh path scatters to the table grid, applies the spectral
/// multiplier with CIC deconvolution, gathers, and removes the periodic
/// image background. Bitwise deterministic for any thread count.
std::vector<Vec2> drift_all(const ParticleEnsemble& ens, const KernelTable& table,
                            DriftMode mode = DriftMode::kDirect, int threads = 1);

/// One explicit Euler-Maruyama step:
///   X <- X + drift dt + sqrt(2) dW_i + sigma_t dB,
/// with dB shared by all particles and appended to common_increments.
void step_em(ParticleEnsemble& ens, const KernelTable& table, const NoiseConfig& noise,
             std::vector<Rng>& w_streams, Rng& b_stream, std::vector<Vec2>& common_increments,
             DriftMode mode = DriftMode::kDirect, int threads = 1);

struct SimulationResult {
  double dt{0.0};
  std::vector<double> snap_times;
  std::vector<std::vector<Vec2>> snap_positions;  // absolute positions
  std::vector<Vec2> snap_shift;                   // cumulative common shift
  std::vector<Vec2> common_increments;            // dB per step, recorded
  ExitRecord exit;
};

struct SimulationPlan {
  double T{0.25};
  int snapshots{32};          // uniform snapshot count including t = 0 and T
  double exit_radius{0.0};    // 0 disables the stopping time
  DriftMode mode{DriftMode::kDirect};
  int threads{1};
  bool keep_full_trajectory{false};
};

/// Integrates the system, recording snapshots, the common-noise path and the
/// first exit from the stopping ball. The run is truncated at the stopping
/// time; snapshots with t <= tau are kept.
SimulationResult simulate(ParticleEnsemble ens, const KernelTable& table, NoiseConfig noise,
                          const SimulationPlan& plan,
                          std::vector<std::vector<Vec2>>* full_trajectory = nullptr);

/// Stopping-time scan over a step-resolution trajectory:
/// tau = inf { t : exists i, |X_i| >= N^beta } wedge T.
ExitRecord exit_time(const std::vector<std::vector<Vec2>>& trajectory, double dt, double beta,
                     std::int64_t n_for_radius, double T);

// Trajectory checkpoints: "VTRJ", version, N, dt, record count, then per
// record the time stamp and packed little-endian positions.
void write_trajectory(const std::string& path, double dt,
                      const std::vector<double>& times,
                      const std::vector<std::vector<Vec2>>& positions);
std::pair<std::vector<double>, std::vector<std::vector<Vec2>>> read_trajectory(
    const std::string& path, double& dt_out);

}  // namespace vortex

#endif
