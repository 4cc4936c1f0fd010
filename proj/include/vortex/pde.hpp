#ifndef VORTEX_PDE_HPP
#define VORTEX_PDE_HPP

#include <string>
#include <vector>

#include "vortex/grid.hpp"
#include "vortex/particles.hpp"

namespace vortex {

/// Deterministic vorticity solution plus the common-noise shift path. The
/// stochastic solution is never discretized directly: it is the shift of the
/// deterministic one, rho(t, x) = rho_tilde(t, x - X_t) with dX_t = sigma dB.
struct LimitSolution {
  GridSpec spec;
  std::vector<double> times;
  std::vector<ScalarField> snapshots;  // deterministic rho_tilde
  std::vector<Vec2> shift;             // X_t at snapshot times; empty = zero

  Vec2 shift_at(std::size_t k) const {
    return shift.empty() ? Vec2{0.0, 0.0} : shift[k];
  }
};

struct PdeOptions {
  double cfl_limit{0.5};
  double negative_floor_rel{1e-6};  // tolerated undershoot relative to max
  bool dealias{true};
};

/// Pseudo-spectral solve of d_t rho = Lap rho - div(rho (K*rho)) on the
/// periodicized box: exact integrating-factor diffusion, RK2 (Heun)
/// transport, 2/3-rule dealiasing, mean mode untouched so mass is conserved
/// to roundoff. Snapshots at `snapshots` uniform times including 0 and T.
/// Throws NumericalError on CFL violation or negativity beyond tolerance.
LimitSolution solve_vorticity(const ScalarField& rho0, double T, double dt, int snapshots,
                              const PdeOptions& opts = {});

/// Integrates the recorded common increments: X_t = sum sigma(t_j) dB_j.
/// Returns the path at step resolution, X_0 = 0, length increments+1.
std::vector<Vec2> shift_path_from_increments(const std::vector<Vec2>& increments,
                                             const SigmaSchedule& sigma, double dt);

/// Subsamples a step-resolution path at `count` uniform snapshot indices.
std::vector<Vec2> subsample_path(const std::vector<Vec2>& path, int count);

/// Attaches a shift path (one entry per snapshot).
void attach_shift(LimitSolution& sol, std::vector<Vec2> shift_at_snapshots);

/// rho(t, .) = rho_tilde(t, . - X_t) via Fourier phase shift.
ScalarField shifted_solution(const LimitSolution& sol, std::size_t snapshot_index);

/// Empirical constants of the decay bounds on one snapshot, restricted to
/// nodes with rho > 1e-12: smallest C with |grad ln rho|^2 <= C(1+|y|^2),
/// |hess ln rho| <= C(1+|y|^2), plus the worst ratio against the Gaussian
/// envelope 2 exp(-2pi |y|^2). Evaluated in the deterministic frame, which
/// the spatially constant shift makes equivalent to the shifted one.
struct DecayReport {
  double c1{0.0};
  double c2{0.0};
  double gauss_ratio{0.0};  // max rho / (2 exp(-2pi |y|^2)) over the region
  bool gauss_bound_holds{false};
};
DecayReport check_decay_bounds(const LimitSolution& sol, std::size_t snapshot_index,
                               double positivity_floor = 1e-12);

/// Literal node check of the Gaussian bound on the shifted field:
/// rho(t, x) <= 2 exp(-2pi |x - X_t|^2) wherever rho > floor.
bool shifted_gauss_bound_holds(const LimitSolution& sol, std::size_t snapshot_index,
                               double positivity_floor = 1e-12, double* worst_ratio = nullptr);

/// Decay-horizon threshold exposed as configuration: T1(c3) = min(c3/8,
/// 8(1 - 2 pi c3) / (2 pi)); positive only for c3 < 1/(2 pi).
double decay_time_horizon(double c3_tilde);

/// Writes snapshots as binary fields plus a JSON manifest listing
/// (t, filename, shift).
void write_solution(const std::string& dir, const LimitSolution& sol);

}  // namespace vortex

#endif
