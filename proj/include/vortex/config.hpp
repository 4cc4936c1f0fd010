#ifndef VORTEX_CONFIG_HPP
#define VORTEX_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "vortex/density.hpp"
#include "vortex/particles.hpp"

namespace vortex {

/// Everything a run needs, file-first: flags only override these values.
struct ExperimentConfig {
  // interaction scaling
  double beta{0.2};
  double alpha{1.1};
  double delta{0.01};

  // initial data: "gaussian_mixture" or "tail_envelope"
  std::string init_type{"gaussian_mixture"};
  std::vector<GaussianMixture::Component> init_components{
      {1.0 - 1e-6, 0.2, {0.0, 0.0}},
      {1e-6, 4.0, {0.0, 0.0}},  // broad cushion keeping limit tails above the support floor
  };
  double c3_tilde{0.1};      // envelope constant for tail_envelope runs
  double c3_threshold{0.159154943091895};  // admissibility threshold, default 1/(2 pi)

  // density / entropy grid and interaction table grid
  double grid_L{6.0};
  int grid_M{256};
  double table_L{16.0};
  int table_M{512};
  double table_tail_tol{1e-10};

  // dynamics
  double T{0.25};
  double dt_sde{1e-3};
  double dt_pde{1e-3};
  int snapshots{32};
  std::string sigma_type{"zero"};  // zero | identity | scalar
  double sigma_scale{1.0};
  std::string drift_mode{"direct"};  // direct | mesh

  // sweep
  std::vector<std::int64_t> Ns{250, 500, 1000, 2000, 4000};
  int seeds{8};
  std::uint64_t master_seed{12345};

  // distance bracket
  int kr_samples{256};
  int kr_reps{1};

  // gates
  double boundary_mass_tol{1e-8};
  double density_mass_tol{1e-3};
  int min_cells_per_bandwidth{6};

  int workers{0};  // 0 = hardware concurrency
  std::string out_dir{"out"};

  GaussianMixture mixture() const;
  SigmaSchedule sigma() const;
  DriftMode drift() const;
  GridSpec grid() const { return {grid_L, grid_M}; }
  /// Initial density rasterized on the entropy grid.
  ScalarField initial_field() const;
  bool initial_is_probability() const { return init_type == "gaussian_mixture"; }
};

std::string serialize_config(const ExperimentConfig& cfg);
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
void save_config(const std::string& path, const ExperimentConfig& cfg);

struct ValidationCheck {
  std::string name;
  bool pass{false};
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_pass() const;
};

/// Runs every module's preconditions against the config: mollifier
/// assumption constants, kernel bound, beta admissibility and positive rate
/// exponent, grid resolution and stopping-radius coverage, table tail mass,
/// sigma boundedness, seed count, sampler limits.
ValidationReport validate_config(const ExperimentConfig& cfg);

}  // namespace vortex

#endif
