// vortexlab: experiments on the 2D stochastic vortex model under moderate
// interaction. Subcommands bind the config file to the solver, the particle
// system, the paired entropy diagnostics and the rate sweep.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vortex/config.hpp"
#include "vortex/fields.hpp"
#include "vortex/harness.hpp"
#include "vortex/kernels.hpp"
#include "vortex/pde.hpp"

namespace fs = std::filesystem;
using namespace vortex;

namespace {

// stable exit codes, documented in the README
constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kAssumptionError = 3;
constexpr int kNumericalError = 4;
constexpr int kIoError = 5;

int run_guarded(const std::function<void()>& body) {
  try {
    body();
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kConfigError;
  } catch (const AssumptionError& e) {
    std::cerr << e.what() << "\n";
    return kAssumptionError;
  } catch (const IoError& e) {
    std::cerr << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kNumericalError;
  }
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed{0};
  bool seed_set{false};
  int workers{-1};
};

ExperimentConfig resolve_config(const CommonFlags& flags) {
  ExperimentConfig cfg;
  if (!flags.config_path.empty()) cfg = load_config(flags.config_path);
  if (flags.seed_set) cfg.master_seed = flags.seed;
  if (flags.workers >= 0) cfg.workers = flags.workers;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  return cfg;
}

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "config file (JSON key-value tree)");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--seed", flags.seed, "master seed override")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--workers", flags.workers, "worker threads (0 = hardware)");
}

void echo_inputs(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  save_config((fs::path(cfg.out_dir) / "config.json").string(), cfg);
}

void cmd_validate(const ExperimentConfig& cfg) {
  const ValidationReport rep = validate_config(cfg);
  for (const auto& c : rep.checks) {
    std::printf("[%s] %-32s %s\n", c.pass ? "pass" : "FAIL", c.name.c_str(), c.detail.c_str());
  }
  if (!rep.all_pass()) throw ConfigError("validation failed");
}

void cmd_solve_pde(const ExperimentConfig& cfg) {
  echo_inputs(cfg);
  const ScalarField rho0 = cfg.initial_field();
  LimitSolution sol = solve_vorticity(rho0, cfg.T, cfg.dt_pde, cfg.snapshots);
  // attach the shift driven by this config's common-noise stream
  Rng b(cfg.master_seed, static_cast<std::uint64_t>(StreamPurpose::kCommonNoise), 0);
  const int intervals = cfg.snapshots - 1;
  const std::int64_t per_interval = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(cfg.T / intervals / cfg.dt_sde - 1e-12)));
  const std::int64_t steps = per_interval * intervals;
  const double dt = cfg.T / static_cast<double>(steps);
  std::vector<Vec2> incr(steps);
  for (auto& d : incr) d = b.normal_vec2() * std::sqrt(dt);
  const auto path = shift_path_from_increments(incr, cfg.sigma(), dt);
  attach_shift(sol, subsample_path(path, cfg.snapshots));
  write_solution(cfg.out_dir, sol);
  std::printf("wrote %zu snapshots to %s\n", sol.snapshots.size(), cfg.out_dir.c_str());
}

void cmd_simulate(const ExperimentConfig& cfg) {
  echo_inputs(cfg);
  const std::int64_t n = cfg.Ns.empty() ? 1000 : cfg.Ns.front();
  const auto moll = make_mollifier_spec(cfg.beta, cfg.alpha, n);
  const KernelTable table =
      build_interaction_table(moll, cfg.table_L, cfg.table_M, cfg.table_tail_tol);
  Rng init_rng(cfg.master_seed, static_cast<std::uint64_t>(StreamPurpose::kInitialSample), 0);
  ParticleEnsemble ens = sample_initial(static_cast<std::size_t>(n), cfg.mixture(), init_rng);
  NoiseConfig noise;
  noise.master_seed = cfg.master_seed;
  noise.dt = cfg.dt_sde;
  noise.sigma = cfg.sigma();
  SimulationPlan plan;
  plan.T = cfg.T;
  plan.snapshots = cfg.snapshots;
  plan.exit_radius = std::pow(static_cast<double>(n), cfg.beta);
  plan.mode = cfg.drift();
  plan.threads = cfg.workers > 0 ? cfg.workers : 2;
  const SimulationResult sim = simulate(std::move(ens), table, noise, plan);
  write_trajectory((fs::path(cfg.out_dir) / "trajectory.vtrj").string(), sim.dt, sim.snap_times,
                   sim.snap_positions);
  nlohmann::json j = {{"N", n},
                      {"tau", sim.exit.tau},
                      {"radius", sim.exit.radius},
                      {"exited", sim.exit.exited},
                      {"snapshots", sim.snap_times.size()}};
  std::ofstream out(fs::path(cfg.out_dir) / "exit.json");
  out << j.dump(2) << "\n";
  std::printf("simulated N=%lld to t=%g (exited=%d)\n", static_cast<long long>(n),
              sim.snap_times.back(), sim.exit.exited ? 1 : 0);
}

void cmd_entropy(const ExperimentConfig& cfg) {
  echo_inputs(cfg);
  SweepContext ctx(cfg);
  const std::int64_t n = cfg.Ns.empty() ? 1000 : cfg.Ns.front();
  const PairedRunResult res = paired_run(ctx, n, 0, cfg.workers > 0 ? cfg.workers : 2);
  res.trace.write_csv((fs::path(cfg.out_dir) / "entropy_trace.csv").string());
  nlohmann::json j = {{"N", n},
                      {"sup_H", res.sup_entropy},
                      {"tau", res.exit.tau},
                      {"exited", res.exit.exited},
                      {"violations", res.trace.violations}};
  std::ofstream out(fs::path(cfg.out_dir) / "entropy_summary.json");
  out << j.dump(2) << "\n";
  std::printf("paired run N=%lld: sup H = %.6g over %zu snapshots\n", static_cast<long long>(n),
              res.sup_entropy, res.trace.size());
}

void cmd_rate_sweep(const ExperimentConfig& cfg) {
  echo_inputs(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const RateReport rep = rate_sweep(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_rate_report(cfg.out_dir, rep, cfg);
  std::printf("rate sweep done in %.1f s: slope %.4f (95%% CI [%.4f, %.4f]), theta target %.4f\n",
              secs, rep.slope, rep.slope_ci_low, rep.slope_ci_high, rep.targets.theta);
  for (std::size_t i = 0; i < rep.ns.size(); ++i) {
    std::printf("  N=%6lld  median sup H = %.6g  exit fraction = %.3f\n",
                static_cast<long long>(rep.ns[i]), rep.median_sup_entropy[i],
                rep.exit_fraction[i]);
  }
}

void cmd_kernels_selftest(const ExperimentConfig& cfg) {
  Rng rng(cfg.master_seed, 13, 1);
  double worst_odd = 0.0, worst_mag = 0.0, worst_k0 = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const Vec2 x{(rng.uniform() - 0.5) * 10.0, (rng.uniform() - 0.5) * 10.0};
    if (x.norm2() == 0.0) continue;
    const Vec2 kx = biot_savart(x);
    const Vec2 kneg = biot_savart(-x);
    worst_odd = std::max(worst_odd, (kx + kneg).norm());
    worst_mag = std::max(worst_mag, std::fabs(kx.norm() * x.norm() - 1.0 / kTwoPi));
    if (x.y != 0.0) worst_k0 = std::max(worst_k0, biot_savart_antiderivative(x).max_abs_entry());
  }
  std::printf("biot-savart oddness residual: %.3e\n", worst_odd);
  std::printf("magnitude law residual:       %.3e\n", worst_mag);
  std::printf("antiderivative bound:         %.6f (<= 0.25)\n", worst_k0);

  const std::int64_t n = cfg.Ns.empty() ? 1000 : cfg.Ns.front();
  const auto moll = make_mollifier_spec(cfg.beta, cfg.alpha, n);
  const KernelTable table =
      build_interaction_table(moll, cfg.table_L, cfg.table_M, cfg.table_tail_tol);
  const Vec2 origin = table.values.at(cfg.table_M / 2, cfg.table_M / 2);
  std::printf("table origin value:           (%g, %g)\n", origin.x, origin.y);
  std::printf("max spectral mode divergence: %.3e\n", max_mode_divergence(table));
  const auto av = check_mollifier_assumption(cfg.alpha);
  std::printf("mollifier c_grad:             %.12f (<= 1)\n", av.c_grad);
  std::printf("mollifier c_decay(alpha):     %.6f\n", av.c_decay);
  if (worst_odd > 1e-12 || worst_mag > 1e-12 || worst_k0 > 0.25 + 1e-12 ||
      origin.norm() != 0.0 || !av.ok) {
    throw NumericalError("kernel self-test failed");
  }
  std::printf("kernels-selftest: all good\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D stochastic vortex model laboratory"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* validate = app.add_subcommand("validate", "run all assumption and grid checks");
  add_common(validate, flags);
  auto* solve = app.add_subcommand("solve-pde", "solve the limit equation, write snapshots");
  add_common(solve, flags);
  auto* simulate = app.add_subcommand("simulate", "integrate the particle system");
  add_common(simulate, flags);
  auto* entropy = app.add_subcommand("entropy", "paired run with entropy diagnostics");
  add_common(entropy, flags);
  auto* sweep = app.add_subcommand("rate-sweep", "N-sweep with rate fit");
  add_common(sweep, flags);
  auto* selftest = app.add_subcommand("kernels-selftest", "kernel and mollifier invariants");
  add_common(selftest, flags);

  CLI11_PARSE(app, argc, argv);

  return run_guarded([&] {
    const ExperimentConfig cfg = resolve_config(flags);
    if (validate->parsed()) cmd_validate(cfg);
    if (solve->parsed()) cmd_solve_pde(cfg);
    if (simulate->parsed()) cmd_simulate(cfg);
    if (entropy->parsed()) cmd_entropy(cfg);
    if (sweep->parsed()) cmd_rate_sweep(cfg);
    if (selftest->parsed()) cmd_kernels_selftest(cfg);
  });
}
