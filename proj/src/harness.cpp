#include "vortex/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "vortex/fields.hpp"
#include "vortex/kernels.hpp"

namespace vortex {

RateTargets rate_targets(double beta, double alpha, int d, double delta) {
  if (!(delta > 0.0)) throw ConfigError("rate_targets: delta must be positive");
  if (!(alpha > d / 2.0)) throw AssumptionError("rate_targets: alpha must exceed d/2");
  if (!beta_admissible(beta, alpha, d)) {
    throw AssumptionError("rate_targets: beta = " + std::to_string(beta) +
                          " outside (0, min(" + std::to_string(beta_upper_bound_martingale(d)) +
                          ", " + std::to_string(beta_upper_bound_qv(alpha, d)) + "))");
  }
  RateTargets t;
  t.delta = delta;
  t.theta1 = 0.5 - beta * (1.0 + 1.0 / d);
  t.theta2 = 1.0 - beta * (1.0 + 2.0 / d + 2.0 * alpha);
  t.theta = std::min(t.theta2, t.theta1) - delta;
  if (!(t.theta > 0.0)) {
    throw NumericalError("rate_targets: theta = " + std::to_string(t.theta) + " is not positive");
  }
  return t;
}

std::shared_ptr<const KernelTable> SweepContext::table_for(std::int64_t n) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = tables_.find(n);
  if (it != tables_.end()) return it->second;
  const auto spec = make_mollifier_spec(cfg_.beta, cfg_.alpha, n);
  auto table = std::make_shared<KernelTable>(
      build_interaction_table(spec, cfg_.table_L, cfg_.table_M, cfg_.table_tail_tol));
  tables_[n] = table;
  return table;
}

std::shared_ptr<const LimitSolution> SweepContext::limit_solution() {
  std::lock_guard<std::mutex> lock(mu_);
  if (pde_) return pde_;
  const ScalarField rho0 = cfg_.initial_field();
  pde_ = std::make_shared<const LimitSolution>(
      solve_vorticity(rho0, cfg_.T, cfg_.dt_pde, cfg_.snapshots));
  return pde_;
}

namespace {

// Mollifier-jitter sampler around a uniformly chosen particle: exact draws
// from rho^N that translate with the cloud, which keeps the distance bracket
// equivariant under the common shift.
KrMeasure kr_measure_from_cloud(std::shared_ptr<const std::vector<Vec2>> pts,
                                const MollifierSpec& moll, const ScalarField& field) {
  KrMeasure m;
  m.mean = field_mean(field);
  auto grid = std::make_shared<ScalarField>(field);
  m.integrate = [grid](const std::function<double(Vec2)>& phi) {
    return integrate_field_test_function(*grid, {0.0, 0.0}, phi);
  };
  const double bw = moll.bandwidth();
  m.sample = [pts, bw](Rng& rng) {
    const Vec2 base = (*pts)[rng.uniform_index(pts->size())];
    const double r = bw * mollifier_radial_mass_inverse(rng.uniform());
    const double ang = kTwoPi * rng.uniform();
    return base + Vec2{r * std::cos(ang), r * std::sin(ang)};
  };
  return m;
}

// Shifted-solution measure built from the unshifted snapshot plus the shift
// vector, so sampling and integration are exactly translation-equivariant.
KrMeasure kr_measure_shifted(const ScalarField& base, Vec2 shift) {
  auto sampler = std::make_shared<GridSampler>(base);
  auto grid = std::make_shared<ScalarField>(base);
  KrMeasure m;
  m.mean = field_mean(base) + shift;
  m.integrate = [grid, shift](const std::function<double(Vec2)>& phi) {
    return integrate_field_test_function(*grid, shift, phi);
  };
  m.sample = [sampler, shift](Rng& rng) { return sampler->sample(rng) + shift; };
  return m;
}

}  // namespace

PairedRunResult paired_run(SweepContext& ctx, std::int64_t n, std::uint64_t run_index,
                           int threads) {
  const ExperimentConfig& cfg = ctx.config();
  if (!cfg.initial_is_probability()) {
    throw ConfigError("paired_run needs probability initial data");
  }
  const auto moll = make_mollifier_spec(cfg.beta, cfg.alpha, n);
  const auto table = ctx.table_for(n);
  const auto limit = ctx.limit_solution();

  Rng init_rng(cfg.master_seed, static_cast<std::uint64_t>(StreamPurpose::kInitialSample),
               run_index);
  ParticleEnsemble ens = sample_initial(static_cast<std::size_t>(n), cfg.mixture(), init_rng);

  NoiseConfig noise;
  noise.master_seed = cfg.master_seed;
  noise.run_index = run_index;
  noise.dt = cfg.dt_sde;
  noise.sigma = cfg.sigma();

  SimulationPlan plan;
  plan.T = cfg.T;
  plan.snapshots = cfg.snapshots;
  plan.exit_radius = std::pow(static_cast<double>(n), cfg.beta);
  plan.mode = cfg.drift();
  plan.threads = threads;

  const SimulationResult sim = simulate(std::move(ens), *table, noise, plan);

  PairedRunResult out;
  out.exit = sim.exit;
  EntropyTrace& trace = out.trace;
  const std::size_t kept = sim.snap_times.size();
  const GridSpec grid = cfg.grid();

  std::vector<ScalarField> rho_n_fields;
  rho_n_fields.reserve(kept);

  for (std::size_t k = 0; k < kept; ++k) {
    const std::string provenance = "run(N=" + std::to_string(n) +
                                   ", idx=" + std::to_string(run_index) + ")";
    ScalarField f = mollified_density(sim.snap_positions[k], moll, grid, threads);
    const Vec2 shift = sim.snap_shift[k];
    const ScalarField& base = limit->snapshots[k];
    ScalarField g = (shift.x == 0.0 && shift.y == 0.0)
                        ? base
                        : shift_field(base, shift, ShiftMethod::kFourier);

    if (g.boundary_ring_mass() > cfg.boundary_mass_tol) {
      throw NumericalError(provenance + ": limit solution boundary mass " +
                           std::to_string(g.boundary_ring_mass()) + " exceeds tolerance; box too small");
    }

    trace.times.push_back(sim.snap_times[k]);
    trace.entropy.push_back(relative_entropy(f, g));
    trace.fisher.push_back(fisher_information(f, g));
    trace.l1.push_back(l1_distance(f, g));

    auto cloud = std::make_shared<const std::vector<Vec2>>(sim.snap_positions[k]);
    const KrMeasure mf = kr_measure_from_cloud(cloud, moll, f);
    const KrMeasure mg = kr_measure_shifted(base, shift);
    Rng kr_rng(cfg.master_seed, static_cast<std::uint64_t>(StreamPurpose::kKrSampling),
               run_index * 1024 + k);
    const KrBracket kr = kr_distance(mf, mg, cfg.kr_samples, cfg.kr_reps, kr_rng);
    trace.kr_lower.push_back(kr.lower);
    trace.kr_upper.push_back(kr.upper);
    trace.qv_cum.push_back(0.0);  // filled below

    if (std::fabs(f.mass() - 1.0) > cfg.density_mass_tol) {
      trace.violations.push_back(provenance + ": rho^N mass " + std::to_string(f.mass()));
    }
    rho_n_fields.push_back(std::move(f));
  }

  trace.qv_cum = qv_cumulative(sim.snap_positions, moll, rho_n_fields, trace.times, threads);
  for (std::size_t k = 0; k < kept; ++k) {
    trace.check_invariants(k, "run(N=" + std::to_string(n) + ", idx=" + std::to_string(run_index) + ")");
  }
  out.sup_entropy = trace.sup_entropy();
  out.final_qv = trace.qv_cum.empty() ? 0.0 : trace.qv_cum.back();
  return out;
}

namespace {

double median(std::vector<double> xs) {
  if (xs.empty()) throw NumericalError("median of empty sample");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// two-sided 95% Student t quantiles by degrees of freedom
double t_quantile_95(int dof) {
  static const std::pair<int, double> table[] = {
      {1, 12.706}, {2, 4.303}, {3, 3.182}, {4, 2.776}, {5, 2.571}, {6, 2.447},
      {7, 2.365},  {8, 2.306}, {9, 2.262}, {10, 2.228}, {12, 2.179}, {15, 2.131},
      {20, 2.086}, {30, 2.042}};
  double best = 1.96;
  for (const auto& [d, t] : table) {
    if (dof <= d) return t;
    best = t;
  }
  return std::min(best, 1.96 + (best - 1.96));
}

int hardware_workers(const ExperimentConfig& cfg) {
  if (cfg.workers > 0) return cfg.workers;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw ConfigError("fit_line: need >= 3 points");
  const int n = static_cast<int>(x.size());
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw NumericalError("fit_line: degenerate abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.stderr_slope = std::sqrt(ss_res / (n - 2) / sxx);
  fit.ci_half_width = t_quantile_95(n - 2) * fit.stderr_slope;
  return fit;
}

double measure_entropy_floor(const ScalarField& rho) {
  const double half = 0.5 * rho.spec.h();
  ScalarField there = shift_field(rho, {half, half}, ShiftMethod::kBilinear);
  ScalarField back = shift_field(there, {-half, -half}, ShiftMethod::kBilinear);
  double floor = 0.0;
  try {
    floor = std::fabs(relative_entropy(back, rho));
  } catch (const SupportMismatchError&) {
    floor = 0.0;  // resample zeroed a tail; the floor is then unmeasurable but tiny
  }
  return std::max(floor, 1e-12);
}

RateReport rate_sweep(const ExperimentConfig& cfg) {
  if (cfg.seeds < 4) throw ConfigError("rate_sweep: need at least 4 seeds");
  if (cfg.Ns.size() < 3) throw ConfigError("rate_sweep: need at least 3 ensemble sizes");
  for (std::size_t i = 1; i < cfg.Ns.size(); ++i) {
    if (cfg.Ns[i] <= cfg.Ns[i - 1]) throw ConfigError("rate_sweep: Ns must be strictly increasing");
  }

  SweepContext ctx(cfg);
  (void)ctx.limit_solution();  // solve once up front, not under the task race

  struct Task {
    std::size_t n_index;
    int seed_index;
  };
  std::vector<Task> tasks;
  for (std::size_t ni = 0; ni < cfg.Ns.size(); ++ni) {
    for (int s = 0; s < cfg.seeds; ++s) tasks.push_back({ni, s});
  }
  std::vector<PairedRunResult> results(tasks.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = cursor.fetch_add(1);
      if (k >= tasks.size()) return;
      const Task& t = tasks[k];
      results[k] = paired_run(ctx, cfg.Ns[t.n_index],
                              run_ordinal(t.n_index, static_cast<std::uint64_t>(t.seed_index)), 1);
    }
  };
  const int nw = std::min<int>(hardware_workers(cfg), static_cast<int>(tasks.size()));
  std::vector<std::thread> pool;
  for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  RateReport rep;
  rep.ns = cfg.Ns;
  rep.targets = rate_targets(cfg.beta, cfg.alpha, 2, cfg.delta);
  rep.master_seed = cfg.master_seed;
  rep.entropy_floor = measure_entropy_floor(ctx.limit_solution()->snapshots.back());

  for (std::size_t ni = 0; ni < cfg.Ns.size(); ++ni) {
    std::vector<double> sups, qvs;
    int exited = 0;
    for (std::size_t k = 0; k < tasks.size(); ++k) {
      if (tasks[k].n_index != ni) continue;
      sups.push_back(results[k].sup_entropy);
      qvs.push_back(results[k].final_qv);
      if (results[k].exit.exited) ++exited;
    }
    rep.sup_entropy_samples.push_back(sups);
    rep.median_sup_entropy.push_back(median(sups));
    rep.median_sup_entropy_adj.push_back(median(sups) - rep.entropy_floor);
    rep.median_final_qv.push_back(median(qvs));
    rep.exit_fraction.push_back(static_cast<double>(exited) / cfg.seeds);
  }

  std::vector<double> lx, ly;
  for (std::size_t ni = 0; ni < cfg.Ns.size(); ++ni) {
    const double adj = rep.median_sup_entropy_adj[ni];
    if (adj <= 0.0) throw NumericalError("rate_sweep: entropy floor swallowed the signal");
    lx.push_back(std::log(static_cast<double>(cfg.Ns[ni])));
    ly.push_back(std::log(adj));
  }
  const LineFit fit = fit_line(lx, ly);
  rep.slope = fit.slope;
  rep.slope_stderr = fit.stderr_slope;
  rep.slope_ci_low = fit.slope - fit.ci_half_width;
  rep.slope_ci_high = fit.slope + fit.ci_half_width;
  return rep;
}

std::vector<double> exit_fractions(const ExperimentConfig& cfg, int seeds) {
  if (seeds < 1) throw ConfigError("exit_fractions: need seeds >= 1");
  SweepContext ctx(cfg);

  struct Task {
    std::size_t n_index;
    int seed_index;
  };
  std::vector<Task> tasks;
  for (std::size_t ni = 0; ni < cfg.Ns.size(); ++ni) {
    for (int s = 0; s < seeds; ++s) tasks.push_back({ni, s});
  }
  std::vector<char> exited(tasks.size(), 0);
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = cursor.fetch_add(1);
      if (k >= tasks.size()) return;
      const Task& t = tasks[k];
      const std::int64_t n = cfg.Ns[t.n_index];
      Rng init_rng(cfg.master_seed, static_cast<std::uint64_t>(StreamPurpose::kInitialSample),
                   run_ordinal(t.n_index, static_cast<std::uint64_t>(t.seed_index)));
      ParticleEnsemble ens =
          sample_initial(static_cast<std::size_t>(n), cfg.mixture(), init_rng);
      NoiseConfig noise;
      noise.master_seed = cfg.master_seed;
      noise.run_index = run_ordinal(t.n_index, static_cast<std::uint64_t>(t.seed_index));
      noise.dt = cfg.dt_sde;
      noise.sigma = cfg.sigma();
      SimulationPlan plan;
      plan.T = cfg.T;
      plan.snapshots = 2;  // exit statistics only
      plan.exit_radius = std::pow(static_cast<double>(n), cfg.beta);
      plan.mode = cfg.drift();
      const SimulationResult sim = simulate(std::move(ens), *ctx.table_for(n), noise, plan);
      exited[k] = sim.exit.exited ? 1 : 0;
    }
  };
  const int nw = std::min<int>(hardware_workers(cfg), static_cast<int>(tasks.size()));
  std::vector<std::thread> pool;
  for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::vector<double> frac(cfg.Ns.size(), 0.0);
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    if (exited[k]) frac[tasks[k].n_index] += 1.0;
  }
  for (double& f : frac) f /= seeds;
  return frac;
}

void write_rate_report(const std::string& dir, const RateReport& rep,
                       const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  {
    std::ofstream csv(fs::path(dir) / "rate_report.csv");
    if (!csv) throw IoError("cannot open rate_report.csv");
    csv << "N,median_sup_H,median_sup_H_adj,exit_fraction,median_final_qv\n";
    csv.precision(17);
    for (std::size_t i = 0; i < rep.ns.size(); ++i) {
      csv << rep.ns[i] << "," << rep.median_sup_entropy[i] << "," << rep.median_sup_entropy_adj[i]
          << "," << rep.exit_fraction[i] << "," << rep.median_final_qv[i] << "\n";
    }
  }
  {
    nlohmann::json j;
    j["targets"] = {{"theta1", rep.targets.theta1},
                    {"theta2", rep.targets.theta2},
                    {"delta", rep.targets.delta},
                    {"theta", rep.targets.theta}};
    j["slope"] = rep.slope;
    j["slope_stderr"] = rep.slope_stderr;
    j["slope_ci"] = {rep.slope_ci_low, rep.slope_ci_high};
    j["entropy_floor"] = rep.entropy_floor;
    j["master_seed"] = rep.master_seed;
    j["ns"] = rep.ns;
    j["median_sup_H"] = rep.median_sup_entropy;
    j["exit_fraction"] = rep.exit_fraction;
    j["sup_H_samples"] = rep.sup_entropy_samples;
    std::ofstream out(fs::path(dir) / "rate_report.json");
    if (!out) throw IoError("cannot open rate_report.json");
    out << j.dump(2) << "\n";
  }
  save_config((fs::path(dir) / "config.json").string(), cfg);
}

}  // namespace vortex
