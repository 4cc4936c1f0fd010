#include "vortex/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vortex/harness.hpp"
#include "vortex/kernels.hpp"
#include "vortex/mollifier.hpp"
#include "vortex/rng.hpp"

namespace vortex {

using nlohmann::json;

GaussianMixture ExperimentConfig::mixture() const {
  GaussianMixture m;
  m.components = init_components;
  return m;
}

SigmaSchedule ExperimentConfig::sigma() const {
  if (sigma_type == "zero") return SigmaSchedule::zero();
  if (sigma_type == "identity") return SigmaSchedule::identity();
  if (sigma_type == "scalar") return SigmaSchedule::scalar(sigma_scale);
  throw ConfigError("unknown sigma type: " + sigma_type);
}

DriftMode ExperimentConfig::drift() const {
  if (drift_mode == "direct") return DriftMode::kDirect;
  if (drift_mode == "mesh") return DriftMode::kParticleMesh;
  throw ConfigError("unknown drift mode: " + drift_mode);
}

ScalarField ExperimentConfig::initial_field() const {
  if (init_type == "gaussian_mixture") return mixture().rasterize(grid());
  if (init_type == "tail_envelope") return rasterize_tail_envelope(c3_tilde, grid());
  throw ConfigError("unknown init type: " + init_type);
}

std::string serialize_config(const ExperimentConfig& c) {
  json j;
  j["mollifier"] = {{"beta", c.beta}, {"alpha", c.alpha}, {"delta", c.delta}};
  json comps = json::array();
  for (const auto& comp : c.init_components) {
    comps.push_back({{"weight", comp.weight},
                     {"variance", comp.variance},
                     {"center", {comp.center.x, comp.center.y}}});
  }
  j["init"] = {{"type", c.init_type},
               {"components", comps},
               {"c3_tilde", c.c3_tilde},
               {"c3_threshold", c.c3_threshold}};
  j["grid"] = {{"L", c.grid_L}, {"M", c.grid_M}};
  j["table"] = {{"L", c.table_L}, {"M", c.table_M}, {"tail_tol", c.table_tail_tol}};
  j["dynamics"] = {{"T", c.T},
                   {"dt_sde", c.dt_sde},
                   {"dt_pde", c.dt_pde},
                   {"snapshots", c.snapshots},
                   {"sigma_type", c.sigma_type},
                   {"sigma_scale", c.sigma_scale},
                   {"drift_mode", c.drift_mode}};
  j["sweep"] = {{"Ns", c.Ns}, {"seeds", c.seeds}, {"master_seed", c.master_seed}};
  j["kr"] = {{"samples", c.kr_samples}, {"reps", c.kr_reps}};
  j["gates"] = {{"boundary_mass_tol", c.boundary_mass_tol},
                {"density_mass_tol", c.density_mass_tol},
                {"min_cells_per_bandwidth", c.min_cells_per_bandwidth}};
  j["workers"] = c.workers;
  j["out_dir"] = c.out_dir;
  return j.dump(2);
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse failed: ") + e.what());
  }
  ExperimentConfig c;
  try {
    if (j.contains("mollifier")) {
      const auto& m = j["mollifier"];
      c.beta = m.value("beta", c.beta);
      c.alpha = m.value("alpha", c.alpha);
      c.delta = m.value("delta", c.delta);
    }
    if (j.contains("init")) {
      const auto& m = j["init"];
      c.init_type = m.value("type", c.init_type);
      c.c3_tilde = m.value("c3_tilde", c.c3_tilde);
      c.c3_threshold = m.value("c3_threshold", c.c3_threshold);
      if (m.contains("components")) {
        c.init_components.clear();
        for (const auto& comp : m["components"]) {
          GaussianMixture::Component g;
          g.weight = comp.at("weight").get<double>();
          g.variance = comp.at("variance").get<double>();
          if (comp.contains("center")) {
            g.center = {comp["center"][0].get<double>(), comp["center"][1].get<double>()};
          }
          c.init_components.push_back(g);
        }
      }
    }
    if (j.contains("grid")) {
      c.grid_L = j["grid"].value("L", c.grid_L);
      c.grid_M = j["grid"].value("M", c.grid_M);
    }
    if (j.contains("table")) {
      c.table_L = j["table"].value("L", c.table_L);
      c.table_M = j["table"].value("M", c.table_M);
      c.table_tail_tol = j["table"].value("tail_tol", c.table_tail_tol);
    }
    if (j.contains("dynamics")) {
      const auto& m = j["dynamics"];
      c.T = m.value("T", c.T);
      c.dt_sde = m.value("dt_sde", c.dt_sde);
      c.dt_pde = m.value("dt_pde", c.dt_pde);
      c.snapshots = m.value("snapshots", c.snapshots);
      c.sigma_type = m.value("sigma_type", c.sigma_type);
      c.sigma_scale = m.value("sigma_scale", c.sigma_scale);
      c.drift_mode = m.value("drift_mode", c.drift_mode);
    }
    if (j.contains("sweep")) {
      const auto& m = j["sweep"];
      if (m.contains("Ns")) c.Ns = m["Ns"].get<std::vector<std::int64_t>>();
      c.seeds = m.value("seeds", c.seeds);
      c.master_seed = m.value("master_seed", c.master_seed);
    }
    if (j.contains("kr")) {
      c.kr_samples = j["kr"].value("samples", c.kr_samples);
      c.kr_reps = j["kr"].value("reps", c.kr_reps);
    }
    if (j.contains("gates")) {
      const auto& m = j["gates"];
      c.boundary_mass_tol = m.value("boundary_mass_tol", c.boundary_mass_tol);
      c.density_mass_tol = m.value("density_mass_tol", c.density_mass_tol);
      c.min_cells_per_bandwidth = m.value("min_cells_per_bandwidth", c.min_cells_per_bandwidth);
    }
    c.workers = j.value("workers", c.workers);
    c.out_dir = j.value("out_dir", c.out_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void save_config(const std::string& path, const ExperimentConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << serialize_config(cfg) << "\n";
}

bool ValidationReport::all_pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

ValidationReport validate_config(const ExperimentConfig& cfg) {
  ValidationReport rep;
  auto add = [&rep](const std::string& name, bool pass, const std::string& detail) {
    rep.checks.push_back({name, pass, detail});
  };

  // mollifier assumption constants
  {
    const auto av = check_mollifier_assumption(cfg.alpha);
    add("mollifier_gradient_bound", av.ok,
        "c_grad = " + std::to_string(av.c_grad) + " (requires <= 1)");
    add("mollifier_decay_bound", std::isfinite(av.c_decay) && av.c_decay > 0.0,
        "c_decay(alpha=" + std::to_string(cfg.alpha) + ") = " + std::to_string(av.c_decay));
  }

  // kernel antiderivative bound, sampled
  {
    Rng rng(1u, 9u, 9u);
    double worst = 0.0;
    for (int k = 0; k < 100000; ++k) {
      Vec2 x{(rng.uniform() - 0.5) * 20.0, (rng.uniform() - 0.5) * 20.0};
      if (x.y == 0.0) continue;
      worst = std::max(worst, biot_savart_antiderivative(x).max_abs_entry());
    }
    add("kernel_antiderivative_bound", worst <= 0.25 + 1e-12,
        "max sampled |K0| entry = " + std::to_string(worst) + " (bound 1/4)");
  }

  // beta admissibility and positive rate exponent
  {
    bool ok = true;
    std::string detail;
    try {
      const RateTargets t = rate_targets(cfg.beta, cfg.alpha, 2, cfg.delta);
      detail = "theta1 = " + std::to_string(t.theta1) + ", theta2 = " + std::to_string(t.theta2) +
               ", theta = " + std::to_string(t.theta);
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    add("beta_admissible_theta_positive", ok, detail);
  }

  // grid rules
  {
    bool ok = true;
    std::string detail;
    try {
      cfg.grid().validate();
      GridSpec{cfg.table_L, cfg.table_M}.validate();
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    add("grid_shape", ok, detail.empty() ? "M power of two, >= 8" : detail);
  }
  {
    std::int64_t n_max = 1;
    for (auto n : cfg.Ns) n_max = std::max(n_max, n);
    const double bw = std::pow(static_cast<double>(n_max), -cfg.beta / 2.0);
    const double cells = bw / cfg.grid().h();
    add("grid_resolves_bandwidth", cells >= cfg.min_cells_per_bandwidth,
        std::to_string(cells) + " cells per bandwidth at N = " + std::to_string(n_max) +
            " (requires >= " + std::to_string(cfg.min_cells_per_bandwidth) + ")");
    const double radius = std::pow(static_cast<double>(n_max), cfg.beta);
    add("grid_covers_stopping_radius", cfg.grid_L > radius,
        "L = " + std::to_string(cfg.grid_L) + " vs N^beta = " + std::to_string(radius));
    add("table_covers_differences", cfg.table_L >= 2.0 * radius,
        "table L = " + std::to_string(cfg.table_L) + " vs 2 N^beta = " +
            std::to_string(2.0 * radius));
  }

  // table tail mass at the widest bandwidth of the sweep
  {
    std::int64_t n_min = cfg.Ns.empty() ? 1 : cfg.Ns.front();
    for (auto n : cfg.Ns) n_min = std::min(n_min, n);
    bool ok = true;
    std::string detail;
    try {
      const auto spec = make_mollifier_spec(cfg.beta, cfg.alpha, n_min);
      const double tail = 1.0 - mollified_radial_mass(spec, cfg.table_L);
      ok = tail <= cfg.table_tail_tol;
      detail = "tail mass " + std::to_string(tail) + " at N = " + std::to_string(n_min);
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    add("table_tail_mass", ok, detail);
  }

  // initial data and noise
  {
    bool ok = true;
    std::string detail = "ok";
    if (cfg.initial_is_probability()) {
      try {
        cfg.mixture().validate();
        const double in_box = cfg.initial_field().mass();
        if (in_box < 1.0 - 1e-4) {
          ok = false;
          char buf[96];
          std::snprintf(buf, sizeof(buf), "initial density leaves the box: in-box mass %.6f",
                        in_box);
          detail = buf;
        }
      } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
      }
    } else if (!(cfg.c3_tilde > 0.0) || cfg.c3_tilde >= cfg.c3_threshold) {
      ok = false;
      detail = "tail envelope needs 0 < c3_tilde < threshold";
    }
    add("initial_data", ok, detail);
  }
  {
    bool ok = true;
    std::string detail;
    try {
      detail = "sup |sigma| = " + std::to_string(cfg.sigma().sup_norm());
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    add("sigma_bounded", ok, detail);
  }

  add("sweep_seeds", cfg.seeds >= 4, std::to_string(cfg.seeds) + " seeds (requires >= 4)");
  add("kr_sample_limit", cfg.kr_samples >= 1 && cfg.kr_samples <= 2048 && cfg.kr_reps >= 1,
      std::to_string(cfg.kr_samples) + " samples, " + std::to_string(cfg.kr_reps) + " reps");
  add("time_steps_positive", cfg.T > 0.0 && cfg.dt_sde > 0.0 && cfg.dt_pde > 0.0,
      "T, dt_sde, dt_pde");
  add("snapshot_count", cfg.snapshots >= 2, std::to_string(cfg.snapshots));
  return rep;
}

}  // namespace vortex
