#ifndef VORTEX_HARNESS_HPP
#define VORTEX_HARNESS_HPP

#include <map>
#include <memory>
#include <mutex>

#include "vortex/config.hpp"
#include "vortex/infometrics.hpp"
#include "vortex/pde.hpp"

namespace vortex {

/// Convergence-rate exponents of the entropy bound:
///   theta1 = 1/2 - beta (1 + 1/d)   (martingale part)
///   theta2 = 1 - beta (1 + 2/d + 2 alpha)   (quadratic-variation part)
///   theta  = min(theta2, theta1) - delta.
struct RateTargets {
  double theta1{0.0};
  double theta2{0.0};
  double delta{0.0};
  double theta{0.0};
};

/// Throws AssumptionError for inadmissible beta, NumericalError when the
/// resulting theta is not positive.
RateTargets rate_targets(double beta, double alpha, int d, double delta);

/// Caches shared between the runs of a sweep: the deterministic limit
/// solution (identical for every run) and one interaction table per N.
class SweepContext {
 public:
  explicit SweepContext(const ExperimentConfig& cfg) : cfg_(cfg) {}

  const ExperimentConfig& config() const { return cfg_; }
  std::shared_ptr<const KernelTable> table_for(std::int64_t n);
  std::shared_ptr<const LimitSolution> limit_solution();

 private:
  ExperimentConfig cfg_;
  std::mutex mu_;
  std::map<std::int64_t, std::shared_ptr<const KernelTable>> tables_;
  std::shared_ptr<const LimitSolution> pde_;
};

struct PairedRunResult {
  EntropyTrace trace;
  ExitRecord exit;
  double sup_entropy{0.0};
  double final_qv{0.0};
};

/// One run of the full pipeline on a single common-noise path: sample the
/// initial cloud, integrate the particles, build the shift path from the
/// recorded increments, and evaluate every diagnostic between rho^N and the
/// shifted limit solution at each snapshot up to the stopping time.
PairedRunResult paired_run(SweepContext& ctx, std::int64_t n, std::uint64_t run_index,
                           int threads = 1);

struct RateReport {
  std::vector<std::int64_t> ns;
  std::vector<double> median_sup_entropy;       // raw medians
  std::vector<double> median_sup_entropy_adj;   // floor-subtracted
  std::vector<double> exit_fraction;
  std::vector<double> median_final_qv;
  std::vector<std::vector<double>> sup_entropy_samples;  // per N, per seed
  RateTargets targets;
  double entropy_floor{0.0};
  double slope{0.0};
  double slope_stderr{0.0};
  double slope_ci_low{0.0};
  double slope_ci_high{0.0};
  std::uint64_t master_seed{0};
};

/// Runs the (N, seed) grid concurrently with isolated streams, aggregates
/// medians, measures the quadrature entropy floor, and fits the log-log
/// slope with a 95% confidence interval.
RateReport rate_sweep(const ExperimentConfig& cfg);

/// Exit statistics only (no densities): empirical P(tau < T) per N.
std::vector<double> exit_fractions(const ExperimentConfig& cfg, int seeds);

/// Quadrature entropy floor: compare the limit density against a copy that
/// went through a there-and-back half-cell resample.
double measure_entropy_floor(const ScalarField& rho);

/// Ordinary least squares of y on x with the symmetric 95% t-interval.
struct LineFit {
  double slope{0.0};
  double intercept{0.0};
  double stderr_slope{0.0};
  double ci_half_width{0.0};
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

void write_rate_report(const std::string& dir, const RateReport& rep,
                       const ExperimentConfig& cfg);

}  // namespace vortex

#endif
