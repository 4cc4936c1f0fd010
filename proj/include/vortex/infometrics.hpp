#ifndef VORTEX_INFOMETRICS_HPP
#define VORTEX_INFOMETRICS_HPP

#include <functional>
#include <string>
#include <vector>

#include "vortex/fields.hpp"
#include "vortex/grid.hpp"
#include "vortex/mollifier.hpp"
#include "vortex/rng.hpp"

namespace vortex {

// Floor policy for entropy-type integrands: nodes with f below a relative
// floor are dropped; if f is above the floor where g has lost all mass the
// pair is rejected outright instead of being clipped.
inline constexpr double kEntropyRelFloor = 1e-14;
inline constexpr double kSupportAbsFloor = 1e-30;

/// Relative entropy integral f ln(f/g) by grid quadrature.
double relative_entropy(const ScalarField& f, const ScalarField& g);

/// Fisher information integral f |grad ln(f/g)|^2, restricted to f above the
/// floor; gradients from the fields module.
double fisher_information(const ScalarField& f, const ScalarField& g,
                          GradientMethod method = GradientMethod::kSpectral);

/// L1 distance integral |f - g|.
double l1_distance(const ScalarField& f, const ScalarField& g);

/// One side of the bounded-Lipschitz bracket: how to integrate a test
/// function exactly against the measure, how to sample it, and its mean
/// (used to aim the adaptive dictionary entries).
struct KrMeasure {
  std::function<double(const std::function<double(Vec2)>&)> integrate;
  std::function<Vec2(Rng&)> sample;
  Vec2 mean;
};

KrMeasure kr_measure_from_field(const ScalarField& f);
KrMeasure kr_measure_from_points(std::span<const Vec2> pts);

/// Integral of a test function against the (normalized, offset) field by
/// cell-based Gauss quadrature on the bilinear model; stable for the kinked
/// dictionary entries.
double integrate_field_test_function(const ScalarField& f, Vec2 offset,
                                     const std::function<double(Vec2)>& phi);

struct KrBracket {
  double lower{0.0};
  double upper{0.0};
};

/// Certified bracket of the Kantorovich-Rubinstein distance: lower from a
/// fixed dictionary of bounded-Lipschitz test functions evaluated exactly,
/// upper from min(2, empirical W1 by exact assignment over samples of size
/// <= 2048, Monte-Carlo averaged over reps).
KrBracket kr_distance(const KrMeasure& a, const KrMeasure& b, int samples, int reps, Rng& rng);

struct DvReport {
  double lhs{0.0};
  double rhs{0.0};
  double entropy{0.0};
  bool holds{false};
};

/// Donsker-Varadhan check: integral f Phi <= eta H(f|g) + eta ln integral
/// g exp(Phi/eta). Throws NumericalError when exp(Phi/eta) overflows.
DvReport dv_check(const ScalarField& f, const ScalarField& g, const ScalarField& phi, double eta,
                  double tol = 1e-8);

/// Quadratic-variation diagnostic along a trajectory of snapshots:
///   (1/(2 n^2)) sum_i integral |grad V^N(x - X_i)|^2 / rho^N dx,
/// integrated in time by the trapezoid rule. Returns the cumulative values
/// aligned with the snapshot times (first entry 0).
std::vector<double> qv_cumulative(const std::vector<std::vector<Vec2>>& snapshot_positions,
                                  const MollifierSpec& moll,
                                  const std::vector<ScalarField>& rho_n,
                                  const std::vector<double>& times, int threads = 1);

/// Diagnostics time series along one paired run.
struct EntropyTrace {
  std::vector<double> times;
  std::vector<double> entropy;
  std::vector<double> fisher;
  std::vector<double> l1;
  std::vector<double> kr_lower;
  std::vector<double> kr_upper;
  std::vector<double> qv_cum;
  std::vector<std::string> violations;  // inline invariant failures, with provenance

  std::size_t size() const { return times.size(); }
  double sup_entropy() const;
  void check_invariants(std::size_t snapshot_index, const std::string& provenance);
  void write_csv(const std::string& path) const;
};

}  // namespace vortex

#endif
