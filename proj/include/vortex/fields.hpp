#ifndef VORTEX_FIELDS_HPP
#define VORTEX_FIELDS_HPP

#include <span>
#include <vector>

#include "vortex/grid.hpp"
#include "vortex/mollifier.hpp"
#include "vortex/rng.hpp"

namespace vortex {

/// Mollified empirical measure rho^N = (1/n) sum_i V^N(. - X_i) sampled at
/// grid nodes. V^N is evaluated exactly (radial Hermite table, ~1e-10
/// relative) out to the radius where it falls below 1e-16 of its peak.
/// Throws OutOfBoxError when a particle is outside the box.
ScalarField mollified_density(std::span<const Vec2> positions, const MollifierSpec& moll,
                              GridSpec grid, int threads = 1);

enum class GradientMethod { kSpectral, kCentral };

/// Gradient of a periodic scalar field.
VecField gradient(const ScalarField& f, GradientMethod method = GradientMethod::kSpectral);

enum class ShiftMethod { kFourier, kBilinear };

/// Resamples f at x - a (so mass moves by +a). The Fourier path is exact for
/// band-limited fields; the bilinear path preserves positivity. Shifts beyond
/// a quarter box are rejected as excessive.
ScalarField shift_field(const ScalarField& f, Vec2 a,
                        ShiftMethod method = ShiftMethod::kFourier);

/// First moment of a density field.
Vec2 field_mean(const ScalarField& f);

/// Draws from the probability measure defined by nonnegative node values
/// (cell-uniform within each cell).
class GridSampler {
 public:
  explicit GridSampler(const ScalarField& f);
  Vec2 sample(Rng& rng) const;

 private:
  GridSpec spec_;
  std::vector<double> cdf_;
};

}  // namespace vortex

#endif
