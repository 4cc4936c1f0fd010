#ifndef VORTEX_DENSITY_HPP
#define VORTEX_DENSITY_HPP

#include <vector>

#include "vortex/grid.hpp"
#include "vortex/rng.hpp"

namespace vortex {

/// Centered isotropic Gaussian mixture used as analytic initial data. The
/// broad low-weight component keeps the far tail of the limit solution above
/// the entropy support floor on boxes wide enough for the stopping radius.
struct GaussianMixture {
  struct Component {
    double weight{1.0};
    double variance{0.2};  // per-coordinate variance s^2
    Vec2 center{0.0, 0.0};
  };
  std::vector<Component> components;

  void validate() const;
  double pdf(Vec2 x) const;
  Vec2 sample(Rng& rng) const;
  ScalarField rasterize(GridSpec grid) const;
  /// Smallest c with pdf <= c exp(-|x - center|^2 / c) for every component
  /// (Gaussian-tail envelope constant of the initial-data assumption).
  double gaussian_tail_constant() const;
};

/// Unnormalized Gaussian-tail envelope c3 * exp(-|x|^2 / c3); the extremal
/// datum admitted by the initial-data decay assumption. Mass is pi * c3^2.
ScalarField rasterize_tail_envelope(double c3, GridSpec grid);

}  // namespace vortex

#endif
