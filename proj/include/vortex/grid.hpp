#ifndef VORTEX_GRID_HPP
#define VORTEX_GRID_HPP

#include <string>
#include <vector>

#include "vortex/common.hpp"

namespace vortex {

/// Uniform periodicized box [-L, L)^2 with M nodes per side. Node i sits at
/// -L + i*h with h = 2L/M, so for even M the exact origin is node M/2.
struct GridSpec {
  double L{0.0};
  int M{0};

  double h() const { return 2.0 * L / M; }
  double coord(int i) const { return -L + i * h(); }
  std::size_t nodes() const { return static_cast<std::size_t>(M) * M; }
  std::size_t idx(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * M + ix;
  }
  bool inside(Vec2 p) const { return p.x >= -L && p.x < L && p.y >= -L && p.y < L; }
  bool operator==(const GridSpec& o) const { return L == o.L && M == o.M; }

  void validate() const {
    if (M < 8) throw ConfigError("grid must have M >= 8 nodes per side");
    if ((M & (M - 1)) != 0) throw ConfigError("grid M must be a power of two");
    if (!(L > 0.0)) throw ConfigError("grid half-width L must be positive");
  }
};

/// Scalar samples on a GridSpec, row-major with x fastest.
struct ScalarField {
  GridSpec spec;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(GridSpec s) : spec(s), v(s.nodes(), 0.0) {}

  double& at(int ix, int iy) { return v[spec.idx(ix, iy)]; }
  double at(int ix, int iy) const { return v[spec.idx(ix, iy)]; }

  double mass() const;
  double min_value() const;
  double max_value() const;
  /// Quadrature mass carried by the outermost node ring.
  double boundary_ring_mass() const;
};

/// Two-component vector samples on a GridSpec (planar velocity etc).
struct VecField {
  GridSpec spec;
  std::vector<double> x;
  std::vector<double> y;

  VecField() = default;
  explicit VecField(GridSpec s) : spec(s), x(s.nodes(), 0.0), y(s.nodes(), 0.0) {}

  Vec2 at(int ix, int iy) const {
    const std::size_t k = spec.idx(ix, iy);
    return {x[k], y[k]};
  }
  void set(int ix, int iy, Vec2 val) {
    const std::size_t k = spec.idx(ix, iy);
    x[k] = val.x;
    y[k] = val.y;
  }
};

// Binary field file: magic "VFLD", u32 version, u32 element type (1 scalar,
// 2 vec2), u32 M, f64 L, then row-major little-endian f64 payload with vector
// components interleaved per node.
void write_field(const std::string& path, const ScalarField& f);
void write_field(const std::string& path, const VecField& f);
ScalarField read_scalar_field(const std::string& path);
VecField read_vec_field(const std::string& path);

/// CSV export of the row of nodes closest to y = y0 (columns x, value).
void write_slice_csv(const std::string& path, const ScalarField& f, double y0);

}  // namespace vortex

#endif
