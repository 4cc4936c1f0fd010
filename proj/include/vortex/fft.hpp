#ifndef VORTEX_FFT_HPP
#define VORTEX_FFT_HPP

#include <complex>
#include <vector>

#include "vortex/common.hpp"

namespace vortex {

using Cpx = std::complex<double>;

/// Iterative radix-2 complex FFT for power-of-two sizes, with precomputed
/// twiddles and bit-reversal table. Forward is unnormalized, inverse divides
/// by n. Enough throughput for the 256..512 grids this project runs on.
class Fft {
 public:
  explicit Fft(std::size_t n);

  std::size_t size() const { return n_; }
  void forward(Cpx* data) const { transform(data, false); }
  void inverse(Cpx* data) const;

 private:
  void transform(Cpx* data, bool inv) const;

  std::size_t n_;
  int log2n_;
  std::vector<std::uint32_t> bitrev_;
  std::vector<Cpx> twiddle_;      // forward twiddles, grouped per stage
  std::vector<Cpx> twiddle_inv_;  // conjugates
};

/// In-place 2D transform of an M x M row-major complex grid.
class Fft2 {
 public:
  explicit Fft2(std::size_t m) : m_(m), fft_(m), scratch_(m) {}

  std::size_t size() const { return m_; }
  void forward(std::vector<Cpx>& grid) const { transform(grid, false); }
  void inverse(std::vector<Cpx>& grid) const { transform(grid, true); }

 private:
  void transform(std::vector<Cpx>& grid, bool inv) const;

  std::size_t m_;
  Fft fft_;
  mutable std::vector<Cpx> scratch_;
};

}  // namespace vortex

#endif
