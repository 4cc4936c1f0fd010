#include "vortex/fft.hpp"

#include <cmath>

namespace vortex {

Fft::Fft(std::size_t n) : n_(n) {
  if (n < 2 || (n & (n - 1)) != 0) throw ConfigError("fft size must be a power of two >= 2");
  log2n_ = 0;
  while ((1u << log2n_) < n) ++log2n_;

  bitrev_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t r = 0;
    for (int b = 0; b < log2n_; ++b) r |= ((i >> b) & 1u) << (log2n_ - 1 - b);
    bitrev_[i] = r;
  }

  // Stage s uses half = 2^s twiddles; store them back to back.
  twiddle_.resize(n - 1);
  twiddle_inv_.resize(n - 1);
  std::size_t off = 0;
  for (std::size_t half = 1; half < n; half *= 2) {
    for (std::size_t j = 0; j < half; ++j) {
      const double ang = -kPi * static_cast<double>(j) / static_cast<double>(half);
      twiddle_[off + j] = Cpx(std::cos(ang), std::sin(ang));
      twiddle_inv_[off + j] = std::conj(twiddle_[off + j]);
    }
    off += half;
  }
}

void Fft::transform(Cpx* a, bool inv) const {
  const std::size_t n = n_;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = bitrev_[i];
    if (i < j) std::swap(a[i], a[j]);
  }
  const std::vector<Cpx>& tw = inv ? twiddle_inv_ : twiddle_;
  std::size_t off = 0;
  for (std::size_t half = 1; half < n; half *= 2) {
    for (std::size_t start = 0; start < n; start += 2 * half) {
      for (std::size_t j = 0; j < half; ++j) {
        const Cpx w = tw[off + j];
        Cpx& lo = a[start + j];
        Cpx& hi = a[start + j + half];
        const Cpx t = w * hi;
        hi = lo - t;
        lo += t;
      }
    }
    off += half;
  }
}

void Fft::inverse(Cpx* data) const {
  transform(data, true);
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) data[i] *= scale;
}

void Fft2::transform(std::vector<Cpx>& g, bool inv) const {
  if (g.size() != m_ * m_) throw ConfigError("fft2: grid size mismatch");
  for (std::size_t r = 0; r < m_; ++r) {
    Cpx* row = g.data() + r * m_;
    if (inv)
      fft_.inverse(row);
    else
      fft_.forward(row);
  }
  for (std::size_t c = 0; c < m_; ++c) {
    for (std::size_t r = 0; r < m_; ++r) scratch_[r] = g[r * m_ + c];
    if (inv)
      fft_.inverse(scratch_.data());
    else
      fft_.forward(scratch_.data());
    for (std::size_t r = 0; r < m_; ++r) g[r * m_ + c] = scratch_[r];
  }
}

}  // namespace vortex
