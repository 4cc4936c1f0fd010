#include "vortex/grid.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace vortex {

static_assert(std::endian::native == std::endian::little,
              "field files are little-endian; big-endian hosts are unsupported");

double ScalarField::mass() const {
  const double cell = spec.h() * spec.h();
  double s = 0.0;
  for (double a : v) s += a;
  return s * cell;
}

double ScalarField::min_value() const { return *std::min_element(v.begin(), v.end()); }

double ScalarField::max_value() const { return *std::max_element(v.begin(), v.end()); }

double ScalarField::boundary_ring_mass() const {
  const int M = spec.M;
  const double cell = spec.h() * spec.h();
  double s = 0.0;
  for (int i = 0; i < M; ++i) {
    s += at(i, 0) + at(i, M - 1);
  }
  for (int j = 1; j + 1 < M; ++j) {
    s += at(0, j) + at(M - 1, j);
  }
  return s * cell;
}

namespace {

constexpr std::uint32_t kMagic = 0x444c4656;  // "VFLD"
constexpr std::uint32_t kVersion = 1;

void write_header(std::ofstream& out, std::uint32_t elem, const GridSpec& spec) {
  const std::uint32_t m = static_cast<std::uint32_t>(spec.M);
  out.write(reinterpret_cast<const char*>(&kMagic), 4);
  out.write(reinterpret_cast<const char*>(&kVersion), 4);
  out.write(reinterpret_cast<const char*>(&elem), 4);
  out.write(reinterpret_cast<const char*>(&m), 4);
  out.write(reinterpret_cast<const char*>(&spec.L), 8);
}

GridSpec read_header(std::ifstream& in, std::uint32_t expect_elem, const std::string& path) {
  std::uint32_t magic = 0, version = 0, elem = 0, m = 0;
  double L = 0.0;
  in.read(reinterpret_cast<char*>(&magic), 4);
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&elem), 4);
  in.read(reinterpret_cast<char*>(&m), 4);
  in.read(reinterpret_cast<char*>(&L), 8);
  if (!in || magic != kMagic) throw IoError("not a field file: " + path);
  if (version != kVersion) throw IoError("unsupported field file version in " + path);
  if (elem != expect_elem) throw IoError("field element type mismatch in " + path);
  return GridSpec{L, static_cast<int>(m)};
}

}  // namespace

void write_field(const std::string& path, const ScalarField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path);
  write_header(out, 1, f.spec);
  out.write(reinterpret_cast<const char*>(f.v.data()),
            static_cast<std::streamsize>(f.v.size() * sizeof(double)));
  if (!out) throw IoError("short write to " + path);
}

void write_field(const std::string& path, const VecField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path);
  write_header(out, 2, f.spec);
  std::vector<double> interleaved(2 * f.x.size());
  for (std::size_t k = 0; k < f.x.size(); ++k) {
    interleaved[2 * k] = f.x[k];
    interleaved[2 * k + 1] = f.y[k];
  }
  out.write(reinterpret_cast<const char*>(interleaved.data()),
            static_cast<std::streamsize>(interleaved.size() * sizeof(double)));
  if (!out) throw IoError("short write to " + path);
}

ScalarField read_scalar_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  ScalarField f(read_header(in, 1, path));
  in.read(reinterpret_cast<char*>(f.v.data()),
          static_cast<std::streamsize>(f.v.size() * sizeof(double)));
  if (!in) throw IoError("short read from " + path);
  return f;
}

VecField read_vec_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  VecField f(read_header(in, 2, path));
  std::vector<double> interleaved(2 * f.x.size());
  in.read(reinterpret_cast<char*>(interleaved.data()),
          static_cast<std::streamsize>(interleaved.size() * sizeof(double)));
  if (!in) throw IoError("short read from " + path);
  for (std::size_t k = 0; k < f.x.size(); ++k) {
    f.x[k] = interleaved[2 * k];
    f.y[k] = interleaved[2 * k + 1];
  }
  return f;
}

void write_slice_csv(const std::string& path, const ScalarField& f, double y0) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  int jy = 0;
  double best = 1e300;
  for (int j = 0; j < f.spec.M; ++j) {
    const double d = std::fabs(f.spec.coord(j) - y0);
    if (d < best) {
      best = d;
      jy = j;
    }
  }
  out << "x,value\n";
  out.precision(17);
  for (int i = 0; i < f.spec.M; ++i) out << f.spec.coord(i) << "," << f.at(i, jy) << "\n";
}

}  // namespace vortex
