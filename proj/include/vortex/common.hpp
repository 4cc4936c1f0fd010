#ifndef VORTEX_COMMON_HPP
#define VORTEX_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace vortex {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Planar point / displacement. The whole lab lives in d = 2.
struct Vec2 {
  double x{0.0};
  double y{0.0};

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2 operator*(double c) const { return {x * c, y * c}; }
  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
  /// Counterclockwise perpendicular (-y, x).
  Vec2 perp() const { return {-y, x}; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Vec2 operator*(double c, Vec2 v) { return v * c; }

/// 2x2 real matrix, row major.
struct Mat2 {
  double a11{0.0}, a12{0.0}, a21{0.0}, a22{0.0};

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 zero() { return {}; }
  static Mat2 scalar(double c) { return {c, 0.0, 0.0, c}; }

  Vec2 apply(Vec2 v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
  double max_abs_entry() const {
    return std::max(std::max(std::fabs(a11), std::fabs(a12)),
                    std::max(std::fabs(a21), std::fabs(a22)));
  }
  bool finite() const {
    return std::isfinite(a11) && std::isfinite(a12) && std::isfinite(a21) && std::isfinite(a22);
  }
  bool is_zero() const { return a11 == 0.0 && a12 == 0.0 && a21 == 0.0 && a22 == 0.0; }
};

// Error taxonomy; the CLI maps each class to a stable exit code.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error("config error: " + m) {}
};
struct AssumptionError : std::runtime_error {
  explicit AssumptionError(const std::string& m) : std::runtime_error("assumption violated: " + m) {}
};
struct SingularInputError : std::runtime_error {
  explicit SingularInputError(const std::string& m) : std::runtime_error("singular input: " + m) {}
};
struct OutOfBoxError : std::runtime_error {
  explicit OutOfBoxError(const std::string& m) : std::runtime_error("out of box: " + m) {}
};
struct SupportMismatchError : std::runtime_error {
  explicit SupportMismatchError(const std::string& m)
      : std::runtime_error("support mismatch: " + m) {}
};
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& m) : std::runtime_error("numerical error: " + m) {}
};
struct IoError : std::runtime_error {
  explicit IoError(const std::string& m) : std::runtime_error("io error: " + m) {}
};

}  // namespace vortex

#endif
