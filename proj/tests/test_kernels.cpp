/// Kernel-module invariants: exact Biot-Savart identities, the bounded
/// antiderivative, and the interaction table against an independent
/// free-space quadrature oracle.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "oracle_helpers.hpp"
#include "vortex/kernels.hpp"
#include "vortex/rng.hpp"

using namespace vortex;
using namespace vortex::testing;

TEST_CASE("biot-savart pointwise formula") {
  const Vec2 k = biot_savart({1.0, 0.0});
  CHECK(k.x == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(k.y == doctest::Approx(1.0 / kTwoPi).epsilon(1e-14));
  CHECK(k.y == doctest::Approx(0.15915).epsilon(1e-4));

  // |K(x)| = 1/(2 pi |x|)
  const Vec2 k2 = biot_savart({2.0, 0.0});
  CHECK(k2.norm() == doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-14));
  CHECK(k2.norm() == doctest::Approx(0.079577).epsilon(1e-4));

  const Vec2 x{0.3, -0.7};
  const Vec2 a = biot_savart(x);
  const Vec2 b = biot_savart(-x);
  CHECK(a.x == -b.x);
  CHECK(a.y == -b.y);

  CHECK_THROWS_AS(biot_savart({0.0, 0.0}), SingularInputError);
}

TEST_CASE("biot-savart oddness and magnitude law on random points") {
  Rng rng(7, 1, 1);
  double worst_odd = 0.0;
  double worst_mag = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const Vec2 x{(rng.uniform() - 0.5) * 20.0, (rng.uniform() - 0.5) * 20.0};
    const Vec2 k = biot_savart(x);
    const Vec2 kn = biot_savart(-x);
    worst_odd = std::max(worst_odd, std::fabs(k.x + kn.x) + std::fabs(k.y + kn.y));
    worst_mag = std::max(worst_mag, std::fabs(k.norm() * x.norm() - 1.0 / kTwoPi));
  }
  CHECK(worst_odd == 0.0);  // exact negation of both components
  CHECK(worst_mag < 1e-15);
}

TEST_CASE("antiderivative matrix values and bound") {
  const Mat2 m = biot_savart_antiderivative({1.0, 1.0});
  CHECK(m.a11 == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(m.a22 == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(m.a12 == 0.0);
  CHECK(m.a21 == 0.0);

  const Mat2 z = biot_savart_antiderivative({0.0, 1.0});
  CHECK(z.a11 == 0.0);
  CHECK(z.a22 == 0.0);

  CHECK_THROWS_AS(biot_savart_antiderivative({1.0, 0.0}), SingularInputError);

  Rng rng(11, 1, 2);
  double worst = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    Vec2 x{(rng.uniform() - 0.5) * 50.0, (rng.uniform() - 0.5) * 50.0};
    if (x.y == 0.0) continue;
    worst = std::max(worst, biot_savart_antiderivative(x).max_abs_entry());
  }
  CHECK(worst <= 0.25);
}

namespace {

KernelTable make_test_table() {
  const auto moll = make_mollifier_spec(0.2, 1.1, 1000);
  return build_interaction_table(moll, 16.0, 512);
}

}  // namespace

TEST_CASE("interaction table structure") {
  const KernelTable table = make_test_table();
  const int M = table.spec.M;

  SUBCASE("origin node is exactly zero") {
    const Vec2 v = table.values.at(M / 2, M / 2);
    CHECK(v.x == 0.0);
    CHECK(v.y == 0.0);
  }

  SUBCASE("grid antisymmetry is exact") {
    double worst = 0.0;
    for (int iy = 1; iy < M; ++iy) {
      for (int ix = 1; ix < M; ++ix) {
        const Vec2 a = table.values.at(ix, iy);
        const Vec2 b = table.values.at(M - ix, M - iy);
        worst = std::max(worst, std::fabs(a.x + b.x) + std::fabs(a.y + b.y));
      }
    }
    CHECK(worst == 0.0);
  }

  SUBCASE("every retained mode is divergence free") {
    CHECK(max_mode_divergence(table) == 0.0);
  }

  SUBCASE("tail gate rejects undersized boxes") {
    const auto moll = make_mollifier_spec(0.2, 1.1, 1000);
    CHECK_THROWS_AS(build_interaction_table(moll, 4.0, 128), ConfigError);
  }
}

TEST_CASE("table matches the free-space quadrature oracle") {
  const KernelTable table = make_test_table();
  const double bw = table.moll.bandwidth();

  SUBCASE("at three mollifier bandwidths") {
    const Vec2 z{3.0 * bw, 0.0};
    const Vec2 numeric = interpolate(table, z);
    const Vec2 oracle = convolution_oracle(table.moll, z);
    CHECK((numeric - oracle).norm() / oracle.norm() < 1e-4);
  }

  SUBCASE("at random far-field nodes") {
    Rng rng(3, 1, 5);
    const int M = table.spec.M;
    const double h = table.spec.h();
    double worst = 0.0;
    double worst_interp = 0.0;
    for (int i = 0; i < 25; ++i) {
      const double r = bw * (3.0 + 7.0 * rng.uniform());
      const double ang = kTwoPi * rng.uniform();
      // snap to the nearest node: the contract is on stored table values
      const int ix = M / 2 + static_cast<int>(std::lround(r * std::cos(ang) / h));
      const int iy = M / 2 + static_cast<int>(std::lround(r * std::sin(ang) / h));
      const Vec2 z{h * (ix - M / 2), h * (iy - M / 2)};
      const Vec2 node = table.values.at(ix, iy);
      const Vec2 oracle = convolution_oracle(table.moll, z);
      worst = std::max(worst, (node - oracle).norm() / oracle.norm());
      const Vec2 mid = interpolate(table, z + Vec2{0.41 * h, -0.37 * h});
      const Vec2 mid_oracle = convolution_oracle(table.moll, z + Vec2{0.41 * h, -0.37 * h});
      worst_interp = std::max(worst_interp, (mid - mid_oracle).norm() / mid_oracle.norm());
    }
    std::printf("table nodes vs oracle worst relative error: %.3e\n", worst);
    std::printf("bilinear interpolant vs oracle worst relative error: %.3e\n", worst_interp);
    CHECK(worst < 1e-4);
    CHECK(worst_interp < 1e-3);  // interpolation quality, not a table-value contract
  }
}

TEST_CASE("bilinear interpolation of the table") {
  const KernelTable table = make_test_table();
  const int M = table.spec.M;
  const double h = table.spec.h();

  SUBCASE("reproduces node values exactly") {
    for (int iy : {10, 200, 380}) {
      for (int ix : {17, 256, 401}) {
        const Vec2 z{h * (ix - M / 2), h * (iy - M / 2)};
        const Vec2 v = interpolate(table, z);
        const Vec2 node = table.values.at(ix, iy);
        CHECK(v.x == doctest::Approx(node.x).epsilon(1e-13));
        CHECK(v.y == doctest::Approx(node.y).epsilon(1e-13));
      }
    }
  }

  SUBCASE("axis midpoint is the arithmetic mean of its two nodes") {
    const int ix = 300, iy = 280;
    const Vec2 z{h * (ix - M / 2) + 0.5 * h, h * (iy - M / 2)};
    const Vec2 v = interpolate(table, z);
    const Vec2 a = table.values.at(ix, iy);
    const Vec2 b = table.values.at(ix + 1, iy);
    CHECK(v.x == doctest::Approx(0.5 * (a.x + b.x)).epsilon(1e-13));
    CHECK(v.y == doctest::Approx(0.5 * (a.y + b.y)).epsilon(1e-13));
  }

  SUBCASE("odd under reflection off nodes") {
    Rng rng(5, 1, 3);
    for (int i = 0; i < 200; ++i) {
      const Vec2 z{(rng.uniform() - 0.5) * 20.0, (rng.uniform() - 0.5) * 20.0};
      const Vec2 a = interpolate(table, z);
      const Vec2 b = interpolate(table, -z);
      CHECK(std::fabs(a.x + b.x) < 1e-14);
      CHECK(std::fabs(a.y + b.y) < 1e-14);
    }
  }

  SUBCASE("out-of-box lookup throws") {
    CHECK_THROWS_AS(interpolate(table, {15.999, 15.999}), OutOfBoxError);
    CHECK_THROWS_AS(interpolate(table, {-17.0, 0.0}), OutOfBoxError);
  }
}

TEST_CASE("table serialization round trip") {
  const KernelTable table = make_test_table();
  const std::string path = "/tmp/vortex_test_table.vfld";
  save_table(path, table);
  const KernelTable loaded = load_table(path, table.moll);
  CHECK(loaded.spec.M == table.spec.M);
  CHECK(loaded.spec.L == table.spec.L);
  double worst = 0.0;
  for (std::size_t k = 0; k < table.values.x.size(); ++k) {
    worst = std::max(worst, std::fabs(loaded.values.x[k] - table.values.x[k]));
    worst = std::max(worst, std::fabs(loaded.values.y[k] - table.values.y[k]));
  }
  CHECK(worst == 0.0);
}
