/// Mollifier profile, moderate scaling and assumption checks. The
/// normalization oracle is the closed form: in the plane the radial integral
/// of exp(-sqrt(1+r^2)) reduces to 2 pi integral_1^inf s e^-s ds = 4 pi / e.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracle_helpers.hpp"
#include "vortex/mollifier.hpp"
#include "vortex/rng.hpp"

using namespace vortex;

TEST_CASE("normalization against the closed form") {
  const double cbar = mollifier_normalization();
  const double exact = std::exp(1.0) / (4.0 * kPi);
  CHECK(cbar == doctest::Approx(exact).epsilon(1e-12));
  // V(0) = Cbar / e = 1 / (4 pi)
  CHECK(mollifier_value({0.0, 0.0}) == doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-12));
}

TEST_CASE("radial symmetry and positivity") {
  const Vec2 y{1.2, -0.4};
  CHECK(mollifier_value(y) == mollifier_value(-y));
  CHECK(mollifier_value(y) == doctest::Approx(mollifier_value({-0.4, 1.2})).epsilon(1e-15));
  CHECK(mollifier_value({35.0, 0.0}) > 0.0);
}

TEST_CASE("unit mass") {
  // radial mass reaches 1 well inside a half-width-40 box
  CHECK(std::fabs(mollifier_radial_mass(40.0) - 1.0) < 1e-8);

  // brute 2D grid quadrature over the box as an independent check
  const int M = 1024;
  const double L = 40.0;
  const double h = 2.0 * L / M;
  double mass = 0.0;
  for (int iy = 0; iy < M; ++iy) {
    for (int ix = 0; ix < M; ++ix) {
      mass += mollifier_value({-L + ix * h, -L + iy * h});
    }
  }
  mass *= h * h;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("moderate scaling identities") {
  SUBCASE("N = 1 reduces to V") {
    const auto spec = make_mollifier_spec(0.2, 1.1, 1);
    CHECK(mollified_value(spec, {0.0, 0.0}) == mollifier_value({0.0, 0.0}));
  }

  SUBCASE("scaling identity V^N(y) = N^beta V(N^(beta/2) y)") {
    const auto spec = make_mollifier_spec(0.2, 1.1, 1000);
    Rng rng(2, 1, 7);
    const double nb = std::pow(1000.0, 0.2);
    const double nbd = std::pow(1000.0, 0.1);
    for (int i = 0; i < 100; ++i) {
      const Vec2 y{(rng.uniform() - 0.5) * 8.0, (rng.uniform() - 0.5) * 8.0};
      const double lhs = mollified_value(spec, y);
      const double rhs = nb * mollifier_value(y * nbd);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
    }
  }

  SUBCASE("peak ratio at N = 4096") {
    const auto spec = make_mollifier_spec(0.2, 1.1, 4096);
    const double ratio = mollified_value(spec, {0.0, 0.0}) / mollifier_value({0.0, 0.0});
    CHECK(ratio == doctest::Approx(std::pow(4096.0, 0.2)).epsilon(1e-12));
  }

  SUBCASE("mass preserved by scaling") {
    const auto spec = make_mollifier_spec(0.2, 1.1, 1000);
    const double r99 = 40.0 * spec.bandwidth();
    CHECK(mollified_radial_mass(spec, r99) == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("assumption constants") {
  const auto rep = check_mollifier_assumption(1.1, 60.0);
  // |grad V| = V r / sqrt(1+r^2) < V, approaching equality at large radius
  CHECK(rep.ok);
  CHECK(rep.c_grad <= 1.0 + 1e-12);
  CHECK(rep.c_grad > 0.999);
  CHECK(std::isfinite(rep.c_decay));
  CHECK(rep.c_decay > 0.0);

  // gradient vanishes at the radial minimum
  CHECK(mollifier_radial_derivative(0.0) == 0.0);
}

TEST_CASE("admissibility gate") {
  CHECK_NOTHROW(make_mollifier_spec(0.2, 1.1, 100));
  // 0.24 > 1 / (1 + 2/d + 2 alpha) ~ 0.238 for alpha = 1.1
  CHECK_THROWS_AS(make_mollifier_spec(0.24, 1.1, 100), AssumptionError);
  CHECK_THROWS_AS(make_mollifier_spec(-0.1, 1.1, 100), AssumptionError);
  CHECK_THROWS_AS(make_mollifier_spec(0.2, 0.9, 100), AssumptionError);  // alpha <= d/2
  CHECK(beta_upper_bound_martingale(2) == doctest::Approx(1.0 / 3.0));
  CHECK(beta_upper_bound_qv(1.1, 2) == doctest::Approx(1.0 / 4.2));
}

TEST_CASE("radial lookup table accuracy") {
  const RadialLut& lut = mollifier_lut();
  double worst = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double u = 37.0 * i / 20000.0;
    const double exact = mollifier_value_radial(u);
    worst = std::max(worst, std::fabs(lut.value(u) - exact) / exact);
  }
  CHECK(worst < 1e-9);
  CHECK(lut.value(40.0) == 0.0);  // beyond the 1e-16 cutoff
}

TEST_CASE("radial mass inversion") {
  for (double m : {0.01, 0.1, 0.5, 0.9, 0.999}) {
    const double r = mollifier_radial_mass_inverse(m);
    CHECK(mollifier_radial_mass(r) == doctest::Approx(m).epsilon(1e-6));
  }
}
