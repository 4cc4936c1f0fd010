/// Information-functional oracles: closed-form Gaussian entropy and Fisher
/// values, the inequality batteries (Gibbs, Pinsker, Donsker-Varadhan), the
/// bounded-Lipschitz bracket, and the quadratic-variation reduction.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "oracle_helpers.hpp"
#include "vortex/assignment.hpp"
#include "vortex/infometrics.hpp"

using namespace vortex;
using namespace vortex::testing;

namespace {

const GridSpec kGrid{8.0, 256};

// random mixture of 1-3 gaussians with a small uniform pedestal; exactly
// normalized so the discrete inequalities hold without mass slack
ScalarField random_density(Rng& rng) {
  ScalarField f(kGrid);
  const int nc = 1 + static_cast<int>(rng.uniform_index(3));
  for (int c = 0; c < nc; ++c) {
    const Vec2 mu{(rng.uniform() - 0.5) * 3.0, (rng.uniform() - 0.5) * 3.0};
    const double s2 = 0.15 + rng.uniform() * 0.8;
    const double w = 0.2 + rng.uniform();
    for (int iy = 0; iy < kGrid.M; ++iy) {
      for (int ix = 0; ix < kGrid.M; ++ix) {
        const Vec2 d = Vec2{kGrid.coord(ix), kGrid.coord(iy)} - mu;
        f.at(ix, iy) += w * std::exp(-d.norm2() / (2.0 * s2)) / (kTwoPi * s2);
      }
    }
  }
  for (double& v : f.v) v += 1e-8;  // pedestal keeps all support floors away
  normalize_mass(f);
  return f;
}

}  // namespace

TEST_CASE("relative entropy") {
  SUBCASE("identical fields give exactly zero") {
    const ScalarField f = gaussian_field(kGrid, {0.2, 0.1}, 0.3);
    CHECK(relative_entropy(f, f) == 0.0);
  }

  SUBCASE("equal-covariance gaussian pair matches the closed form") {
    const Vec2 mu1{0.15, -0.1};
    const Vec2 mu2{-0.15, 0.1};
    const double s2 = 0.25;
    const ScalarField f = gaussian_field(kGrid, mu1, s2);
    const ScalarField g = gaussian_field(kGrid, mu2, s2);
    const double exact = gaussian_kl(mu1, mu2, s2);
    CHECK(relative_entropy(f, g) == doctest::Approx(exact).epsilon(1e-4 / exact));
    CHECK(std::fabs(relative_entropy(f, g) - exact) < 1e-4);
  }

  SUBCASE("support mismatch is an error, not a clip") {
    const ScalarField f = gaussian_field(kGrid, {0.0, 0.0}, 1.0);
    const ScalarField g = gaussian_field(kGrid, {0.0, 0.0}, 0.02);  // tails underflow
    CHECK_THROWS_AS(relative_entropy(f, g), SupportMismatchError);
  }
}

TEST_CASE("fisher information") {
  SUBCASE("identical fields vanish") {
    const ScalarField f = gaussian_field(kGrid, {0.1, 0.0}, 0.3);
    CHECK(fisher_information(f, f) < 1e-8);
  }

  SUBCASE("equal-covariance gaussian pair matches the closed form") {
    const Vec2 mu1{0.15, -0.1};
    const Vec2 mu2{-0.15, 0.1};
    const double s2 = 0.25;
    const ScalarField f = gaussian_field(kGrid, mu1, s2);
    const ScalarField g = gaussian_field(kGrid, mu2, s2);
    const double exact = gaussian_fisher(mu1, mu2, s2);
    CHECK(std::fabs(fisher_information(f, g) - exact) < 1e-3);
  }

  SUBCASE("invariant under rescaling of the reference") {
    const ScalarField f = gaussian_field(kGrid, {0.15, -0.1}, 0.25);
    ScalarField g = gaussian_field(kGrid, {-0.15, 0.1}, 0.25);
    const double base = fisher_information(f, g);
    for (double& v : g.v) v *= 3.7;  // unnormalized reference
    CHECK(fisher_information(f, g) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("l1 distance") {
  const ScalarField f = gaussian_field(kGrid, {0.15, -0.1}, 0.25);
  SUBCASE("identical fields") { CHECK(l1_distance(f, f) == 0.0); }

  SUBCASE("disjointly supported bumps have distance 2") {
    const ScalarField a = gaussian_field(kGrid, {-4.0, 0.0}, 0.05);
    const ScalarField b = gaussian_field(kGrid, {4.0, 0.0}, 0.05);
    CHECK(l1_distance(a, b) == doctest::Approx(2.0).epsilon(1e-6));
  }

  SUBCASE("matches a refined-grid oracle") {
    const GridSpec fine{8.0, 1024};
    const ScalarField g = gaussian_field(kGrid, {-0.15, 0.1}, 0.25);
    const ScalarField ff = gaussian_field(fine, {0.15, -0.1}, 0.25);
    const ScalarField gf = gaussian_field(fine, {-0.15, 0.1}, 0.25);
    CHECK(std::fabs(l1_distance(f, g) - l1_distance(ff, gf)) < 1e-5);
  }
}

TEST_CASE("kr bracket") {
  Rng rng(41, 5, 0);

  SUBCASE("two diracs at distance 1/2 collapse the bracket") {
    const std::vector<Vec2> xs{{0.1, 0.2}};
    const std::vector<Vec2> ys{{0.1 + 0.3, 0.2 + 0.4}};  // distance 0.5
    const KrMeasure a = kr_measure_from_points(xs);
    const KrMeasure b = kr_measure_from_points(ys);
    const KrBracket br = kr_distance(a, b, 16, 1, rng);
    CHECK(br.lower == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(br.upper == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("identical measures at 2048 samples") {
    const ScalarField f = gaussian_field(kGrid, {0.0, 0.0}, 0.04);  // sd 0.2
    const KrMeasure a = kr_measure_from_field(f);
    const KrMeasure b = kr_measure_from_field(f);
    const KrBracket br = kr_distance(a, b, 2048, 1, rng);
    std::printf("kr identical-measure bracket: (%.5f, %.5f)\n", br.lower, br.upper);
    CHECK(br.lower < 1e-12);
    CHECK(br.upper < 0.02);
  }

  SUBCASE("translated gaussian pair brackets the shift length") {
    const ScalarField f = gaussian_field(kGrid, {-0.15, 0.0}, 0.04);
    const ScalarField g = gaussian_field(kGrid, {0.15, 0.0}, 0.04);
    const KrMeasure a = kr_measure_from_field(f);
    const KrMeasure b = kr_measure_from_field(g);
    const KrBracket br = kr_distance(a, b, 2048, 2, rng);
    std::printf("kr translated-pair bracket: (%.5f, %.5f)\n", br.lower, br.upper);
    CHECK(br.lower >= 0.2);
    CHECK(br.upper >= 0.25);
    CHECK(br.upper <= 0.35);
  }

  SUBCASE("bracket order on random pairs") {
    Rng gen(43, 5, 1);
    for (int i = 0; i < 10; ++i) {
      const ScalarField f = random_density(gen);
      const ScalarField g = random_density(gen);
      const KrBracket br = kr_distance(kr_measure_from_field(f), kr_measure_from_field(g), 256, 1,
                                       gen);
      CHECK(br.lower <= br.upper + 1e-9);
      CHECK(br.upper <= 2.0);
    }
  }
}

TEST_CASE("donsker-varadhan") {
  const ScalarField f = gaussian_field(kGrid, {0.2, -0.1}, 0.3);
  const ScalarField g = gaussian_field(kGrid, {-0.1, 0.2}, 0.4);

  SUBCASE("constant test function reduces to nonnegativity of entropy") {
    ScalarField phi(kGrid);
    for (double& v : phi.v) v = 1.7;
    const DvReport rep = dv_check(f, g, phi, 2.0);
    CHECK(rep.holds);
    CHECK(rep.lhs == doctest::Approx(1.7).epsilon(1e-10));
    CHECK(rep.rhs - rep.lhs == doctest::Approx(2.0 * rep.entropy).epsilon(1e-8));
  }

  SUBCASE("variational equality at phi = ln(f/g), eta = 1") {
    ScalarField phi(kGrid);
    for (std::size_t k = 0; k < phi.v.size(); ++k) {
      phi.v[k] = std::log(std::max(f.v[k], 1e-300) / std::max(g.v[k], 1e-300));
    }
    const DvReport rep = dv_check(f, g, phi, 1.0);
    CHECK(rep.holds);
    CHECK(std::fabs(rep.rhs - rep.lhs) < 1e-6);
  }

  SUBCASE("overflow gate") {
    ScalarField phi(kGrid);
    for (double& v : phi.v) v = 2000.0;
    CHECK_THROWS_AS(dv_check(f, g, phi, 1.0), NumericalError);
  }

  SUBCASE("holds on 100 randomized triples") {
    Rng gen(47, 5, 2);
    int violations = 0;
    for (int i = 0; i < 100; ++i) {
      const ScalarField ff = random_density(gen);
      const ScalarField gg = random_density(gen);
      ScalarField phi(kGrid);
      const Vec2 c{(gen.uniform() - 0.5) * 2.0, (gen.uniform() - 0.5) * 2.0};
      const double w = 0.2 + gen.uniform();
      const double amp = (gen.uniform() - 0.5) * 6.0;
      for (int iy = 0; iy < kGrid.M; ++iy) {
        for (int ix = 0; ix < kGrid.M; ++ix) {
          const Vec2 d = Vec2{kGrid.coord(ix), kGrid.coord(iy)} - c;
          phi.at(ix, iy) = amp * std::exp(-d.norm2() / (2.0 * w));
        }
      }
      const double eta = std::exp(std::log(0.5) + gen.uniform() * std::log(100.0));
      if (!dv_check(ff, gg, phi, eta, 1e-8).holds) ++violations;
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("gibbs and pinsker on randomized pairs") {
  Rng gen(53, 5, 3);
  int gibbs_violations = 0;
  int ckp_violations = 0;
  for (int i = 0; i < 100; ++i) {
    const ScalarField f = random_density(gen);
    const ScalarField g = random_density(gen);
    const double h = relative_entropy(f, g);
    const double l1 = l1_distance(f, g);
    if (h < -1e-8) ++gibbs_violations;
    if (2.0 * h < l1 * l1 - 1e-8) ++ckp_violations;
  }
  CHECK(gibbs_violations == 0);
  CHECK(ckp_violations == 0);
}

TEST_CASE("assignment solver agrees with brute force") {
  Rng gen(59, 5, 4);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(gen.uniform_index(5));
    std::vector<double> cost(n * n);
    for (double& c : cost) c = gen.uniform();
    const AssignmentResult res = solve_assignment(cost, n);
    // brute-force over permutations
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    double best = 1e300;
    do {
      double tot = 0.0;
      for (int i = 0; i < n; ++i) tot += cost[i * n + perm[i]];
      best = std::min(best, tot);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(res.total_cost == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("quadratic variation diagnostic") {
  SUBCASE("single static particle matches the analytic reduction") {
    // integrand reduces to (N^(2 beta / d) / 2) integral |grad V|^2 / V
    const auto moll = make_mollifier_spec(0.2, 1.1, 1000);
    const GridSpec g{8.0, 512};
    const std::vector<Vec2> pos{{0.0, 0.0}};
    const double T = 0.02;
    const std::vector<double> times{0.0, 0.5 * T, T};
    const std::vector<std::vector<Vec2>> traj{pos, pos, pos};
    std::vector<ScalarField> fields;
    for (int s = 0; s < 3; ++s) fields.push_back(mollified_density(pos, moll, g));
    const auto qv = qv_cumulative(traj, moll, fields, times);
    const double expected = 0.5 * std::pow(1000.0, 0.2) * grad_sq_over_v_oracle() * T;
    std::printf("qv single-particle: got %.8g expected %.8g\n", qv.back(), expected);
    CHECK(std::fabs(qv.back() - expected) / expected < 0.01);
  }

  SUBCASE("doubling N at fixed beta scales by 2^(2 beta / d - 1)") {
    const GridSpec g{8.0, 512};
    auto coincident_value = [&](std::int64_t n) {
      const auto moll = make_mollifier_spec(0.2, 1.1, n);
      const std::vector<Vec2> pos(static_cast<std::size_t>(n), Vec2{0.0, 0.0});
      const std::vector<double> times{0.0, 1.0};
      const std::vector<std::vector<Vec2>> traj{pos, pos};
      std::vector<ScalarField> fields{mollified_density(pos, moll, g),
                                      mollified_density(pos, moll, g)};
      return qv_cumulative(traj, moll, fields, times).back();
    };
    const double ratio = coincident_value(32) / coincident_value(16);
    CHECK(ratio == doctest::Approx(std::pow(2.0, 0.2 - 1.0)).epsilon(1e-3));
  }
}

TEST_CASE("entropy trace invariants and csv") {
  EntropyTrace tr;
  tr.times = {0.0, 0.1};
  tr.entropy = {0.5, 0.4};
  tr.fisher = {1.0, 0.9};
  tr.l1 = {0.3, 0.2};
  tr.kr_lower = {0.05, 0.04};
  tr.kr_upper = {0.2, 0.18};
  tr.qv_cum = {0.0, 0.01};
  tr.check_invariants(0, "test");
  tr.check_invariants(1, "test");
  CHECK(tr.violations.empty());
  CHECK(tr.sup_entropy() == 0.5);

  tr.entropy[1] = -1.0;  // forced violation is recorded, not thrown
  tr.check_invariants(1, "test");
  // flags both the Gibbs failure and the CKP failure it implies
  CHECK(tr.violations.size() == 2);

  tr.write_csv("/tmp/vortex_trace_test.csv");
  std::ifstream in("/tmp/vortex_trace_test.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,H,I,l1,kr_lo,kr_hi,qv_cum");
}
