#include <doctest.h>

#include "../support.hpp"
#include "relumip/oracles.hpp"

using namespace relumip;
using relumip::testing::abs_net;
using relumip::testing::random_net;

namespace {

double milp_extremum(const ReluNetwork& net, const Box& box, Sense sense) {
  MilpModel m;
  NetworkEmbedding e = embed_network(m, net, lrr_bounds(net, box));
  m.base.set_objective(sense, {{e.outputs()[0], 1.0}});
  SolveParams p;
  p.gap_tolerance = 0.0;
  p.absolute_gap = 1e-12;
  MilpResult r = solve_milp(m, p);
  REQUIRE(r.status == MilpStatus::optimal);
  return *r.objective_value;
}

}  // namespace

TEST_SUITE("oracles") {
  TEST_CASE("roots by bisection") {
    auto r = find_roots([](double x) { return x * x - 0.25; }, -1.0, 1.0);
    REQUIRE(r.size() == 2);
    CHECK(r[0] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(r[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(find_roots([](double x) { return x * x + 1.0; }, -1.0, 1.0).empty());
    auto z = find_roots([](double x) { return x; }, -1.0, 1.0, 10);
    REQUIRE(z.size() == 1);
    CHECK(z[0] == 0.0);
  }

  TEST_CASE("grid search") {
    const ReluNetwork net = abs_net();
    ScalarFn f = [&](std::span<const double> x) { return forward(net, x)[0]; };
    GridResult g = brute_force_optimum(f, nullptr, Box{{-1.0, 1.0}}, 101, 0.0, Sense::minimize);
    REQUIRE(g.found);
    CHECK(g.value == 0.0);
    CHECK(g.x[0] == doctest::Approx(0.0));
    CHECK(g.points == 101);
    // With a band constraint |x - 0.5| <= 0.0105 the minimum sits near 0.49.
    ScalarFn c = [](std::span<const double> x) { return x[0] - 0.5; };
    GridResult gc = brute_force_optimum(f, c, Box{{-1.0, 1.0}}, 2001, 0.0105, Sense::minimize);
    REQUIRE(gc.found);
    CHECK(gc.value == doctest::Approx(0.49).epsilon(1e-9));
    CHECK_THROWS_AS(brute_force_optimum(f, nullptr, Box(3, {-1.0, 1.0}), 1000, 0.0, Sense::minimize),
                    std::invalid_argument);
  }

  TEST_CASE("one dimensional level-set oracle") {
    const ReluNetwork net2 = abs_net();
    // f1(x) = x, level set |x| = 0.5 → minimum -0.5.
    ReluNetwork net1({DenseLayer{1, 1, {1.0}, {0.0}}});
    GridResult g = qn_oracle_1d(net1, net2, 0.5);
    REQUIRE(g.found);
    CHECK(g.value == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK_FALSE(qn_oracle_1d(net1, net2, 2.0).found);
  }

  TEST_CASE("two dimensional level-set oracle") {
    // f2(x) = x0 + x1 = 0 and f1(x) = x0: minimum -1 at (-1, 1).
    ReluNetwork net1({DenseLayer{2, 1, {1.0, 0.0}, {0.0}}});
    ReluNetwork net2({DenseLayer{2, 1, {1.0, 1.0}, {0.0}}});
    GridResult g = qn_oracle_2d(net1, net2, 0.0, 200);
    REQUIRE(g.found);
    CHECK(g.value == doctest::Approx(-1.0).epsilon(1e-6));
  }

  TEST_CASE("activation pattern enumeration agrees with the MILP") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      ReluNetwork net = random_net({2, 4, 3, 1}, seed);
      Box box(2, {-1.0, 1.0});
      PatternExtrema p = pattern_extrema(net, box);
      INFO("seed " << seed);
      CHECK(p.patterns == 128);
      CHECK(p.feasible_patterns >= 1);
      CHECK(std::abs(p.min - milp_extremum(net, box, Sense::minimize)) <= 1e-6);
      CHECK(std::abs(p.max - milp_extremum(net, box, Sense::maximize)) <= 1e-6);

      GridResult gmax = brute_force_optimum([&](std::span<const double> x) { return forward(net, x)[0]; }, nullptr,
                                            box, 301, 0.0, Sense::maximize);
      CHECK(gmax.value <= p.max + 1e-12);
    }
    CHECK_THROWS_AS(pattern_extrema(random_net({2, 9, 8, 1}, 1), Box(2, {-1.0, 1.0})), std::invalid_argument);
  }
}
