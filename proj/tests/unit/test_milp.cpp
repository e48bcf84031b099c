#include <doctest.h>

#include <nlohmann/json.hpp>

#include "../support.hpp"
#include "relumip/milp.hpp"

using namespace relumip;

namespace {

// Random bounded MILP with a few binaries coupled to continuous variables.
MilpModel random_milp(std::uint64_t seed, int binaries) {
  Rng rng(seed);
  std::uniform_real_distribution<double> coef(-3.0, 3.0), pos(0.5, 3.0);
  MilpModel m;
  for (int i = 0; i < binaries; ++i) m.add_binary("z" + std::to_string(i));
  const int cont = 1 + static_cast<int>(rng() % 3);
  for (int j = 0; j < cont; ++j) m.base.add_variable("y" + std::to_string(j), -pos(rng), pos(rng));
  const int n = m.base.num_variables();
  const int rows = 2 + static_cast<int>(rng() % 4);
  for (int r = 0; r < rows; ++r) {
    std::vector<Term> t;
    for (int j = 0; j < n; ++j)
      if (rng() % 2) t.push_back({j, coef(rng)});
    m.base.add_constraint(t, Relation::less_equal, pos(rng));
  }
  std::vector<Term> obj;
  for (int j = 0; j < n; ++j) obj.push_back({j, coef(rng)});
  m.base.set_objective(rng() % 2 ? Sense::maximize : Sense::minimize, obj);
  return m;
}

bool better_or_equal(Sense sense, double a, double b, double tol) {
  return sense == Sense::maximize ? a >= b - tol : a <= b + tol;
}

}  // namespace

TEST_SUITE("milp") {
  TEST_CASE("cardinality example") {
    MilpModel m;
    for (int i = 0; i < 3; ++i) m.add_binary("x" + std::to_string(i));
    m.base.add_constraint({{0, 1}, {1, 1}, {2, 1}}, Relation::less_equal, 2);
    m.base.set_objective(Sense::maximize, {{0, 1}, {1, 1}, {2, 1}});
    MilpResult r = solve_milp(m);
    REQUIRE(r.status == MilpStatus::optimal);
    CHECK(*r.objective_value == doctest::Approx(2.0));
  }

  TEST_CASE("knapsack matches enumeration") {
    MilpModel m;
    int a = m.add_binary("a"), b = m.add_binary("b"), c = m.add_binary("c");
    m.base.add_constraint({{a, 2}, {b, 3}, {c, 4}}, Relation::less_equal, 5);
    m.base.set_objective(Sense::maximize, {{a, 5}, {b, 4}, {c, 3}});
    MilpResult r = solve_milp(m);
    REQUIRE(r.status == MilpStatus::optimal);
    CHECK(*r.objective_value == doctest::Approx(9.0));
    CHECK((*r.incumbent)[a] == 1.0);
    CHECK((*r.incumbent)[b] == 1.0);
    CHECK((*r.incumbent)[c] == 0.0);
    CHECK(*testing::binary_enumeration(m) == doctest::Approx(9.0));
    CHECK(r.best_bound >= *r.objective_value - 1e-9);
  }

  TEST_CASE("tiny time limit returns the root bound") {
    MilpModel m;
    int a = m.add_binary("a"), b = m.add_binary("b"), c = m.add_binary("c");
    m.base.add_constraint({{a, 2}, {b, 3}, {c, 4}}, Relation::less_equal, 6);
    m.base.set_objective(Sense::maximize, {{a, 5}, {b, 4}, {c, 3}});
    SolveParams p;
    p.time_limit_seconds = 1e-12;
    MilpResult r = solve_milp(m, p);
    CHECK(r.status == MilpStatus::bound_only);
    CHECK_FALSE(r.has_incumbent());
    CHECK(r.gap == kInf);
    // Root LP takes a, b and a quarter of c.
    CHECK(r.best_bound == doctest::Approx(9.75));
    CHECK(solve_lp(m.base).objective_value == doctest::Approx(9.75));
  }

  TEST_CASE("infeasible and validation") {
    MilpModel m;
    int a = m.add_binary("a");
    m.base.add_constraint({{a, 1}}, Relation::greater_equal, 0.4);
    m.base.add_constraint({{a, 1}}, Relation::less_equal, 0.6);
    CHECK(solve_milp(m).status == MilpStatus::infeasible);

    MilpModel bad;
    int v = bad.base.add_variable("v", 0, 2);
    bad.mark_binary(v);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }

  TEST_CASE("enumeration equivalence") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      const int nb = 1 + static_cast<int>(seed % 12);
      MilpModel m = random_milp(seed, nb);
      auto oracle = testing::binary_enumeration(m);
      MilpResult r = solve_milp(m);
      INFO("seed " << seed);
      if (!oracle) {
        CHECK(r.status == MilpStatus::infeasible);
        continue;
      }
      REQUIRE(r.status == MilpStatus::optimal);
      CHECK(std::abs(*r.objective_value - *oracle) <= 1e-6 * std::max(1.0, std::abs(*oracle)));
      CHECK(m.base.max_violation(*r.incumbent) <= 1e-7);
      for (int b : m.binaries) {
        const double z = (*r.incumbent)[b];
        CHECK((z == 0.0 || z == 1.0));
      }
    }
  }

  TEST_CASE("dual bound is valid under node limits") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      MilpModel m = random_milp(seed + 1000, 10);
      auto oracle = testing::binary_enumeration(m);
      if (!oracle) continue;
      for (long limit : {1L, 3L, 10L}) {
        SolveParams p;
        p.node_limit = limit;
        MilpResult r = solve_milp(m, p);
        INFO("seed " << seed << " limit " << limit);
        CHECK(better_or_equal(m.base.sense(), r.best_bound, *oracle, 1e-7));
        if (r.has_incumbent()) {
          CHECK(better_or_equal(m.base.sense(), *oracle, *r.objective_value, 1e-7));
          const double expected =
              std::abs(r.best_bound - *r.objective_value) / std::max(std::abs(*r.objective_value), 1e-10);
          CHECK(r.gap == doctest::Approx(expected));
        }
      }
    }
  }

  TEST_CASE("tightening a bound never increases the maximization bound") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      MilpModel m = random_milp(seed + 2000, 6);
      m.base.set_sense(Sense::maximize);
      MilpResult r0 = solve_milp(m);
      if (r0.status != MilpStatus::optimal) continue;
      const int j = m.base.num_variables() - 1;
      const auto& v = m.base.variable(j);
      m.base.set_bounds(j, v.lower, 0.5 * (v.lower + v.upper));
      MilpResult r1 = solve_milp(m);
      if (r1.status == MilpStatus::infeasible) continue;
      CHECK(r1.best_bound <= r0.best_bound + 1e-9);
    }
  }

  TEST_CASE("deterministic without time limit") {
    MilpModel m = random_milp(77, 10);
    MilpResult a = solve_milp(m), b = solve_milp(m);
    CHECK(a.node_count == b.node_count);
    CHECK(a.incumbent == b.incumbent);
  }

  TEST_CASE("json report") {
    MilpModel m;
    int a = m.add_binary("a");
    m.base.set_objective(Sense::maximize, {{a, 1}});
    nlohmann::json j = solve_milp(m);
    CHECK(j["status"] == "optimal");
    CHECK(j["objective_value"].get<double>() == 1.0);
  }
}
