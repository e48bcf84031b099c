#include <random>

#include <benchmark/benchmark.h>

#include "relumip/lp.hpp"
#include "relumip/random.hpp"

using namespace relumip;

namespace {

// Dense box-constrained LP with m random <= rows; always feasible at x = 0.
LinearModel random_lp(int n, int m, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  LinearModel lp;
  for (int j = 0; j < n; ++j) lp.add_variable("x" + std::to_string(j), -1.0, 1.0);
  for (int i = 0; i < m; ++i) {
    std::vector<Term> row;
    for (int j = 0; j < n; ++j) row.push_back({j, u(rng)});
    lp.add_constraint(std::move(row), Relation::less_equal, 1.0 + std::abs(u(rng)));
  }
  std::vector<Term> obj;
  for (int j = 0; j < n; ++j) obj.push_back({j, u(rng)});
  lp.set_objective(Sense::maximize, std::move(obj));
  return lp;
}

}  // namespace

static void BM_LpCold(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  LinearModel lp = random_lp(n, n, 7);
  long iters = 0;
  for (auto _ : state) {
    LpSolution s = solve_lp(lp);
    iters = s.iterations;
    benchmark::DoNotOptimize(s.objective_value);
  }
  state.counters["pivots"] = static_cast<double>(iters);
}
BENCHMARK(BM_LpCold)->Arg(10)->Arg(40)->Arg(100)->Unit(benchmark::kMicrosecond);

// Bound change followed by a warm re-solve, the pattern used during branching.
static void BM_LpWarm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  LpSolver solver(random_lp(n, n, 7));
  solver.solve();
  int j = 0;
  for (auto _ : state) {
    solver.set_bounds(j, -1.0, 0.0);
    benchmark::DoNotOptimize(solver.solve().objective_value);
    solver.set_bounds(j, -1.0, 1.0);
    j = (j + 1) % n;
  }
}
BENCHMARK(BM_LpWarm)->Arg(10)->Arg(40)->Arg(100)->Unit(benchmark::kMicrosecond);
