#include <benchmark/benchmark.h>

#include "relumip/bt.hpp"
#include "relumip/encode.hpp"
#include "relumip/milp.hpp"
#include "relumip/net.hpp"

using namespace relumip;

static void BM_MaximizeNetOutput(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  const std::vector<int> dims{2, width, width, 1};
  ReluNetwork net = he_initialize(dims, 3);
  const Box box(2, {-1.0, 1.0});
  MilpModel m;
  NetworkEmbedding e = embed_network(m, net, lrr_bounds(net, box));
  m.base.set_objective(Sense::maximize, {{e.outputs()[0], 1.0}});
  long nodes = 0;
  for (auto _ : state) {
    MilpResult r = solve_milp(m);
    nodes = r.node_count;
    benchmark::DoNotOptimize(r.best_bound);
  }
  state.counters["nodes"] = static_cast<double>(nodes);
}
BENCHMARK(BM_MaximizeNetOutput)->Arg(4)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);
