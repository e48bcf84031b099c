#include <benchmark/benchmark.h>

#include "relumip/bt.hpp"
#include "relumip/net.hpp"

using namespace relumip;

namespace {

const char* const kSchemes[] = {"lrr", "rr", "lr", "semi-rr", "no-r"};

}  // namespace

static void BM_Tighten(benchmark::State& state) {
  const std::vector<int> dims{2, 10, 10, 1};
  ReluNetwork net = he_initialize(dims, 5);
  const Box D(2, {-1.0, 1.0});
  const BtScheme scheme = BtScheme::parse(kSchemes[state.range(0)]);
  state.SetLabel(kSchemes[state.range(0)]);
  for (auto _ : state) {
    BtReport r = tighten(net, D, std::nullopt, scheme);
    benchmark::DoNotOptimize(r.mad);
  }
}
BENCHMARK(BM_Tighten)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);
