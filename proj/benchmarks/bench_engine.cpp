#include <benchmark/benchmark.h>

#include "resroute/harness.hpp"

using namespace resroute;

namespace {

ScenarioConfig grid_scenario(ProtocolKind kind, std::int64_t vehicles) {
  ScenarioConfig c;
  GridSpec g;
  g.rows = 20;
  g.cols = 20;
  g.edge_length = 200;
  g.capacity = 300;
  c.network.grid = g;
  c.demand.per_block = vehicles;
  c.demand.block_length = 600;
  ProtocolConfig p;
  p.id = "p";
  p.kind = kind;
  c.protocols.push_back(p);
  return c;
}

}  // namespace

// Whole-run cost per simulated vehicle on a 20x20 grid.
static void BM_RunDynSp(benchmark::State& state) {
  const ScenarioConfig c = grid_scenario(ProtocolKind::kDynSp, state.range(0));
  const RoadNetwork net = build_network(c);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_scenario(c, net));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunDynSp)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_RunBeeJama(benchmark::State& state) {
  const ScenarioConfig c = grid_scenario(ProtocolKind::kBeeJama, state.range(0));
  const RoadNetwork net = build_network(c);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_scenario(c, net));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunBeeJama)->Arg(200)->Unit(benchmark::kMillisecond);

// Single engine steps with a loaded network.
static void BM_EngineStep(benchmark::State& state) {
  const ScenarioConfig c = grid_scenario(ProtocolKind::kDynSp, 2000);
  const RoadNetwork net = build_network(c);
  auto trips = generate_demand(c.demand, net);
  std::vector<std::unique_ptr<GuidanceProtocol>> p;
  p.push_back(make_protocol(c.protocols[0], c, net));
  Engine engine(net, std::move(p), trips);
  for (auto _ : state) {
    if (engine.finished()) state.SkipWithError("scenario finished early");
    engine.step();
  }
}
BENCHMARK(BM_EngineStep)->Iterations(600);

BENCHMARK_MAIN();
