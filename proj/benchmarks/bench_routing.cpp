#include <benchmark/benchmark.h>

#include "resroute/baseline.hpp"
#include "resroute/beejama.hpp"
#include "resroute/network.hpp"

using namespace resroute;

namespace {

RoadNetwork square_grid(int n) {
  GridSpec g;
  g.rows = n;
  g.cols = n;
  g.edge_length = 200;
  return generate_grid(g);
}

std::vector<Seconds> free_flow_costs(const RoadNetwork& net) {
  std::vector<Seconds> c;
  for (LinkIndex l = 0; l < net.link_count(); ++l) c.push_back(net.t0(l));
  return c;
}

}  // namespace

static void BM_FloodUpstream(benchmark::State& state) {
  const RoadNetwork net = square_grid(static_cast<int>(state.range(0)));
  BeeJamaConfig cfg;
  const Hierarchy h = build_hierarchy(net, cfg.layer_cell_sizes, cfg.hop_limits, cfg.overlap);
  RoutingTables tables(h, net.node_count());
  const auto cost = free_flow_costs(net);
  std::int64_t generation = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(flood_upstream(h, net, cost, generation++, tables));
  }
  state.SetComplexityN(static_cast<std::int64_t>(net.node_count()));
}
BENCHMARK(BM_FloodUpstream)->Arg(10)->Arg(20)->Arg(40)->Complexity();

static void BM_AStar(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RoadNetwork net = square_grid(n);
  const WeightSnapshot s = WeightSnapshot::free_flow(net);
  const auto last = static_cast<NodeIndex>(net.node_count() - 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(astar(net, 0, last, s));
  }
  state.SetComplexityN(static_cast<std::int64_t>(net.node_count()));
}
BENCHMARK(BM_AStar)->Arg(10)->Arg(20)->Arg(40)->Arg(80)->Complexity();

static void BM_TimeDependentAStar(benchmark::State& state) {
  const RoadNetwork net = square_grid(static_cast<int>(state.range(0)));
  ReservationLedger ledger(net.link_count(), 60);
  const TimeDependentCost cost = [&](LinkIndex l, Seconds t) {
    return reserved_travel_time(net, ledger, l, t, ReservationFlow::kSlotCount);
  };
  const auto last = static_cast<NodeIndex>(net.node_count() - 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(time_dependent_astar(net, 0, last, 0.0, cost));
  }
}
BENCHMARK(BM_TimeDependentAStar)->Arg(10)->Arg(20)->Arg(40);
