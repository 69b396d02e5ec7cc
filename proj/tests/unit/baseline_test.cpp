#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "resroute/baseline.hpp"
#include "resroute/error.hpp"

using namespace resroute;

namespace {

RoadNetwork grid(int rows, int cols, double edge = 100.0) {
  GridSpec spec;
  spec.rows = rows;
  spec.cols = cols;
  spec.edge_length = edge;
  spec.free_speed = 10.0;
  spec.capacity = 600.0;
  return generate_grid(spec);
}

WeightSnapshot random_weights(const RoadNetwork& net, std::mt19937_64& rng) {
  WeightSnapshot s = WeightSnapshot::free_flow(net);
  std::uniform_real_distribution<double> factor(1.0, 4.0);
  for (auto& w : s.weights) w *= factor(rng);
  return s;
}

}  // namespace

TEST(AStar, OriginEqualsDestination) {
  const RoadNetwork net = grid(3, 3);
  const auto path = astar(net, 4, 4, WeightSnapshot::free_flow(net));
  ASSERT_EQ(path.size(), 1u);
  EXPECT_EQ(path[0], 4u);
}

TEST(AStar, UnreachableGivesEmptyPath) {
  std::vector<Node> nodes{{0, 0, 0}, {1, 100, 0}, {2, 200, 0}};
  Link l;
  l.id = 0;
  l.from = 0;
  l.to = 1;
  l.length = 100;
  l.free_speed = 10;
  l.capacity = l.capacity_hat = 600;
  const RoadNetwork net(nodes, {l});
  EXPECT_TRUE(astar(net, 0, 2, WeightSnapshot::free_flow(net)).empty());
  EXPECT_TRUE(astar(net, 1, 0, WeightSnapshot::free_flow(net)).empty());
}

TEST(AStar, RejectsUnknownNodes) {
  const RoadNetwork net = grid(2, 2);
  EXPECT_THROW(astar(net, 0, 99, WeightSnapshot::free_flow(net)), InvalidArgument);
}

TEST(AStar, UniformGridCostEqualsDijkstra) {
  const RoadNetwork net = grid(6, 7);
  const WeightSnapshot s = WeightSnapshot::free_flow(net);
  const auto arcs = oracle::arcs_of(net, s.weights);
  for (NodeIndex o = 0; o < net.node_count(); o += 5) {
    const auto dist = oracle::dijkstra(static_cast<int>(net.node_count()), arcs, static_cast<int>(o));
    for (NodeIndex d = 0; d < net.node_count(); ++d) {
      EXPECT_NEAR(path_cost(net, astar(net, o, d, s), s), dist[d], 1e-9);
    }
  }
}

TEST(AStar, RandomGraphsMatchDijkstra) {
  std::mt19937_64 rng(17);
  for (int g = 0; g < 40; ++g) {
    const int n = 5 + static_cast<int>(rng() % 196);
    const RoadNetwork net = oracle::random_network(rng, n, 2 * n, g % 3 != 0);
    const WeightSnapshot s = random_weights(net, rng);
    const auto arcs = oracle::arcs_of(net, s.weights);
    const auto o = static_cast<NodeIndex>(rng() % n);
    const auto dist = oracle::dijkstra(n, arcs, static_cast<int>(o));
    for (NodeIndex d = 0; d < net.node_count(); ++d) {
      const auto path = astar(net, o, d, s);
      if (dist[d] == oracle::kInf) {
        EXPECT_TRUE(path.empty());
      } else {
        ASSERT_FALSE(path.empty());
        EXPECT_EQ(path.front(), o);
        EXPECT_EQ(path.back(), d);
        EXPECT_NEAR(path_cost(net, path, s), dist[d], 1e-9 * (1 + dist[d]));
      }
    }
  }
}

TEST(AStar, HeuristicIsAdmissible) {
  std::mt19937_64 rng(23);
  for (int g = 0; g < 20; ++g) {
    const RoadNetwork net = oracle::random_network(rng, 40, 80);
    const WeightSnapshot s = random_weights(net, rng);
    const auto d = static_cast<NodeIndex>(rng() % 40);
    const auto to = oracle::dijkstra_to(40, oracle::arcs_of(net, s.weights), static_cast<int>(d));
    for (NodeIndex n = 0; n < net.node_count(); ++n) {
      if (to[n] == oracle::kInf) continue;
      EXPECT_LE(net.distance(n, d) / net.max_free_speed(), to[n] + 1e-9);
    }
  }
}

TEST(TimeDependentAStar, EmptyLedgerMatchesStaticAStar) {
  const RoadNetwork net = grid(5, 5);
  const ReservationLedger ledger(net.link_count(), 60);
  const TimeDependentCost cost = [&](LinkIndex l, Seconds t) {
    return reserved_travel_time(net, ledger, l, t, ReservationFlow::kSlotCount);
  };
  const WeightSnapshot s = WeightSnapshot::free_flow(net);
  for (NodeIndex o : {0u, 7u, 12u}) {
    for (NodeIndex d : {24u, 3u, 20u}) {
      const auto plan = time_dependent_astar(net, o, d, 100.0, cost);
      const auto links = links_of(net, astar(net, o, d, s));
      ASSERT_EQ(plan.entries.size(), links.size());
      Seconds clock = 100.0;
      for (std::size_t i = 0; i < links.size(); ++i) {
        EXPECT_EQ(plan.entries[i].link, links[i]);
        EXPECT_DOUBLE_EQ(plan.entries[i].t_enter, clock);
        clock += net.t0(links[i]);
        EXPECT_DOUBLE_EQ(plan.entries[i].t_exit, clock);
      }
    }
  }
}

TEST(TimeDependentAStar, OriginEqualsDestinationIsEmpty) {
  const RoadNetwork net = grid(2, 2);
  const auto plan = time_dependent_astar(net, 1, 1, 0.0, [&](LinkIndex l, Seconds) { return net.t0(l); });
  EXPECT_TRUE(plan.entries.empty());
}

TEST(TimeDependentAStar, DetoursAroundLoadedLink) {
  // 2x3 grid: the direct row 0->1->2 costs 20 s; the detour through the
  // bottom row costs 40 s. Loading link 0->1 with capacity_hat reservations
  // makes it 10 + 600*6 = 3610 s, so the planner detours.
  const RoadNetwork net = grid(2, 3);
  ReservationLedger ledger(net.link_count(), 60);
  const LinkIndex direct = net.link_between(0, 1);
  for (int i = 0; i < 600; ++i) ledger.log(direct).add(0, 60);
  const TimeDependentCost cost = [&](LinkIndex l, Seconds t) {
    return reserved_travel_time(net, ledger, l, t, ReservationFlow::kSlotCount);
  };
  EXPECT_DOUBLE_EQ(cost(direct, 0), 10.0 + 600 * 6.0);
  const auto plan = time_dependent_astar(net, 0, 2, 0.0, cost);
  ASSERT_FALSE(plan.entries.empty());
  EXPECT_NE(plan.entries.front().link, direct);
  EXPECT_DOUBLE_EQ(plan.entries.back().t_exit, 40.0);
  // Below capacity the literal LPF stays at t0 and the direct link wins.
  ReservationLedger light(net.link_count(), 60);
  for (int i = 0; i < 5; ++i) light.log(direct).add(0, 60);
  const auto plan2 = time_dependent_astar(net, 0, 2, 0.0, [&](LinkIndex l, Seconds t) {
    return reserved_travel_time(net, light, l, t, ReservationFlow::kSlotCount);
  });
  EXPECT_EQ(plan2.entries.front().link, direct);
}

TEST(ReservationFlowMode, Conversion) {
  EXPECT_DOUBLE_EQ(reservation_flow(5, 60, ReservationFlow::kSlotCount), 6.0);
  EXPECT_DOUBLE_EQ(reservation_flow(5, 60, ReservationFlow::kHourlyRate), 360.0);
}

TEST(ReplanSchedule, FiresAtDepartureAndEveryPeriod) {
  ReplanSchedule s(0, 1800);
  std::vector<Seconds> fired;
  for (Seconds t = 0; t <= 4000; t += 1) {
    if (s.due(t)) fired.push_back(t);
  }
  EXPECT_EQ(fired, (std::vector<Seconds>{0, 1800, 3600}));

  ReplanSchedule late(900, 1800);
  fired.clear();
  for (Seconds t = 900; t <= 5000; t += 1) {
    if (late.due(t)) fired.push_back(t);
  }
  EXPECT_EQ(fired, (std::vector<Seconds>{900, 2700, 4500}));
}

TEST(ReplanSchedule, ShortTripPlansOnce) {
  const RoadNetwork net = grid(2, 2);
  std::vector<std::unique_ptr<GuidanceProtocol>> p;
  auto dyn = std::make_unique<DynSp>(net, DynSpConfig{});
  DynSp* raw = dyn.get();
  p.push_back(std::move(dyn));
  Engine e(net, std::move(p), {Trip{0, 0, 3, 0, 0}});
  e.run();
  EXPECT_EQ(raw->plan_count(0), 1u);
}

TEST(DynSp, SnapshotsRefreshOnGlobalClock) {
  const RoadNetwork net = grid(3, 3);
  std::vector<std::unique_ptr<GuidanceProtocol>> p;
  DynSpConfig cfg;
  cfg.period = 1800;
  cfg.snapshot_period = 1800;
  auto dyn = std::make_unique<DynSp>(net, cfg);
  DynSp* raw = dyn.get();
  p.push_back(std::move(dyn));
  std::vector<Trip> trips;
  for (int i = 0; i < 50; ++i) trips.push_back(Trip{i, 0, 8, static_cast<Seconds>(i * 100), 0});
  Engine e(net, std::move(p), trips);
  while (e.now() < 1799) e.step();
  EXPECT_DOUBLE_EQ(raw->snapshot().taken_at, 0.0);
  e.step();
  e.step();
  EXPECT_DOUBLE_EQ(raw->snapshot().taken_at, 1800.0);
  for (LinkIndex l = 0; l < net.link_count(); ++l) EXPECT_GE(raw->snapshot().weights[l], net.t0(l));
}

TEST(DynResSp, ReservationsFollowThePlan) {
  const RoadNetwork net = grid(4, 4);
  std::vector<std::unique_ptr<GuidanceProtocol>> p;
  auto dyn = std::make_unique<DynResSp>(net, DynResSpConfig{});
  DynResSp* raw = dyn.get();
  p.push_back(std::move(dyn));
  std::vector<Trip> trips;
  for (int i = 0; i < 40; ++i) trips.push_back(Trip{i, static_cast<NodeIndex>(i % 4), 15, i * 3.0, 0});
  Engine e(net, std::move(p), trips);
  const MetricsLog log = e.run();
  EXPECT_EQ(log.stranded, 0u);
  EXPECT_EQ(raw->audit_failures(), 0u);
  EXPECT_EQ(raw->ledger().clamps(), 0u);
  for (std::uint32_t v = 0; v < trips.size(); ++v) {
    const auto& r = raw->reservation(v);
    ASSERT_TRUE(r.has_value());
    EXPECT_NO_THROW(validate_reservation(*r, &net));
  }
}
