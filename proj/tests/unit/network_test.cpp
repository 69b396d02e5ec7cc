#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "resroute/error.hpp"
#include "resroute/network.hpp"

using namespace resroute;

namespace {

const char* kTwoNode = R"({
  "nodes": [{"id": 1, "x": 0, "y": 0}, {"id": 2, "x": 100, "y": 0}],
  "links": [{"id": 10, "from": 1, "to": 2, "length": 100, "free_speed": 10, "capacity": 600}]
})";

RoadNetwork parse(const std::string& text) {
  std::istringstream in(text);
  return load_network(in);
}

}  // namespace

TEST(Bpr, ReferenceValues) {
  const BprParams def = BprParams::preset(RoadClass::kDefault);
  EXPECT_DOUBLE_EQ(bpr_travel_time(100, 0, 1000, def), 100.0);
  EXPECT_NEAR(bpr_travel_time(100, 1000, 1000, def), 115.0, 115.0 * 1e-9);
  EXPECT_NEAR(bpr_travel_time(100, 2000, 1000, def), 340.0, 340.0 * 1e-9);
}

TEST(Bpr, PresetsAtCapacityGiveOnePlusAlpha) {
  for (RoadClass c : {RoadClass::kDefault, RoadClass::kHighway, RoadClass::kMultilane}) {
    const BprParams p = BprParams::preset(c);
    EXPECT_DOUBLE_EQ(bpr_travel_time(42.0, 900.0, 900.0, p), 42.0 * (1.0 + p.alpha));
  }
  EXPECT_EQ(BprParams::preset(RoadClass::kHighway).alpha, 0.88);
  EXPECT_EQ(BprParams::preset(RoadClass::kHighway).beta, 9.8);
  EXPECT_EQ(BprParams::preset(RoadClass::kMultilane).alpha, 1.0);
  EXPECT_EQ(BprParams::preset(RoadClass::kMultilane).beta, 5.4);
}

TEST(Bpr, MonotoneInFlow) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> flow(0.0, 5000.0);
  for (int i = 0; i < 500; ++i) {
    double a = flow(rng), b = flow(rng);
    if (a > b) std::swap(a, b);
    for (RoadClass c : {RoadClass::kDefault, RoadClass::kHighway, RoadClass::kMultilane}) {
      EXPECT_LE(bpr_travel_time(30, a, 1200, BprParams::preset(c)), bpr_travel_time(30, b, 1200, BprParams::preset(c)));
    }
  }
}

TEST(Bpr, RejectsBadInput) {
  EXPECT_THROW(bpr_travel_time(NAN, 1, 1, {}), InvalidArgument);
  EXPECT_THROW(bpr_travel_time(10, INFINITY, 1, {}), InvalidArgument);
  EXPECT_THROW(bpr_travel_time(0, 1, 1, {}), InvalidArgument);
  EXPECT_THROW(bpr_travel_time(10, -1, 1, {}), InvalidArgument);
}

TEST(QueueLpf, ReferenceValues) {
  EXPECT_DOUBLE_EQ(queue_travel_time(50, 1, 600), 50.0);
  EXPECT_NEAR(queue_travel_time(50, 600, 600), 3644.0, 3644.0 * 1e-9);
  EXPECT_NEAR(queue_travel_time(50, 601, 600), 3650.0, 3650.0 * 1e-9);
}

TEST(QueueLpf, BelowCapacityIsFreeFlow) {
  // Literal threshold: any count below the hourly capacity stays at t0.
  EXPECT_DOUBLE_EQ(queue_travel_time(50, 599, 600), 50.0);
  EXPECT_DOUBLE_EQ(queue_travel_time(50, 12, 600), 50.0);
  EXPECT_DOUBLE_EQ(queue_travel_time(50, 0, 600), 50.0);
}

TEST(QueueLpf, MonotoneAndSecondBranchAtCapacity) {
  double prev = 0.0;
  for (int f = 0; f <= 2000; ++f) {
    const double t = queue_travel_time(50, f, 600);
    EXPECT_GE(t, prev);
    prev = t;
  }
  EXPECT_DOUBLE_EQ(queue_travel_time(20, 300, 300), 20 + 299 * 12.0);
}

TEST(QueueLpf, RejectsBadInput) {
  EXPECT_THROW(queue_travel_time(50, NAN, 600), InvalidArgument);
  EXPECT_THROW(queue_travel_time(50, 1, 0), InvalidArgument);
  EXPECT_THROW(queue_travel_time(-1, 1, 600), InvalidArgument);
}

TEST(LoadNetwork, SmallestValidFile) {
  const RoadNetwork net = parse(kTwoNode);
  EXPECT_EQ(net.node_count(), 2u);
  EXPECT_EQ(net.link_count(), 1u);
  EXPECT_DOUBLE_EQ(net.t0(0), 10.0);
  EXPECT_DOUBLE_EQ(net.link(0).capacity_hat, 600.0);  // defaults to capacity * lanes
  EXPECT_EQ(net.link(0).road_class, RoadClass::kDefault);
}

TEST(LoadNetwork, CapacityHatDefaultUsesLanes) {
  const RoadNetwork net = parse(R"({
    "nodes": [{"id": 1, "x": 0, "y": 0}, {"id": 2, "x": 100, "y": 0}],
    "links": [{"id": 10, "from": 1, "to": 2, "length": 100, "free_speed": 10, "capacity": 600, "lanes": 3,
               "road_class": "highway"}]})");
  EXPECT_DOUBLE_EQ(net.link(0).capacity_hat, 1800.0);
  EXPECT_EQ(net.link(0).road_class, RoadClass::kHighway);
}

TEST(LoadNetwork, MissingEndpointIsValidationError) {
  EXPECT_THROW(parse(R"({
    "nodes": [{"id": 1, "x": 0, "y": 0}],
    "links": [{"id": 10, "from": 1, "to": 7, "length": 100, "free_speed": 10, "capacity": 600}]})"),
               ValidationError);
}

TEST(LoadNetwork, DuplicateIdsRejected) {
  EXPECT_THROW(parse(R"({"nodes": [{"id": 1, "x": 0, "y": 0}, {"id": 1, "x": 1, "y": 0}], "links": []})"),
               ValidationError);
}

TEST(LoadNetwork, SyntaxErrorCarriesLine) {
  try {
    parse("{\n  \"nodes\": [\n  ,\n]}");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(LoadNetwork, FieldErrorsNameTheField) {
  try {
    parse(R"({"nodes": [{"id": 1, "x": "zero", "y": 0}], "links": []})");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(e.field().find("x"), std::string::npos);
  }
  EXPECT_THROW(parse(R"({"nodes": [], "links": [], "extra": 1})"), ParseError);
}

TEST(LoadNetwork, SelfLoopAndNonPositiveValuesRejected) {
  EXPECT_THROW(parse(R"({"nodes": [{"id": 1, "x": 0, "y": 0}],
    "links": [{"id": 1, "from": 1, "to": 1, "length": 1, "free_speed": 1, "capacity": 1}]})"),
               ValidationError);
  EXPECT_THROW(parse(R"({"nodes": [{"id": 1, "x": 0, "y": 0}, {"id": 2, "x": 0, "y": 1}],
    "links": [{"id": 1, "from": 1, "to": 2, "length": 0, "free_speed": 1, "capacity": 1}]})"),
               ValidationError);
  EXPECT_THROW(parse(R"({"nodes": [{"id": 1, "x": 0, "y": 0}, {"id": 2, "x": 0, "y": 1}],
    "links": [{"id": 1, "from": 1, "to": 2, "length": 1, "free_speed": 1, "capacity": 1, "capacity_hat": 0.5}]})"),
               ValidationError);
}

TEST(Grid, CountsAndIds) {
  GridSpec spec;
  spec.rows = 2;
  spec.cols = 2;
  spec.edge_length = 100;
  spec.free_speed = 10;
  spec.capacity = 600;
  const RoadNetwork bi = generate_grid(spec);
  EXPECT_EQ(bi.node_count(), 4u);
  EXPECT_EQ(bi.link_count(), 8u);
  spec.bidirectional = false;
  EXPECT_EQ(generate_grid(spec).link_count(), 4u);

  spec.rows = 3;
  spec.cols = 4;
  spec.bidirectional = true;
  const RoadNetwork g = generate_grid(spec);
  EXPECT_EQ(g.node_count(), 12u);
  EXPECT_EQ(g.link_count(), 2u * (3 * 3 + 2 * 4));
  // Row-major ids at lattice coordinates.
  EXPECT_EQ(g.node(5).id, 5);
  EXPECT_DOUBLE_EQ(g.node(5).x, 100.0);
  EXPECT_DOUBLE_EQ(g.node(5).y, 100.0);
  // Links sorted by (from, to).
  for (std::size_t i = 1; i < g.link_count(); ++i) {
    const Link& a = g.link(static_cast<LinkIndex>(i - 1));
    const Link& b = g.link(static_cast<LinkIndex>(i));
    EXPECT_TRUE(std::pair(a.from, a.to) < std::pair(b.from, b.to));
  }
}

TEST(Grid, RoundTripsThroughFile) {
  GridSpec spec;
  spec.rows = 3;
  spec.cols = 3;
  const RoadNetwork g = generate_grid(spec);
  std::stringstream buf;
  save_network(g, buf);
  EXPECT_EQ(load_network(buf), g);
}

TEST(Network, RandomRoundTrip) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const RoadNetwork net = oracle::random_network(rng, 5 + i, 3 * i);
    std::stringstream buf;
    save_network(net, buf);
    EXPECT_EQ(load_network(buf), net);
  }
}

TEST(Network, AdjacencySortedAndLookups) {
  std::mt19937_64 rng(5);
  const RoadNetwork net = oracle::random_network(rng, 30, 60);
  for (NodeIndex n = 0; n < net.node_count(); ++n) {
    auto out = net.out_links(n);
    EXPECT_TRUE(std::is_sorted(out.begin(), out.end()));
    for (LinkIndex l : out) {
      EXPECT_EQ(net.tail(l), n);
      EXPECT_EQ(net.link_between(n, net.head(l)), l);
    }
  }
  EXPECT_THROW(net.node_index(12345), NotFound);
  EXPECT_FALSE(net.find_link(99999).has_value());
}

TEST(Network, DiameterOfGrid) {
  GridSpec spec;
  spec.rows = 3;
  spec.cols = 5;
  spec.edge_length = 100;
  const RoadNetwork g = generate_grid(spec);
  EXPECT_DOUBLE_EQ(g.diameter(), std::hypot(400.0, 200.0));
}
