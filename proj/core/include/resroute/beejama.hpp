#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "resroute/baseline.hpp"
#include "resroute/network.hpp"
#include "resroute/predictor.hpp"
#include "resroute/reservation.hpp"
#include "resroute/simulator.hpp"

namespace resroute {

inline constexpr int kInfiniteHops = std::numeric_limits<int>::max();

using ClusterId = std::uint32_t;

// ---------------------------------------------------------------------------
// Zone hierarchy

struct HierarchyLayer {
  double cell_size = 0.0;
  int hop_limit = kInfiniteHops;
  std::vector<std::vector<ClusterId>> clusters_of;  // node -> clusters, ascending
  std::vector<std::vector<NodeIndex>> members;      // cluster -> nodes, ascending
  std::vector<NodeIndex> representative;            // cluster -> node
  std::vector<ClusterId> represented_by;            // node -> cluster it represents, or kNone

  static constexpr ClusterId kNone = std::numeric_limits<ClusterId>::max();

  std::size_t cluster_count() const { return representative.size(); }
};

struct Hierarchy {
  std::vector<HierarchyLayer> layers;  // index 0 is the finest layer
};

// Grid clustering per layer. A node joins the cluster of its own cell plus
// every neighbouring cell whose border lies within `overlap` meters. Only
// cells with at least one own node form clusters. The representative is the
// own node nearest the centre of the cell clipped to the network bounding
// box, ties to the lowest node id.
//
// Preconditions: cell sizes strictly increasing and positive, one hop limit
// per layer, hop limits strictly decreasing towards finer layers with the
// top one kInfiniteHops. Throws InvalidArgument otherwise or on an empty
// network.
Hierarchy build_hierarchy(const RoadNetwork& net, std::span<const double> layer_cell_sizes,
                          std::span<const int> hop_limits, double overlap);

// Grid partition of the nodes into navigator areas.
struct Navigator {
  std::uint32_t id = 0;
  std::vector<NodeIndex> area;
  std::vector<LinkIndex> owned_links;  // links whose head lies in the area
};

std::vector<Navigator> build_navigators(const RoadNetwork& net, double cell_size);

// ---------------------------------------------------------------------------
// Distance-vector state

struct RouteEntry {
  LinkIndex next = kNoLink;
  Seconds cost = std::numeric_limits<double>::infinity();
  std::int64_t generation = -1;

  bool valid() const { return generation >= 0; }
};

// Routing tables of every node towards every representative, layer by layer.
class RoutingTables {
 public:
  RoutingTables() = default;
  RoutingTables(const Hierarchy& hierarchy, std::size_t node_count);

  const RouteEntry& entry(std::size_t layer, ClusterId cluster, NodeIndex node) const {
    return layers_[layer][static_cast<std::size_t>(cluster) * nodes_ + node];
  }
  RouteEntry& entry(std::size_t layer, ClusterId cluster, NodeIndex node) {
    return layers_[layer][static_cast<std::size_t>(cluster) * nodes_ + node];
  }
  std::size_t layer_count() const { return layers_.size(); }

 private:
  std::size_t nodes_ = 0;
  std::vector<std::vector<RouteEntry>> layers_;
};

struct FloodStats {
  std::uint64_t messages = 0;
  std::uint64_t updates = 0;
  // Largest number of links any scout travelled, per layer.
  std::vector<int> max_hops;
};

// One generation of upstream scouts. Every representative floods against
// the direction of traffic; reaching node n over link (n, m) adds
// link_cost[(n, m)]. An entry is replaced by a newer generation or, within a
// generation, by a strictly lower cost, and only replaced entries re-flood.
// A scout stops when its hop budget is spent.
FloodStats flood_upstream(const Hierarchy& hierarchy, const RoadNetwork& net, std::span<const Seconds> link_cost,
                          std::int64_t generation, RoutingTables& tables);

// Forward travel times from the finest layer's representatives, flooded in
// traffic direction with that layer's hop limit.
class DownstreamTables {
 public:
  DownstreamTables() = default;
  DownstreamTables(const Hierarchy& hierarchy, std::size_t node_count);

  // Recorded forward time from `origin_cluster`'s representative to `node`
  // in the newest generation that reached it, if any.
  std::optional<Seconds> forward_time(ClusterId origin_cluster, NodeIndex node) const;

  // Earliest arrival of a vehicle currently travelling towards `node`: the
  // minimum forward time over origins in the newest generation at `node`,
  // 0 when nothing has been recorded.
  Seconds horizon(NodeIndex node) const;

 private:
  friend FloodStats flood_downstream(const Hierarchy&, const RoadNetwork&, std::span<const Seconds>, std::int64_t,
                                     DownstreamTables&);

  struct Slot {
    Seconds time = 0.0;
    std::int64_t generation = -1;
  };

  std::size_t nodes_ = 0;
  std::vector<Slot> slots_;         // origin cluster * nodes + node
  std::vector<Slot> min_per_node_;  // node
};

FloodStats flood_downstream(const Hierarchy& hierarchy, const RoadNetwork& net, std::span<const Seconds> link_time,
                            std::int64_t generation, DownstreamTables& tables);

// Forwarding decision at `node` towards `destination`: the destination's own
// entry if one exists, otherwise the cheapest entry towards a representative
// of a cluster containing the destination on the finest layer that has one.
// Ties go to the lower cost, then the lower next-hop node id. Returns kNoLink
// when nothing applies.
LinkIndex try_next_hop(const Hierarchy& hierarchy, const RoutingTables& tables, const RoadNetwork& net,
                       NodeIndex node, NodeIndex destination);

// As try_next_hop, but throws NoRoute.
LinkIndex next_hop(const Hierarchy& hierarchy, const RoutingTables& tables, const RoadNetwork& net, NodeIndex node,
                   NodeIndex destination);

// ---------------------------------------------------------------------------
// Protocol

enum class Variant {
  kPlain,          // measured mean travel times only
  kNaive,          // reservation-derived LPF only
  kStatic,         // LPF with the reserved flow scaled by 1 / penetration
  kDynamicHybrid,  // correlation-weighted blend of LPF and measurement
};

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view name);  // throws InvalidArgument

enum class StaticScaling { kFlow, kTime };

struct BeeJamaConfig {
  std::string name = "beejama";
  Variant variant = Variant::kPlain;
  // Each coarse cell must be coverable from its representative within the
  // next finer layer's hop limit, or vehicles can stall at a representative.
  std::vector<double> layer_cell_sizes{1.0, 1000.0};
  std::vector<int> hop_limits{6, kInfiniteHops};
  double overlap = 0.0;
  double navigator_cell = 1500.0;
  Seconds scout_period = 1.0;
  Seconds downstream_period = 1.0;
  Seconds slot_length = 60.0;
  Seconds sample_period = 60.0;
  Seconds mean_window = 60.0;
  ReservationFlow flow = ReservationFlow::kSlotCount;
  double penetration = 1.0;  // used by kStatic
  StaticScaling static_scaling = StaticScaling::kFlow;
};

struct ForagerStats {
  std::uint64_t dispatched = 0;
  std::uint64_t loops = 0;
  std::uint64_t no_route = 0;
};

class BeeJama : public GuidanceProtocol {
 public:
  BeeJama(const RoadNetwork& net, BeeJamaConfig config);

  std::string_view name() const override { return config_.name; }
  void attach(const Engine& engine) override;
  void on_step(const Engine& engine) override;
  LinkIndex route(const Vehicle& vehicle, NodeIndex at, const Engine& engine) override;

  bool reserving() const { return config_.variant != Variant::kPlain; }
  const BeeJamaConfig& config() const { return config_; }

  // Variant link weight of `link` for a vehicle entering eval_offset seconds
  // after `now`.
  Seconds link_cost(LinkIndex link, Seconds eval_offset, Seconds now, const Engine& engine) const;
  // Queue-LPF prediction from this protocol's reservations at time t.
  Seconds lpf_travel_time(LinkIndex link, Seconds t) const;

  // Walks the current tables from `at` towards the vehicle's destination,
  // pricing each link at its predicted entry time, and swaps the vehicle's
  // reservation for the walked path.
  PathReservation dispatch_forager(const Vehicle& vehicle, NodeIndex at, const Engine& engine);

  // Runs one scout generation now (normally driven by on_step).
  void flood(const Engine& engine);

  const Hierarchy& hierarchy() const { return hierarchy_; }
  const RoutingTables& tables() const { return tables_; }
  const DownstreamTables& downstream() const { return downstream_; }
  const std::vector<Navigator>& navigators() const { return navigators_; }
  const ReservationLedger& ledger() const { return ledger_; }
  ReservationLedger& ledger() { return ledger_; }
  const ErrorWindow& error_window(LinkIndex link) const { return windows_[link]; }
  const std::optional<PathReservation>& reservation(std::uint32_t vehicle) const {
    return vehicles_.at(vehicle).reservation;
  }
  const ForagerStats& forager_stats() const { return forager_stats_; }
  const FloodStats& last_upstream() const { return last_upstream_; }
  std::int64_t generation() const { return generation_; }

 private:
  struct VehicleState {
    std::optional<PathReservation> reservation;
    std::size_t cursor = 0;
  };

  void sample_errors(const Engine& engine);

  const RoadNetwork* net_;
  BeeJamaConfig config_;
  Hierarchy hierarchy_;
  std::vector<Navigator> navigators_;
  RoutingTables tables_;
  DownstreamTables downstream_;
  ReservationLedger ledger_;
  std::vector<ErrorWindow> windows_;
  std::vector<VehicleState> vehicles_;
  std::vector<Seconds> cost_scratch_;
  ForagerStats forager_stats_;
  FloodStats last_upstream_;
  std::int64_t generation_ = 0;
  std::int64_t downstream_generation_ = 0;
};

}  // namespace resroute
