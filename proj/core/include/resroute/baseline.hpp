#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "resroute/network.hpp"
#include "resroute/reservation.hpp"
#include "resroute/simulator.hpp"

namespace resroute {

// Per-link weights frozen at a refresh instant.
struct WeightSnapshot {
  Seconds taken_at = 0.0;
  std::vector<Seconds> weights;  // indexed by LinkIndex, each >= t0

  static WeightSnapshot free_flow(const RoadNetwork& net);
};

// Least-cost node path from origin to destination under the snapshot
// weights, using A* with h(n) = euclidean(n, destination) / max free speed.
// Equal keys expand the lower node index first. Returns {origin} when
// origin == destination and an empty path when unreachable. Throws
// InvalidArgument for unknown nodes or a snapshot of the wrong size.
std::vector<NodeIndex> astar(const RoadNetwork& net, NodeIndex origin, NodeIndex destination,
                             const WeightSnapshot& snapshot);

double path_cost(const RoadNetwork& net, const std::vector<NodeIndex>& path, const WeightSnapshot& snapshot);

// Converts a node path to link indices (lowest link id between each pair).
std::vector<LinkIndex> links_of(const RoadNetwork& net, const std::vector<NodeIndex>& path);

// Time-dependent link weight: travel time when entering `link` at time `t`.
using TimeDependentCost = std::function<Seconds(LinkIndex link, Seconds t)>;

// Flow argument handed to the queue LPF for a slot holding `reserved`
// registrations (the querying vehicle adds one more).
enum class ReservationFlow {
  kSlotCount,   // reserved + 1 vehicles
  kHourlyRate,  // (reserved + 1) * 3600 / slot_length, read as a rate
};

double reservation_flow(int reserved, Seconds slot_length, ReservationFlow mode);

// Queue-LPF travel time of `link` for a vehicle entering at `t`, derived
// from the ledger. Never below t0.
Seconds reserved_travel_time(const RoadNetwork& net, const ReservationLedger& ledger, LinkIndex link, Seconds t,
                             ReservationFlow mode);

// Label-correcting A* over arrival times. Relaxing link e from a node
// reached at time t costs max(t0(e), cost(e, t)). The heuristic is the same
// as astar(). Returns the path as link entries with (t_enter, t_exit); empty
// for origin == destination or when unreachable.
PathReservation time_dependent_astar(const RoadNetwork& net, NodeIndex origin, NodeIndex destination,
                                     Seconds depart, const TimeDependentCost& cost);

// Replans are due at departure and at every `period` after it.
class ReplanSchedule {
 public:
  ReplanSchedule() = default;
  ReplanSchedule(Seconds departure, Seconds period);

  // True when a plan is due at `now`; consumes every due instant <= now.
  bool due(Seconds now);
  Seconds next_due() const { return next_; }
  std::size_t plans() const { return plans_; }

 private:
  Seconds departure_ = 0.0;
  Seconds period_ = 1800.0;
  Seconds next_ = 0.0;
  std::size_t plans_ = 0;
};

struct DynSpConfig {
  std::string name = "dynsp";
  Seconds period = 1800.0;
  Seconds snapshot_period = 1800.0;
  // Window of the mean travel time sampled into snapshots.
  Seconds mean_window = 60.0;
};

// Centralized periodic-snapshot shortest-path guidance. Snapshots refresh on
// a global clock at multiples of snapshot_period; each vehicle replans on its
// own schedule and otherwise follows its stored path.
class DynSp : public GuidanceProtocol {
 public:
  DynSp(const RoadNetwork& net, DynSpConfig config);

  std::string_view name() const override { return config_.name; }
  void attach(const Engine& engine) override;
  void on_step(const Engine& engine) override;
  LinkIndex route(const Vehicle& vehicle, NodeIndex at, const Engine& engine) override;

  const WeightSnapshot& snapshot() const { return snapshot_; }
  std::size_t plan_count(std::uint32_t vehicle) const { return state_.at(vehicle).schedule.plans(); }

 private:
  struct VehicleState {
    ReplanSchedule schedule;
    std::vector<LinkIndex> path;
    std::size_t cursor = 0;
  };

  const RoadNetwork* net_;
  DynSpConfig config_;
  WeightSnapshot snapshot_;
  std::vector<VehicleState> state_;
};

struct DynResSpConfig {
  std::string name = "dynressp";
  Seconds period = 600.0;
  Seconds slot_length = 60.0;
  ReservationFlow flow = ReservationFlow::kSlotCount;
};

// Centralized reserving baseline: every replan runs time_dependent_astar on
// reservation-derived weights and swaps the vehicle's reservation.
class DynResSp : public GuidanceProtocol {
 public:
  DynResSp(const RoadNetwork& net, DynResSpConfig config);

  std::string_view name() const override { return config_.name; }
  void attach(const Engine& engine) override;
  void on_step(const Engine& engine) override;
  LinkIndex route(const Vehicle& vehicle, NodeIndex at, const Engine& engine) override;

  const ReservationLedger& ledger() const { return ledger_; }
  const std::optional<PathReservation>& reservation(std::uint32_t vehicle) const {
    return state_.at(vehicle).reservation;
  }
  // Consistency failures between a vehicle's plan and its reservation.
  std::uint64_t audit_failures() const { return audit_failures_; }

 private:
  struct VehicleState {
    ReplanSchedule schedule;
    std::optional<PathReservation> reservation;
    std::size_t cursor = 0;
  };

  void plan(const Vehicle& vehicle, NodeIndex at, Seconds now);

  const RoadNetwork* net_;
  DynResSpConfig config_;
  ReservationLedger ledger_;
  std::vector<VehicleState> state_;
  std::uint64_t audit_failures_ = 0;
};

}  // namespace resroute
