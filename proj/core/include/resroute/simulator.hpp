#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "resroute/network.hpp"
#include "resroute/reservation.hpp"

namespace resroute {

using ProtocolIndex = std::uint32_t;

struct Trip {
  VehicleId id = 0;
  NodeIndex origin = 0;
  NodeIndex destination = 0;
  Seconds departure = 0.0;
  ProtocolIndex protocol = 0;

  friend bool operator==(const Trip&, const Trip&) = default;
};

struct Traversal {
  LinkIndex link = kNoLink;
  Seconds t_enter = 0.0;
  Seconds t_exit = 0.0;
};

enum class VehicleState { kPending, kOnLink, kArrived };

struct Vehicle {
  Trip trip;
  std::uint32_t index = 0;  // position in Engine::vehicles()
  VehicleState state = VehicleState::kPending;
  LinkIndex link = kNoLink;  // current link while kOnLink
  Seconds entered = 0.0;     // when the current link was entered
  Seconds earliest_exit = 0.0;
  Seconds arrival = 0.0;
  std::vector<Traversal> traversed;
};

class Engine;

// A vehicle-guidance strategy. The engine asks for the next link whenever a
// vehicle stands at a node: at departure and at every link exit.
class GuidanceProtocol {
 public:
  virtual ~GuidanceProtocol() = default;

  virtual std::string_view name() const = 0;

  // Called once after all vehicles are loaded, before the first step.
  virtual void attach(const Engine& /*engine*/) {}

  // Called at the start of every step, before any routing query.
  virtual void on_step(const Engine& /*engine*/) {}

  // Outgoing link of `at` the vehicle should take next, or kNoLink to make
  // it wait one step and ask again.
  virtual LinkIndex route(const Vehicle& vehicle, NodeIndex at, const Engine& engine) = 0;

  virtual void on_arrival(const Vehicle& /*vehicle*/, const Engine& /*engine*/) {}
};

struct VehicleRecord {
  VehicleId id = 0;
  ProtocolIndex protocol = 0;
  Seconds departure = 0.0;
  std::optional<Seconds> arrival;

  std::optional<Seconds> travel_time() const {
    if (!arrival) return std::nullopt;
    return *arrival - departure;
  }
};

struct LinkMinuteStats {
  double travel_time_sum = 0.0;
  std::uint32_t exits = 0;
};

struct ArrivalRow {
  std::int64_t minute = 0;
  ProtocolIndex protocol = 0;
  std::uint64_t cumulative = 0;
};

struct MetricsLog {
  std::vector<std::string> protocols;
  std::vector<VehicleRecord> vehicles;  // ascending id
  std::map<std::pair<std::int64_t, LinkIndex>, LinkMinuteStats> link_minutes;
  Seconds end_time = 0.0;
  std::uint64_t stranded = 0;

  // Cumulative arrivals per protocol for every minute up to the last arrival.
  std::vector<ArrivalRow> arrivals_series() const;

  void write_vehicles_csv(std::ostream& out) const;
  void write_arrivals_csv(std::ostream& out) const;
  void write_links_csv(const RoadNetwork& net, std::ostream& out) const;
};

struct EngineOptions {
  Seconds horizon = 86400.0;
  Seconds mean_window = 60.0;
  // How long exit samples are kept for current_mean_travel_time queries.
  Seconds sample_retention = 3600.0;
};

// Fixed-step (1 s) queue-based traffic engine. Each link is a FIFO; a vehicle
// leaves when it is at the head, its free-flow time has elapsed, and the
// link has outflow credit. Credit accrues at capacity_hat/3600 vehicles per
// second and is capped at max(1, capacity_hat/3600), so a standing queue
// discharges with headway 3600/capacity_hat.
class Engine {
 public:
  Engine(const RoadNetwork& network, std::vector<std::unique_ptr<GuidanceProtocol>> protocols,
         std::vector<Trip> trips, EngineOptions options = {});

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;
  Engine(Engine&&) = default;

  // One second: protocols update, departures are injected, credit accrues,
  // links release vehicles in ascending link order, metrics are recorded.
  void step();

  // Steps until every vehicle arrived or the horizon is reached.
  MetricsLog run();

  bool finished() const { return arrived_ == vehicles_.size(); }

  const RoadNetwork& network() const { return *network_; }
  Seconds now() const { return now_; }
  const EngineOptions& options() const { return options_; }

  std::span<const Vehicle> vehicles() const { return vehicles_; }
  const Vehicle& vehicle(std::uint32_t index) const { return vehicles_[index]; }
  const GuidanceProtocol& protocol(ProtocolIndex p) const { return *protocols_[p]; }
  std::size_t protocol_count() const { return protocols_.size(); }

  // Mean (t_exit - t_enter) of exits in (now - window, now]. Without exits it
  // falls back to queue_travel_time(t0, queued + 1, capacity_hat), which is
  // t0 for an empty link. Throws NotFound for an unknown link.
  Seconds current_mean_travel_time(LinkIndex link, Seconds window) const;
  Seconds current_mean_travel_time(LinkIndex link) const {
    return current_mean_travel_time(link, options_.mean_window);
  }

  std::size_t queue_length(LinkIndex link) const { return links_.at(link).fifo.size(); }
  double outflow_credit(LinkIndex link) const { return links_.at(link).credit; }

  std::uint64_t injected() const { return injected_; }
  std::uint64_t arrived() const { return arrived_; }
  std::uint64_t on_network() const { return on_network_; }

  MetricsLog metrics() const;

 private:
  struct Exit {
    Seconds at;
    Seconds travel_time;
  };
  struct LinkState {
    std::deque<std::uint32_t> fifo;
    double credit = 0.0;
    double credit_rate = 0.0;
    double credit_cap = 1.0;
    std::deque<Exit> exits;
  };

  void inject();
  void release(LinkIndex link);
  // Asks the vehicle's protocol for the next link at `at` and validates it.
  LinkIndex ask(Vehicle& v, NodeIndex at);
  void enter(Vehicle& v, LinkIndex link);
  void arrive(Vehicle& v);

  const RoadNetwork* network_;
  std::vector<std::unique_ptr<GuidanceProtocol>> protocols_;
  EngineOptions options_;
  std::vector<Vehicle> vehicles_;
  std::vector<std::uint32_t> departure_order_;
  std::size_t next_departure_ = 0;
  std::vector<std::uint32_t> waiting_;  // departed but not yet routed onto a link
  std::vector<LinkState> links_;
  std::map<std::pair<std::int64_t, LinkIndex>, LinkMinuteStats> link_minutes_;
  Seconds now_ = 0.0;
  std::uint64_t injected_ = 0;
  std::uint64_t arrived_ = 0;
  std::uint64_t on_network_ = 0;
  bool attached_ = false;
};

}  // namespace resroute
