#include "resroute/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "resroute/error.hpp"

namespace resroute {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using QueueItem = std::pair<double, NodeIndex>;
using MinQueue = std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>>;

void check_nodes(const RoadNetwork& net, NodeIndex origin, NodeIndex destination) {
  if (origin >= net.node_count() || destination >= net.node_count()) {
    throw InvalidArgument("astar: unknown origin or destination node");
  }
}

double heuristic(const RoadNetwork& net, NodeIndex n, NodeIndex destination) {
  return net.distance(n, destination) / net.max_free_speed();
}

}  // namespace

WeightSnapshot WeightSnapshot::free_flow(const RoadNetwork& net) {
  WeightSnapshot s;
  s.weights.resize(net.link_count());
  for (LinkIndex l = 0; l < net.link_count(); ++l) s.weights[l] = net.t0(l);
  return s;
}

std::vector<NodeIndex> astar(const RoadNetwork& net, NodeIndex origin, NodeIndex destination,
                             const WeightSnapshot& snapshot) {
  check_nodes(net, origin, destination);
  if (snapshot.weights.size() != net.link_count()) throw InvalidArgument("astar: snapshot size mismatch");
  if (origin == destination) return {origin};

  const std::size_t n = net.node_count();
  std::vector<double> g(n, kInf);
  std::vector<LinkIndex> via(n, kNoLink);
  std::vector<char> closed(n, 0);
  MinQueue open;
  g[origin] = 0.0;
  open.emplace(heuristic(net, origin, destination), origin);

  while (!open.empty()) {
    const auto [f, u] = open.top();
    open.pop();
    if (closed[u]) continue;
    closed[u] = 1;
    if (u == destination) break;
    for (LinkIndex l : net.out_links(u)) {
      const NodeIndex v = net.head(l);
      if (closed[v]) continue;
      const double cand = g[u] + snapshot.weights[l];
      if (cand < g[v]) {
        g[v] = cand;
        via[v] = l;
        open.emplace(cand + heuristic(net, v, destination), v);
      }
    }
  }
  if (!closed[destination]) return {};

  std::vector<NodeIndex> path{destination};
  for (NodeIndex at = destination; at != origin;) {
    at = net.tail(via[at]);
    path.push_back(at);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

double path_cost(const RoadNetwork& net, const std::vector<NodeIndex>& path, const WeightSnapshot& snapshot) {
  double total = 0.0;
  for (LinkIndex l : links_of(net, path)) total += snapshot.weights[l];
  return total;
}

std::vector<LinkIndex> links_of(const RoadNetwork& net, const std::vector<NodeIndex>& path) {
  std::vector<LinkIndex> out;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const LinkIndex l = net.link_between(path[i - 1], path[i]);
    if (l == kNoLink) throw InvalidArgument("path contains non-adjacent nodes");
    out.push_back(l);
  }
  return out;
}

double reservation_flow(int reserved, Seconds slot_length, ReservationFlow mode) {
  const double vehicles = static_cast<double>(reserved) + 1.0;
  if (mode == ReservationFlow::kSlotCount) return vehicles;
  return vehicles * 3600.0 / slot_length;
}

Seconds reserved_travel_time(const RoadNetwork& net, const ReservationLedger& ledger, LinkIndex link, Seconds t,
                             ReservationFlow mode) {
  const Seconds t0 = net.t0(link);
  const double flow = reservation_flow(ledger.expected_flow(link, t), ledger.slot_length(), mode);
  return std::max(t0, queue_travel_time(t0, flow, net.link(link).capacity_hat));
}

PathReservation time_dependent_astar(const RoadNetwork& net, NodeIndex origin, NodeIndex destination,
                                     Seconds depart, const TimeDependentCost& cost) {
  check_nodes(net, origin, destination);
  PathReservation out;
  if (origin == destination) return out;

  // Labels are elapsed seconds since `depart` so that, with constant
  // weights, the arithmetic matches astar() exactly.
  const std::size_t n = net.node_count();
  std::vector<double> g(n, kInf);
  std::vector<LinkIndex> via(n, kNoLink);
  std::vector<char> closed(n, 0);
  MinQueue open;
  g[origin] = 0.0;
  open.emplace(heuristic(net, origin, destination), origin);

  while (!open.empty()) {
    const auto [f, u] = open.top();
    open.pop();
    if (closed[u] || f > g[u] + heuristic(net, u, destination)) continue;
    closed[u] = 1;
    if (u == destination) break;
    for (LinkIndex l : net.out_links(u)) {
      const NodeIndex v = net.head(l);
      const double w = std::max(net.t0(l), cost(l, depart + g[u]));
      const double cand = g[u] + w;
      if (cand < g[v]) {
        g[v] = cand;
        via[v] = l;
        closed[v] = 0;  // label-correcting: reopen on improvement
        open.emplace(cand + heuristic(net, v, destination), v);
      }
    }
  }
  if (g[destination] == kInf) return out;

  std::vector<LinkIndex> links;
  for (NodeIndex at = destination; at != origin; at = net.tail(via[at])) links.push_back(via[at]);
  std::reverse(links.begin(), links.end());
  out.entries.reserve(links.size());
  for (LinkIndex l : links) {
    out.entries.push_back(ReservedLink{l, depart + g[net.tail(l)], depart + g[net.head(l)]});
  }
  return out;
}

ReplanSchedule::ReplanSchedule(Seconds departure, Seconds period)
    : departure_(departure), period_(period), next_(departure) {
  if (!(period > 0.0)) throw InvalidArgument("replan period must be > 0");
}

bool ReplanSchedule::due(Seconds now) {
  if (now + 1e-9 < next_) return false;
  ++plans_;
  const double k = std::floor((now - departure_) / period_) + 1.0;
  next_ = departure_ + k * period_;
  return true;
}

// ---------------------------------------------------------------------------

DynSp::DynSp(const RoadNetwork& net, DynSpConfig config)
    : net_(&net), config_(std::move(config)), snapshot_(WeightSnapshot::free_flow(net)) {
  if (!(config_.period > 0.0) || !(config_.snapshot_period > 0.0)) {
    throw InvalidArgument("dynsp periods must be > 0");
  }
}

void DynSp::attach(const Engine& engine) {
  state_.assign(engine.vehicles().size(), {});
  for (const Vehicle& v : engine.vehicles()) {
    state_[v.index].schedule = ReplanSchedule(v.trip.departure, config_.period);
  }
}

void DynSp::on_step(const Engine& engine) {
  const Seconds now = engine.now();
  if (std::fmod(now, config_.snapshot_period) != 0.0) return;
  snapshot_.taken_at = now;
  for (LinkIndex l = 0; l < net_->link_count(); ++l) {
    snapshot_.weights[l] = std::max(net_->t0(l), engine.current_mean_travel_time(l, config_.mean_window));
  }
}

LinkIndex DynSp::route(const Vehicle& vehicle, NodeIndex at, const Engine& engine) {
  VehicleState& s = state_[vehicle.index];
  const bool scheduled = s.schedule.due(engine.now());
  const bool off_plan = s.cursor >= s.path.size() || net_->tail(s.path[s.cursor]) != at;
  if (scheduled || off_plan) {
    s.path = links_of(*net_, astar(*net_, at, vehicle.trip.destination, snapshot_));
    s.cursor = 0;
  }
  if (s.cursor >= s.path.size()) return kNoLink;
  return s.path[s.cursor++];
}

// ---------------------------------------------------------------------------

DynResSp::DynResSp(const RoadNetwork& net, DynResSpConfig config)
    : net_(&net), config_(std::move(config)), ledger_(net.link_count(), config_.slot_length) {
  if (!(config_.period > 0.0)) throw InvalidArgument("dynressp period must be > 0");
}

void DynResSp::attach(const Engine& engine) {
  state_.assign(engine.vehicles().size(), {});
  for (const Vehicle& v : engine.vehicles()) {
    state_[v.index].schedule = ReplanSchedule(v.trip.departure, config_.period);
  }
}

void DynResSp::on_step(const Engine& engine) {
  if (std::fmod(engine.now(), config_.slot_length) == 0.0) ledger_.prune(engine.now());
}

void DynResSp::plan(const Vehicle& vehicle, NodeIndex at, Seconds now) {
  VehicleState& s = state_[vehicle.index];
  auto cost = [this](LinkIndex l, Seconds t) { return reserved_travel_time(*net_, ledger_, l, t, config_.flow); };
  PathReservation next = time_dependent_astar(*net_, at, vehicle.trip.destination, now, cost);
  next.vehicle = vehicle.trip.id;
  try {
    validate_reservation(next, net_);
    if (!next.entries.empty() && (net_->tail(next.entries.front().link) != at || next.entries.front().t_enter != now)) {
      ++audit_failures_;
    }
  } catch (const InvalidArgument&) {
    ++audit_failures_;
  }
  reserve_path(ledger_, s.reservation, next, now);
  s.reservation = std::move(next);
  s.cursor = 0;
}

LinkIndex DynResSp::route(const Vehicle& vehicle, NodeIndex at, const Engine& engine) {
  VehicleState& s = state_[vehicle.index];
  const bool scheduled = s.schedule.due(engine.now());
  const bool off_plan = !s.reservation || s.cursor >= s.reservation->entries.size() ||
                        net_->tail(s.reservation->entries[s.cursor].link) != at;
  if (scheduled || off_plan) plan(vehicle, at, engine.now());
  const auto& entries = s.reservation->entries;
  if (s.cursor >= entries.size()) return kNoLink;
  return entries[s.cursor++].link;
}

}  // namespace resroute
