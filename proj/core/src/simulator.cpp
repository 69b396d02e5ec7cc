#include "resroute/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "csv_format.hpp"
#include "resroute/error.hpp"

namespace resroute {

namespace {

constexpr double kEps = 1e-9;

std::int64_t minute_of(Seconds t) { return static_cast<std::int64_t>(std::floor(t / 60.0)); }

}  // namespace

Engine::Engine(const RoadNetwork& network, std::vector<std::unique_ptr<GuidanceProtocol>> protocols,
               std::vector<Trip> trips, EngineOptions options)
    : network_(&network), protocols_(std::move(protocols)), options_(options) {
  if (!(options_.mean_window > 0.0)) throw InvalidArgument("mean window must be > 0");
  options_.sample_retention = std::max(options_.sample_retention, options_.mean_window);

  vehicles_.reserve(trips.size());
  for (std::size_t i = 0; i < trips.size(); ++i) {
    const Trip& t = trips[i];
    if (t.origin >= network.node_count() || t.destination >= network.node_count()) {
      throw InvalidArgument("trip " + std::to_string(t.id) + " references an unknown node");
    }
    if (t.protocol >= protocols_.size()) {
      throw InvalidArgument("trip " + std::to_string(t.id) + " references an unregistered protocol");
    }
    if (!std::isfinite(t.departure) || t.departure < 0.0) {
      throw InvalidArgument("trip " + std::to_string(t.id) + " has an invalid departure time");
    }
    Vehicle v;
    v.trip = t;
    v.index = static_cast<std::uint32_t>(i);
    vehicles_.push_back(std::move(v));
  }
  departure_order_.resize(vehicles_.size());
  std::iota(departure_order_.begin(), departure_order_.end(), 0U);
  std::stable_sort(departure_order_.begin(), departure_order_.end(), [&](std::uint32_t a, std::uint32_t b) {
    const Trip& ta = vehicles_[a].trip;
    const Trip& tb = vehicles_[b].trip;
    if (ta.departure != tb.departure) return ta.departure < tb.departure;
    return ta.id < tb.id;
  });

  links_.resize(network.link_count());
  for (LinkIndex l = 0; l < network.link_count(); ++l) {
    auto& ls = links_[l];
    ls.credit_rate = network.link(l).capacity_hat / 3600.0;
    ls.credit_cap = std::max(1.0, ls.credit_rate);
    ls.credit = ls.credit_cap;
  }
}

void Engine::step() {
  if (!attached_) {
    for (auto& p : protocols_) p->attach(*this);
    attached_ = true;
  }
  for (auto& p : protocols_) p->on_step(*this);

  inject();

  for (auto& ls : links_) ls.credit = std::min(ls.credit_cap, ls.credit + ls.credit_rate);

  for (LinkIndex l = 0; l < links_.size(); ++l) {
    if (!links_[l].fifo.empty()) release(l);
  }

  const Seconds cutoff = now_ - options_.sample_retention;
  for (auto& ls : links_) {
    while (!ls.exits.empty() && ls.exits.front().at <= cutoff) ls.exits.pop_front();
  }
  now_ += 1.0;
}

void Engine::inject() {
  while (next_departure_ < departure_order_.size() &&
         vehicles_[departure_order_[next_departure_]].trip.departure <= now_ + kEps) {
    Vehicle& v = vehicles_[departure_order_[next_departure_++]];
    ++injected_;
    ++on_network_;
    if (v.trip.origin == v.trip.destination) {
      v.arrival = v.trip.departure;
      v.state = VehicleState::kArrived;
      --on_network_;
      ++arrived_;
      protocols_[v.trip.protocol]->on_arrival(v, *this);
      continue;
    }
    waiting_.push_back(v.index);
  }

  std::size_t keep = 0;
  for (std::size_t i = 0; i < waiting_.size(); ++i) {
    Vehicle& v = vehicles_[waiting_[i]];
    LinkIndex first = ask(v, v.trip.origin);
    if (first == kNoLink) {
      waiting_[keep++] = waiting_[i];
    } else {
      enter(v, first);
    }
  }
  waiting_.resize(keep);
}

LinkIndex Engine::ask(Vehicle& v, NodeIndex at) {
  LinkIndex next = protocols_[v.trip.protocol]->route(v, at, *this);
  if (next == kNoLink) return kNoLink;
  if (next >= network_->link_count() || network_->tail(next) != at) {
    throw ConsistencyError("protocol '" + std::string(protocols_[v.trip.protocol]->name()) +
                           "' returned a link not leaving node " + std::to_string(network_->node(at).id) +
                           " for vehicle " + std::to_string(v.trip.id));
  }
  return next;
}

void Engine::enter(Vehicle& v, LinkIndex link) {
  v.state = VehicleState::kOnLink;
  v.link = link;
  v.entered = now_;
  v.earliest_exit = now_ + network_->t0(link);
  links_[link].fifo.push_back(v.index);
}

void Engine::arrive(Vehicle& v) {
  v.state = VehicleState::kArrived;
  v.link = kNoLink;
  v.arrival = now_;
  --on_network_;
  ++arrived_;
  protocols_[v.trip.protocol]->on_arrival(v, *this);
}

void Engine::release(LinkIndex link) {
  LinkState& ls = links_[link];
  const NodeIndex at = network_->head(link);
  while (!ls.fifo.empty()) {
    Vehicle& v = vehicles_[ls.fifo.front()];
    if (v.earliest_exit > now_ + kEps || ls.credit < 1.0 - kEps) break;

    LinkIndex next = kNoLink;
    if (at != v.trip.destination) {
      next = ask(v, at);
      if (next == kNoLink) break;
    }

    ls.fifo.pop_front();
    ls.credit = std::max(0.0, ls.credit - 1.0);
    const Seconds travel = now_ - v.entered;
    v.traversed.push_back(Traversal{link, v.entered, now_});
    ls.exits.push_back(Exit{now_, travel});
    auto& stats = link_minutes_[{minute_of(now_), link}];
    stats.travel_time_sum += travel;
    ++stats.exits;

    if (next == kNoLink) {
      arrive(v);
    } else {
      enter(v, next);
    }
  }
}

Seconds Engine::current_mean_travel_time(LinkIndex link, Seconds window) const {
  if (link >= links_.size()) throw NotFound("unknown link index " + std::to_string(link));
  if (!(window > 0.0)) throw InvalidArgument("window must be > 0");
  const LinkState& ls = links_[link];
  const Seconds from = now_ - window;
  double sum = 0.0;
  std::size_t n = 0;
  for (auto it = ls.exits.rbegin(); it != ls.exits.rend() && it->at > from; ++it) {
    sum += it->travel_time;
    ++n;
  }
  if (n > 0) return sum / static_cast<double>(n);
  const Seconds t0 = network_->t0(link);
  if (ls.fifo.empty()) return t0;
  return queue_travel_time(t0, static_cast<double>(ls.fifo.size() + 1), network_->link(link).capacity_hat);
}

MetricsLog Engine::run() {
  while (!finished() && now_ < options_.horizon) step();
  return metrics();
}

MetricsLog Engine::metrics() const {
  MetricsLog log;
  for (const auto& p : protocols_) log.protocols.emplace_back(p->name());
  log.vehicles.reserve(vehicles_.size());
  for (const Vehicle& v : vehicles_) {
    VehicleRecord r{v.trip.id, v.trip.protocol, v.trip.departure, std::nullopt};
    if (v.state == VehicleState::kArrived) {
      r.arrival = v.arrival;
    } else {
      ++log.stranded;
    }
    log.vehicles.push_back(r);
  }
  std::sort(log.vehicles.begin(), log.vehicles.end(),
            [](const VehicleRecord& a, const VehicleRecord& b) { return a.id < b.id; });
  log.link_minutes = link_minutes_;
  log.end_time = now_;
  return log;
}

std::vector<ArrivalRow> MetricsLog::arrivals_series() const {
  std::int64_t last = -1;
  for (const auto& v : vehicles) {
    if (v.arrival) last = std::max(last, minute_of(*v.arrival));
  }
  std::vector<ArrivalRow> rows;
  if (last < 0) return rows;
  const auto minutes = static_cast<std::size_t>(last + 1);
  std::vector<std::vector<std::uint64_t>> per(protocols.size(), std::vector<std::uint64_t>(minutes, 0));
  for (const auto& v : vehicles) {
    if (v.arrival) ++per[v.protocol][static_cast<std::size_t>(minute_of(*v.arrival))];
  }
  rows.reserve(minutes * protocols.size());
  std::vector<std::uint64_t> running(protocols.size(), 0);
  for (std::size_t m = 0; m < minutes; ++m) {
    for (ProtocolIndex p = 0; p < protocols.size(); ++p) {
      running[p] += per[p][m];
      rows.push_back(ArrivalRow{static_cast<std::int64_t>(m), p, running[p]});
    }
  }
  return rows;
}

void MetricsLog::write_vehicles_csv(std::ostream& out) const {
  out << "vehicle_id,protocol,departure_s,arrival_s,travel_time_s\n";
  for (const auto& v : vehicles) {
    out << v.id << ',' << protocols[v.protocol] << ',' << detail::num(v.departure) << ',';
    if (v.arrival) out << detail::num(*v.arrival) << ',' << detail::num(*v.travel_time());
    else out << ',';
    out << '\n';
  }
}

void MetricsLog::write_arrivals_csv(std::ostream& out) const {
  out << "minute,protocol,cumulative_arrived\n";
  for (const auto& r : arrivals_series()) {
    out << r.minute << ',' << protocols[r.protocol] << ',' << r.cumulative << '\n';
  }
}

void MetricsLog::write_links_csv(const RoadNetwork& net, std::ostream& out) const {
  out << "minute,link_id,mean_travel_time_s,exits\n";
  for (const auto& [key, stats] : link_minutes) {
    out << key.first << ',' << net.link(key.second).id << ','
        << detail::num(stats.travel_time_sum / stats.exits) << ',' << stats.exits << '\n';
  }
}

}  // namespace resroute
