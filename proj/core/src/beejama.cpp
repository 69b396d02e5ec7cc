#include "resroute/beejama.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "resroute/error.hpp"

namespace resroute {

namespace {

struct BBox {
  double min_x, min_y, max_x, max_y;
};

BBox bounds(const RoadNetwork& net) {
  BBox b{net.node(0).x, net.node(0).y, net.node(0).x, net.node(0).y};
  for (const Node& n : net.nodes()) {
    b.min_x = std::min(b.min_x, n.x);
    b.min_y = std::min(b.min_y, n.y);
    b.max_x = std::max(b.max_x, n.x);
    b.max_y = std::max(b.max_y, n.y);
  }
  return b;
}

using Cell = std::pair<std::int64_t, std::int64_t>;  // (row, col), row-major ordering

Cell cell_of(const Node& n, const BBox& b, double size) {
  return {static_cast<std::int64_t>(std::floor((n.y - b.min_y) / size)),
          static_cast<std::int64_t>(std::floor((n.x - b.min_x) / size))};
}

double distance_to_cell(const Node& n, const BBox& b, double size, Cell c) {
  const double x0 = b.min_x + static_cast<double>(c.second) * size;
  const double y0 = b.min_y + static_cast<double>(c.first) * size;
  const double dx = std::max({x0 - n.x, 0.0, n.x - (x0 + size)});
  const double dy = std::max({y0 - n.y, 0.0, n.y - (y0 + size)});
  return std::hypot(dx, dy);
}

// Own-cell grouping shared by hierarchy layers and navigator areas.
std::map<Cell, std::vector<NodeIndex>> group_by_cell(const RoadNetwork& net, const BBox& b, double size) {
  std::map<Cell, std::vector<NodeIndex>> cells;
  for (NodeIndex i = 0; i < net.node_count(); ++i) cells[cell_of(net.node(i), b, size)].push_back(i);
  return cells;
}

struct Message {
  NodeIndex at;
  Seconds cost;
  int hops_left;
  int hops_used;
  NodeIndex from;
};

}  // namespace

Hierarchy build_hierarchy(const RoadNetwork& net, std::span<const double> layer_cell_sizes,
                          std::span<const int> hop_limits, double overlap) {
  if (net.node_count() == 0) throw InvalidArgument("build_hierarchy: empty network");
  if (layer_cell_sizes.empty() || layer_cell_sizes.size() != hop_limits.size()) {
    throw InvalidArgument("build_hierarchy: need one hop limit per layer");
  }
  for (std::size_t k = 0; k < layer_cell_sizes.size(); ++k) {
    if (!(layer_cell_sizes[k] > 0.0)) throw InvalidArgument("build_hierarchy: cell sizes must be > 0");
    if (hop_limits[k] < 1) throw InvalidArgument("build_hierarchy: hop limits must be >= 1");
    if (k > 0 && !(layer_cell_sizes[k] > layer_cell_sizes[k - 1])) {
      throw InvalidArgument("build_hierarchy: cell sizes must be strictly increasing");
    }
    if (k > 0 && !(hop_limits[k] > hop_limits[k - 1])) {
      throw InvalidArgument("build_hierarchy: hop limits must strictly decrease towards finer layers");
    }
  }
  if (hop_limits.back() != kInfiniteHops) throw InvalidArgument("build_hierarchy: top layer needs infinite hops");
  if (overlap < 0.0) throw InvalidArgument("build_hierarchy: overlap must be >= 0");

  const BBox b = bounds(net);
  Hierarchy h;
  for (std::size_t k = 0; k < layer_cell_sizes.size(); ++k) {
    const double size = layer_cell_sizes[k];
    HierarchyLayer layer;
    layer.cell_size = size;
    layer.hop_limit = hop_limits[k];
    layer.clusters_of.assign(net.node_count(), {});
    layer.represented_by.assign(net.node_count(), HierarchyLayer::kNone);

    const auto cells = group_by_cell(net, b, size);
    std::map<Cell, ClusterId> cluster_of_cell;
    for (const auto& [cell, own] : cells) {
      const auto id = static_cast<ClusterId>(layer.members.size());
      cluster_of_cell.emplace(cell, id);
      layer.members.push_back(own);

      const double x0 = std::max(b.min_x, b.min_x + static_cast<double>(cell.second) * size);
      const double x1 = std::min(b.max_x, b.min_x + static_cast<double>(cell.second + 1) * size);
      const double y0 = std::max(b.min_y, b.min_y + static_cast<double>(cell.first) * size);
      const double y1 = std::min(b.max_y, b.min_y + static_cast<double>(cell.first + 1) * size);
      const double cx = (x0 + x1) / 2.0;
      const double cy = (y0 + y1) / 2.0;
      NodeIndex rep = own.front();
      double best = std::hypot(net.node(rep).x - cx, net.node(rep).y - cy);
      for (NodeIndex n : own) {
        const double d = std::hypot(net.node(n).x - cx, net.node(n).y - cy);
        if (d < best) {
          best = d;
          rep = n;
        }
      }
      layer.representative.push_back(rep);
      layer.represented_by[rep] = id;
    }

    for (NodeIndex n = 0; n < net.node_count(); ++n) {
      const Cell own = cell_of(net.node(n), b, size);
      auto& mine = layer.clusters_of[n];
      mine.push_back(cluster_of_cell.at(own));
      if (overlap <= 0.0) continue;
      for (std::int64_t dr = -1; dr <= 1; ++dr) {
        for (std::int64_t dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const Cell other{own.first + dr, own.second + dc};
          auto it = cluster_of_cell.find(other);
          if (it == cluster_of_cell.end()) continue;
          if (distance_to_cell(net.node(n), b, size, other) <= overlap) {
            mine.push_back(it->second);
            layer.members[it->second].push_back(n);
          }
        }
      }
      std::sort(mine.begin(), mine.end());
    }
    for (auto& m : layer.members) std::sort(m.begin(), m.end());
    h.layers.push_back(std::move(layer));
  }
  return h;
}

std::vector<Navigator> build_navigators(const RoadNetwork& net, double cell_size) {
  if (!(cell_size > 0.0)) throw InvalidArgument("navigator cell size must be > 0");
  std::vector<Navigator> out;
  if (net.node_count() == 0) return out;
  const BBox b = bounds(net);
  std::vector<std::uint32_t> owner(net.node_count());
  for (auto& [cell, nodes] : group_by_cell(net, b, cell_size)) {
    Navigator nav;
    nav.id = static_cast<std::uint32_t>(out.size());
    nav.area = nodes;
    for (NodeIndex n : nodes) owner[n] = nav.id;
    out.push_back(std::move(nav));
  }
  for (LinkIndex l = 0; l < net.link_count(); ++l) out[owner[net.head(l)]].owned_links.push_back(l);
  return out;
}

// ---------------------------------------------------------------------------

RoutingTables::RoutingTables(const Hierarchy& hierarchy, std::size_t node_count) : nodes_(node_count) {
  for (const auto& layer : hierarchy.layers) layers_.emplace_back(layer.cluster_count() * node_count);
}

FloodStats flood_upstream(const Hierarchy& hierarchy, const RoadNetwork& net, std::span<const Seconds> link_cost,
                          std::int64_t generation, RoutingTables& tables) {
  if (link_cost.size() != net.link_count()) throw InvalidArgument("flood_upstream: link cost size mismatch");
  FloodStats stats;
  stats.max_hops.assign(hierarchy.layers.size(), 0);
  std::vector<Message> queue;
  for (std::size_t layer = 0; layer < hierarchy.layers.size(); ++layer) {
    const HierarchyLayer& hl = hierarchy.layers[layer];
    const bool unlimited = hl.hop_limit == kInfiniteHops;
    for (ClusterId c = 0; c < hl.cluster_count(); ++c) {
      const NodeIndex rep = hl.representative[c];
      tables.entry(layer, c, rep) = RouteEntry{kNoLink, 0.0, generation};
      queue.clear();
      queue.push_back(Message{rep, 0.0, hl.hop_limit, 0, kNoNode});
      for (std::size_t head = 0; head < queue.size(); ++head) {
        const Message msg = queue[head];
        for (LinkIndex l : net.in_links(msg.at)) {
          const NodeIndex n = net.tail(l);
          if (n == msg.from) continue;
          ++stats.messages;
          const Seconds cand = msg.cost + link_cost[l];
          RouteEntry& e = tables.entry(layer, c, n);
          if (e.generation >= generation && !(cand < e.cost)) continue;
          e = RouteEntry{l, cand, generation};
          ++stats.updates;
          const int used = msg.hops_used + 1;
          stats.max_hops[layer] = std::max(stats.max_hops[layer], used);
          const int left = unlimited ? kInfiniteHops : msg.hops_left - 1;
          if (left > 0) queue.push_back(Message{n, cand, left, used, msg.at});
        }
      }
    }
  }
  return stats;
}

DownstreamTables::DownstreamTables(const Hierarchy& hierarchy, std::size_t node_count)
    : nodes_(node_count),
      slots_(hierarchy.layers.empty() ? 0 : hierarchy.layers.front().cluster_count() * node_count),
      min_per_node_(node_count) {}

std::optional<Seconds> DownstreamTables::forward_time(ClusterId origin_cluster, NodeIndex node) const {
  const Slot& s = slots_.at(static_cast<std::size_t>(origin_cluster) * nodes_ + node);
  if (s.generation < 0) return std::nullopt;
  return s.time;
}

Seconds DownstreamTables::horizon(NodeIndex node) const {
  if (node >= min_per_node_.size()) return 0.0;
  const Slot& s = min_per_node_[node];
  return s.generation >= 0 ? s.time : 0.0;
}

FloodStats flood_downstream(const Hierarchy& hierarchy, const RoadNetwork& net, std::span<const Seconds> link_time,
                            std::int64_t generation, DownstreamTables& tables) {
  if (link_time.size() != net.link_count()) throw InvalidArgument("flood_downstream: link time size mismatch");
  FloodStats stats;
  stats.max_hops.assign(1, 0);
  if (hierarchy.layers.empty()) return stats;
  const HierarchyLayer& hl = hierarchy.layers.front();
  const bool unlimited = hl.hop_limit == kInfiniteHops;
  std::vector<Message> queue;
  for (ClusterId c = 0; c < hl.cluster_count(); ++c) {
    const NodeIndex origin = hl.representative[c];
    queue.clear();
    queue.push_back(Message{origin, 0.0, hl.hop_limit, 0, kNoNode});
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const Message msg = queue[head];
      for (LinkIndex l : net.out_links(msg.at)) {
        const NodeIndex n = net.head(l);
        if (n == msg.from || n == origin) continue;
        ++stats.messages;
        const Seconds cand = msg.cost + link_time[l];
        auto& slot = tables.slots_[static_cast<std::size_t>(c) * tables.nodes_ + n];
        if (slot.generation >= generation && !(cand < slot.time)) continue;
        slot = {cand, generation};
        ++stats.updates;
        auto& best = tables.min_per_node_[n];
        if (best.generation < generation || cand < best.time) best = {cand, generation};
        const int used = msg.hops_used + 1;
        stats.max_hops[0] = std::max(stats.max_hops[0], used);
        const int left = unlimited ? kInfiniteHops : msg.hops_left - 1;
        if (left > 0) queue.push_back(Message{n, cand, left, used, msg.at});
      }
    }
  }
  return stats;
}

LinkIndex try_next_hop(const Hierarchy& hierarchy, const RoutingTables& tables, const RoadNetwork& net,
                       NodeIndex node, NodeIndex destination) {
  // The destination's own entry wins, finest layer first.
  for (std::size_t layer = 0; layer < hierarchy.layers.size(); ++layer) {
    const ClusterId c = hierarchy.layers[layer].represented_by[destination];
    if (c == HierarchyLayer::kNone) continue;
    const RouteEntry& e = tables.entry(layer, c, node);
    if (e.valid() && e.next != kNoLink) return e.next;
  }
  for (std::size_t layer = 0; layer < hierarchy.layers.size(); ++layer) {
    const HierarchyLayer& hl = hierarchy.layers[layer];
    const RouteEntry* best = nullptr;
    for (ClusterId c : hl.clusters_of[destination]) {
      const RouteEntry& e = tables.entry(layer, c, node);
      if (!e.valid() || e.next == kNoLink) continue;
      if (!best || e.cost < best->cost ||
          (e.cost == best->cost && net.node(net.head(e.next)).id < net.node(net.head(best->next)).id)) {
        best = &e;
      }
    }
    if (best) return best->next;
  }
  return kNoLink;
}

LinkIndex next_hop(const Hierarchy& hierarchy, const RoutingTables& tables, const RoadNetwork& net, NodeIndex node,
                   NodeIndex destination) {
  const LinkIndex l = try_next_hop(hierarchy, tables, net, node, destination);
  if (l == kNoLink) {
    throw NoRoute("no routing entry at node " + std::to_string(net.node(node).id) + " towards " +
                  std::to_string(net.node(destination).id));
  }
  return l;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kNaive:
      return "N";
    case Variant::kStatic:
      return "S";
    case Variant::kDynamicHybrid:
      return "DH";
    case Variant::kPlain:
      break;
  }
  return "plain";
}

Variant variant_from_string(std::string_view name) {
  if (name == "plain") return Variant::kPlain;
  if (name == "N") return Variant::kNaive;
  if (name == "S") return Variant::kStatic;
  if (name == "DH") return Variant::kDynamicHybrid;
  throw InvalidArgument("unknown BeeJamA variant '" + std::string(name) + "'");
}

BeeJama::BeeJama(const RoadNetwork& net, BeeJamaConfig config)
    : net_(&net),
      config_(std::move(config)),
      hierarchy_(build_hierarchy(net, config_.layer_cell_sizes, config_.hop_limits, config_.overlap)),
      navigators_(build_navigators(net, config_.navigator_cell)),
      tables_(hierarchy_, net.node_count()),
      downstream_(hierarchy_, net.node_count()),
      ledger_(net.link_count(), config_.slot_length),
      windows_(net.link_count()),
      cost_scratch_(net.link_count()) {
  if (!(config_.scout_period > 0.0) || !(config_.downstream_period > 0.0) || !(config_.sample_period > 0.0)) {
    throw InvalidArgument("BeeJamA periods must be > 0");
  }
  if (config_.variant == Variant::kStatic && !(config_.penetration > 0.0 && config_.penetration <= 1.0)) {
    throw InvalidArgument("static variant needs a penetration in (0, 1]");
  }
}

void BeeJama::attach(const Engine& engine) { vehicles_.assign(engine.vehicles().size(), {}); }

Seconds BeeJama::lpf_travel_time(LinkIndex link, Seconds t) const {
  return reserved_travel_time(*net_, ledger_, link, t, config_.flow);
}

Seconds BeeJama::link_cost(LinkIndex link, Seconds eval_offset, Seconds now, const Engine& engine) const {
  const Seconds at = now + std::max(0.0, eval_offset);
  switch (config_.variant) {
    case Variant::kPlain:
      return engine.current_mean_travel_time(link, config_.mean_window);
    case Variant::kNaive:
      return lpf_travel_time(link, at);
    case Variant::kStatic: {
      const Seconds t0 = net_->t0(link);
      const double p = config_.penetration;
      const double flow = reservation_flow(ledger_.expected_flow(link, at), config_.slot_length, config_.flow);
      if (config_.static_scaling == StaticScaling::kTime) {
        return std::max(t0, queue_travel_time(t0, flow, net_->link(link).capacity_hat)) / p;
      }
      return std::max(t0, queue_travel_time(t0, flow / p, net_->link(link).capacity_hat));
    }
    case Variant::kDynamicHybrid:
      return blend(windows_[link].pearson_r(), lpf_travel_time(link, at),
                   engine.current_mean_travel_time(link, config_.mean_window));
  }
  throw InvalidArgument("unknown variant");
}

void BeeJama::sample_errors(const Engine& engine) {
  const Seconds now = engine.now();
  for (const Navigator& nav : navigators_) {
    for (LinkIndex l : nav.owned_links) {
      windows_[l].record(engine.current_mean_travel_time(l, config_.mean_window), lpf_travel_time(l, now));
    }
  }
}

void BeeJama::flood(const Engine& engine) {
  const Seconds now = engine.now();
  for (LinkIndex l = 0; l < net_->link_count(); ++l) {
    const Seconds offset = reserving() ? downstream_.horizon(net_->tail(l)) : 0.0;
    cost_scratch_[l] = link_cost(l, offset, now, engine);
  }
  last_upstream_ = flood_upstream(hierarchy_, *net_, cost_scratch_, generation_++, tables_);
}

void BeeJama::on_step(const Engine& engine) {
  const Seconds now = engine.now();
  if (reserving()) {
    if (std::fmod(now, config_.slot_length) == 0.0) ledger_.prune(now);
    if (std::fmod(now, config_.downstream_period) == 0.0) {
      for (LinkIndex l = 0; l < net_->link_count(); ++l) {
        cost_scratch_[l] = engine.current_mean_travel_time(l, config_.mean_window);
      }
      flood_downstream(hierarchy_, *net_, cost_scratch_, downstream_generation_++, downstream_);
    }
  }
  if (config_.variant == Variant::kDynamicHybrid && std::fmod(now, config_.sample_period) == 0.0) {
    sample_errors(engine);
  }
  if (std::fmod(now, config_.scout_period) == 0.0) flood(engine);
}

PathReservation BeeJama::dispatch_forager(const Vehicle& vehicle, NodeIndex at, const Engine& engine) {
  const Seconds now = engine.now();
  const NodeIndex destination = vehicle.trip.destination;
  PathReservation path;
  path.vehicle = vehicle.trip.id;
  std::vector<char> visited(net_->node_count(), 0);
  visited[at] = 1;
  Seconds clock = now;
  ++forager_stats_.dispatched;
  for (NodeIndex current = at; current != destination;) {
    const LinkIndex l = try_next_hop(hierarchy_, tables_, *net_, current, destination);
    if (l == kNoLink) {
      ++forager_stats_.no_route;
      break;
    }
    const NodeIndex next = net_->head(l);
    if (visited[next]) {
      ++forager_stats_.loops;
      break;
    }
    visited[next] = 1;
    const Seconds t_exit = clock + std::max(net_->t0(l), link_cost(l, clock - now, now, engine));
    path.entries.push_back(ReservedLink{l, clock, t_exit});
    clock = t_exit;
    current = next;
  }
  VehicleState& s = vehicles_[vehicle.index];
  reserve_path(ledger_, s.reservation, path, now);
  s.reservation = path;
  s.cursor = 0;
  return path;
}

LinkIndex BeeJama::route(const Vehicle& vehicle, NodeIndex at, const Engine& engine) {
  const LinkIndex chosen = try_next_hop(hierarchy_, tables_, *net_, at, vehicle.trip.destination);
  if (chosen == kNoLink || !reserving()) return chosen;

  VehicleState& s = vehicles_[vehicle.index];
  const bool on_plan =
      s.reservation && s.cursor < s.reservation->entries.size() && s.reservation->entries[s.cursor].link == chosen;
  if (!on_plan) dispatch_forager(vehicle, at, engine);
  ++s.cursor;
  return chosen;
}

}  // namespace resroute
