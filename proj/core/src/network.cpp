#include "resroute/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

#include "resroute/error.hpp"

namespace resroute {

using nlohmann::json;

std::string_view to_string(RoadClass c) {
  switch (c) {
    case RoadClass::kHighway:
      return "highway";
    case RoadClass::kMultilane:
      return "multilane";
    case RoadClass::kDefault:
      break;
  }
  return "default";
}

RoadClass road_class_from_string(std::string_view name) {
  if (name == "highway") return RoadClass::kHighway;
  if (name == "multilane") return RoadClass::kMultilane;
  return RoadClass::kDefault;
}

RoadNetwork::RoadNetwork(std::vector<Node> nodes, std::vector<Link> links)
    : nodes_(std::move(nodes)), links_(std::move(links)) {
  std::sort(nodes_.begin(), nodes_.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
  std::sort(links_.begin(), links_.end(), [](const Link& a, const Link& b) { return a.id < b.id; });

  node_pos_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (!std::isfinite(n.x) || !std::isfinite(n.y)) {
      throw ValidationError("node " + std::to_string(n.id) + ": non-finite coordinates");
    }
    if (!node_pos_.emplace(n.id, static_cast<NodeIndex>(i)).second) {
      throw ValidationError("duplicate node id " + std::to_string(n.id));
    }
  }

  out_.assign(nodes_.size(), {});
  in_.assign(nodes_.size(), {});
  tails_.reserve(links_.size());
  heads_.reserve(links_.size());
  t0_.reserve(links_.size());
  link_pos_.reserve(links_.size());
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    const std::string name = "link " + std::to_string(l.id);
    if (!link_pos_.emplace(l.id, static_cast<LinkIndex>(i)).second) {
      throw ValidationError("duplicate link id " + std::to_string(l.id));
    }
    auto from = node_pos_.find(l.from);
    if (from == node_pos_.end()) {
      throw ValidationError(name + ": unknown from node " + std::to_string(l.from));
    }
    auto to = node_pos_.find(l.to);
    if (to == node_pos_.end()) {
      throw ValidationError(name + ": unknown to node " + std::to_string(l.to));
    }
    if (l.from == l.to) throw ValidationError(name + ": self loop");
    if (!(l.length > 0.0) || !std::isfinite(l.length)) throw ValidationError(name + ": length must be > 0");
    if (!(l.free_speed > 0.0) || !std::isfinite(l.free_speed)) {
      throw ValidationError(name + ": free_speed must be > 0");
    }
    if (!(l.capacity > 0.0) || !std::isfinite(l.capacity)) throw ValidationError(name + ": capacity must be > 0");
    if (!(l.capacity_hat >= 1.0) || !std::isfinite(l.capacity_hat)) {
      throw ValidationError(name + ": capacity_hat must be >= 1 veh/h");
    }
    if (l.lanes < 1) throw ValidationError(name + ": lanes must be >= 1");

    tails_.push_back(from->second);
    heads_.push_back(to->second);
    t0_.push_back(l.t0());
    out_[from->second].push_back(static_cast<LinkIndex>(i));
    in_[to->second].push_back(static_cast<LinkIndex>(i));
    max_free_speed_ = std::max(max_free_speed_, l.free_speed);
  }
}

std::optional<NodeIndex> RoadNetwork::find_node(NodeId id) const {
  auto it = node_pos_.find(id);
  if (it == node_pos_.end()) return std::nullopt;
  return it->second;
}

std::optional<LinkIndex> RoadNetwork::find_link(LinkId id) const {
  auto it = link_pos_.find(id);
  if (it == link_pos_.end()) return std::nullopt;
  return it->second;
}

NodeIndex RoadNetwork::node_index(NodeId id) const {
  if (auto i = find_node(id)) return *i;
  throw NotFound("unknown node id " + std::to_string(id));
}

LinkIndex RoadNetwork::link_index(LinkId id) const {
  if (auto i = find_link(id)) return *i;
  throw NotFound("unknown link id " + std::to_string(id));
}

LinkIndex RoadNetwork::link_between(NodeIndex a, NodeIndex b) const {
  for (LinkIndex l : out_[a]) {
    if (heads_[l] == b) return l;
  }
  return kNoLink;
}

double RoadNetwork::distance(NodeIndex a, NodeIndex b) const {
  return std::hypot(nodes_[a].x - nodes_[b].x, nodes_[a].y - nodes_[b].y);
}

double RoadNetwork::diameter() const {
  double best = 0.0;
  for (NodeIndex a = 0; a < nodes_.size(); ++a) {
    for (NodeIndex b = a + 1; b < nodes_.size(); ++b) best = std::max(best, distance(a, b));
  }
  return best;
}

namespace {

void require_finite(std::initializer_list<double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite link performance input");
  }
}

}  // namespace

Seconds bpr_travel_time(Seconds t0, double flow, double capacity, BprParams params) {
  require_finite({t0, flow, capacity, params.alpha, params.beta});
  if (!(t0 > 0.0) || !(capacity > 0.0) || flow < 0.0) {
    throw InvalidArgument("bpr_travel_time requires t0 > 0, capacity > 0, flow >= 0");
  }
  return t0 * (1.0 + params.alpha * std::pow(flow / capacity, params.beta));
}

Seconds queue_travel_time(Seconds t0, double flow, double capacity_hat) {
  require_finite({t0, flow, capacity_hat});
  if (!(t0 > 0.0) || !(capacity_hat > 0.0) || flow < 0.0) {
    throw InvalidArgument("queue_travel_time requires t0 > 0, capacity_hat > 0, flow >= 0");
  }
  if (flow < capacity_hat) return t0;
  return t0 + (flow - 1.0) * 3600.0 / capacity_hat;
}

// ---------------------------------------------------------------------------
// Network document

namespace {

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ParseError("expected an object", 0, where);
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError("unknown key", 0, where + "." + key);
    }
  }
}

const json& required(const json& obj, const std::string& where, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("missing required key", 0, where + "." + key);
  return *it;
}

std::int64_t as_id(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ParseError("expected an integer", 0, field);
  return v.get<std::int64_t>();
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ParseError("expected a number", 0, field);
  return v.get<double>();
}

}  // namespace

RoadNetwork load_network(std::istream& in) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), line_of(text, e.byte));
  }
  check_keys(doc, "$", {"nodes", "links"});
  const json& jnodes = required(doc, "$", "nodes");
  const json& jlinks = required(doc, "$", "links");
  if (!jnodes.is_array()) throw ParseError("expected an array", 0, "nodes");
  if (!jlinks.is_array()) throw ParseError("expected an array", 0, "links");

  std::vector<Node> nodes;
  nodes.reserve(jnodes.size());
  for (std::size_t i = 0; i < jnodes.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    const json& jn = jnodes[i];
    check_keys(jn, where, {"id", "x", "y"});
    nodes.push_back(Node{as_id(required(jn, where, "id"), where + ".id"),
                         as_number(required(jn, where, "x"), where + ".x"),
                         as_number(required(jn, where, "y"), where + ".y")});
  }

  std::vector<Link> links;
  links.reserve(jlinks.size());
  for (std::size_t i = 0; i < jlinks.size(); ++i) {
    const std::string where = "links[" + std::to_string(i) + "]";
    const json& jl = jlinks[i];
    check_keys(jl, where,
               {"id", "from", "to", "length", "free_speed", "capacity", "capacity_hat", "lanes", "road_class"});
    Link l;
    l.id = as_id(required(jl, where, "id"), where + ".id");
    l.from = as_id(required(jl, where, "from"), where + ".from");
    l.to = as_id(required(jl, where, "to"), where + ".to");
    l.length = as_number(required(jl, where, "length"), where + ".length");
    l.free_speed = as_number(required(jl, where, "free_speed"), where + ".free_speed");
    l.capacity = as_number(required(jl, where, "capacity"), where + ".capacity");
    if (auto it = jl.find("lanes"); it != jl.end()) {
      l.lanes = static_cast<int>(as_id(*it, where + ".lanes"));
    }
    if (auto it = jl.find("capacity_hat"); it != jl.end()) {
      l.capacity_hat = as_number(*it, where + ".capacity_hat");
    } else {
      l.capacity_hat = l.capacity * l.lanes;
    }
    if (auto it = jl.find("road_class"); it != jl.end()) {
      if (!it->is_string()) throw ParseError("expected a string", 0, where + ".road_class");
      l.road_class = road_class_from_string(it->get<std::string>());
    }
    links.push_back(l);
  }
  return RoadNetwork(std::move(nodes), std::move(links));
}

RoadNetwork load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open network file '" + path + "'");
  return load_network(in);
}

void save_network(const RoadNetwork& net, std::ostream& out) {
  json doc;
  json& jnodes = doc["nodes"] = json::array();
  for (const Node& n : net.nodes()) jnodes.push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}});
  json& jlinks = doc["links"] = json::array();
  for (const Link& l : net.links()) {
    jlinks.push_back({{"id", l.id},
                      {"from", l.from},
                      {"to", l.to},
                      {"length", l.length},
                      {"free_speed", l.free_speed},
                      {"capacity", l.capacity},
                      {"capacity_hat", l.capacity_hat},
                      {"lanes", l.lanes},
                      {"road_class", std::string(to_string(l.road_class))}});
  }
  out << doc.dump(1) << '\n';
}

RoadNetwork generate_grid(const GridSpec& spec) {
  if (spec.rows < 2 || spec.cols < 2) throw InvalidArgument("grid needs at least 2 rows and 2 cols");
  if (!(spec.edge_length > 0.0) || !(spec.free_speed > 0.0) || !(spec.capacity > 0.0) || spec.lanes < 1) {
    throw InvalidArgument("grid parameters must be positive");
  }
  std::vector<Node> nodes;
  nodes.reserve(static_cast<std::size_t>(spec.rows * spec.cols));
  auto id_of = [&](int r, int c) { return static_cast<NodeId>(r * spec.cols + c); };
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      nodes.push_back(Node{id_of(r, c), c * spec.edge_length, r * spec.edge_length});
    }
  }

  std::set<std::pair<NodeId, NodeId>> pairs;
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      if (c + 1 < spec.cols) {
        pairs.emplace(id_of(r, c), id_of(r, c + 1));
        if (spec.bidirectional) pairs.emplace(id_of(r, c + 1), id_of(r, c));
      }
      if (r + 1 < spec.rows) {
        pairs.emplace(id_of(r, c), id_of(r + 1, c));
        if (spec.bidirectional) pairs.emplace(id_of(r + 1, c), id_of(r, c));
      }
    }
  }

  std::vector<Link> links;
  links.reserve(pairs.size());
  LinkId next = 0;
  for (const auto& [from, to] : pairs) {
    Link l;
    l.id = next++;
    l.from = from;
    l.to = to;
    l.length = spec.edge_length;
    l.free_speed = spec.free_speed;
    l.capacity = spec.capacity;
    l.lanes = spec.lanes;
    l.capacity_hat = spec.capacity * spec.lanes;
    links.push_back(l);
  }
  return RoadNetwork(std::move(nodes), std::move(links));
}

}  // namespace resroute
