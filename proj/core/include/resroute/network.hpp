#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace resroute {

using NodeId = std::int64_t;
using LinkId = std::int64_t;

// Dense positions into RoadNetwork::nodes() / links(). Algorithms work on
// indices; ids only appear at the file and CSV boundary.
using NodeIndex = std::uint32_t;
using LinkIndex = std::uint32_t;

inline constexpr NodeIndex kNoNode = static_cast<NodeIndex>(-1);
inline constexpr LinkIndex kNoLink = static_cast<LinkIndex>(-1);

using Seconds = double;

enum class RoadClass { kDefault, kHighway, kMultilane };

std::string_view to_string(RoadClass c);
// Unknown names map to kDefault.
RoadClass road_class_from_string(std::string_view name);

struct BprParams {
  double alpha = 0.15;
  double beta = 4.0;

  static constexpr BprParams preset(RoadClass c) {
    switch (c) {
      case RoadClass::kHighway:
        return {0.88, 9.8};
      case RoadClass::kMultilane:
        return {1.0, 5.4};
      case RoadClass::kDefault:
        break;
    }
    return {0.15, 4.0};
  }
};

struct Node {
  NodeId id = 0;
  double x = 0.0;  // meters
  double y = 0.0;  // meters

  friend bool operator==(const Node&, const Node&) = default;
};

struct Link {
  LinkId id = 0;
  NodeId from = 0;
  NodeId to = 0;
  double length = 0.0;        // meters
  double free_speed = 0.0;    // m/s
  double capacity = 0.0;      // design capacity c_e, veh/h
  double capacity_hat = 0.0;  // flow capacity used by the queue model, veh/h
  int lanes = 1;
  RoadClass road_class = RoadClass::kDefault;

  Seconds t0() const { return length / free_speed; }

  friend bool operator==(const Link&, const Link&) = default;
};

// Immutable directed road graph. Nodes and links are stored sorted by id;
// adjacency lists hold link indices in ascending id order.
class RoadNetwork {
 public:
  RoadNetwork() = default;

  // Validates and indexes. Throws ValidationError naming the offending
  // entity (duplicate id, dangling endpoint, self loop, bad attribute).
  RoadNetwork(std::vector<Node> nodes, std::vector<Link> links);

  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Link> links() const { return links_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t link_count() const { return links_.size(); }

  const Node& node(NodeIndex i) const { return nodes_[i]; }
  const Link& link(LinkIndex i) const { return links_[i]; }

  NodeIndex tail(LinkIndex l) const { return tails_[l]; }
  NodeIndex head(LinkIndex l) const { return heads_[l]; }
  Seconds t0(LinkIndex l) const { return t0_[l]; }

  std::span<const LinkIndex> out_links(NodeIndex n) const { return out_[n]; }
  std::span<const LinkIndex> in_links(NodeIndex n) const { return in_[n]; }

  std::optional<NodeIndex> find_node(NodeId id) const;
  std::optional<LinkIndex> find_link(LinkId id) const;
  NodeIndex node_index(NodeId id) const;  // throws NotFound
  LinkIndex link_index(LinkId id) const;  // throws NotFound

  // Link from a to b with the lowest id, or kNoLink.
  LinkIndex link_between(NodeIndex a, NodeIndex b) const;

  double distance(NodeIndex a, NodeIndex b) const;
  double max_free_speed() const { return max_free_speed_; }
  // Largest pairwise euclidean node distance. O(n^2).
  double diameter() const;

  friend bool operator==(const RoadNetwork& a, const RoadNetwork& b) {
    return a.nodes_ == b.nodes_ && a.links_ == b.links_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::vector<NodeIndex> tails_;
  std::vector<NodeIndex> heads_;
  std::vector<Seconds> t0_;
  std::vector<std::vector<LinkIndex>> out_;
  std::vector<std::vector<LinkIndex>> in_;
  std::unordered_map<NodeId, NodeIndex> node_pos_;
  std::unordered_map<LinkId, LinkIndex> link_pos_;
  double max_free_speed_ = 0.0;
};

// BPR link performance function: t0 * (1 + alpha * (flow/capacity)^beta).
// flow and capacity in vehicles/hour.
Seconds bpr_travel_time(Seconds t0, double flow, double capacity, BprParams params);

// Queue link performance function of the outflow-capacity model:
// t0 while flow < capacity_hat, else t0 + (flow - 1) * 3600 / capacity_hat.
// `flow` is a vehicle count.
Seconds queue_travel_time(Seconds t0, double flow, double capacity_hat);

// Network document I/O. See README for the format.
RoadNetwork load_network(std::istream& in);
RoadNetwork load_network_file(const std::string& path);
void save_network(const RoadNetwork& net, std::ostream& out);

struct GridSpec {
  int rows = 2;
  int cols = 2;
  double edge_length = 100.0;  // meters
  double free_speed = 10.0;    // m/s
  double capacity = 600.0;     // veh/h, per lane
  int lanes = 1;
  bool bidirectional = true;
};

// rows x cols lattice. Node ids are row-major from 0 at (col*len, row*len).
// Unidirectional grids orient every link from the lower to the higher node
// id (east and south). Link ids follow (from, to) order.
RoadNetwork generate_grid(const GridSpec& spec);

}  // namespace resroute
