#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

#include "resroute/error.hpp"
#include "resroute/harness.hpp"

namespace resroute {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

std::int64_t integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return v.get<std::int64_t>();
}

std::string string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + ": expected a string");
  return v.get<std::string>();
}

bool boolean(const json& v, const std::string& where) {
  if (!v.is_boolean()) throw ConfigError(where + ": expected true or false");
  return v.get<bool>();
}

template <typename F>
void optional_field(const json& obj, const char* key, F&& apply) {
  if (auto it = obj.find(key); it != obj.end()) apply(*it);
}

int hop_limit(const json& v, const std::string& where) {
  if (v.is_null()) return kInfiniteHops;
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinite") return kInfiniteHops;
    throw ConfigError(where + ": expected an integer or \"inf\"");
  }
  return static_cast<int>(integer(v, where));
}

std::vector<double> number_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

GridSpec parse_grid(const json& j, const std::string& where) {
  check_keys(j, where, {"rows", "cols", "edge_length", "free_speed", "capacity", "lanes", "bidirectional"});
  GridSpec g;
  optional_field(j, "rows", [&](const json& v) { g.rows = static_cast<int>(integer(v, where + ".rows")); });
  optional_field(j, "cols", [&](const json& v) { g.cols = static_cast<int>(integer(v, where + ".cols")); });
  optional_field(j, "edge_length", [&](const json& v) { g.edge_length = number(v, where + ".edge_length"); });
  optional_field(j, "free_speed", [&](const json& v) { g.free_speed = number(v, where + ".free_speed"); });
  optional_field(j, "capacity", [&](const json& v) { g.capacity = number(v, where + ".capacity"); });
  optional_field(j, "lanes", [&](const json& v) { g.lanes = static_cast<int>(integer(v, where + ".lanes")); });
  optional_field(j, "bidirectional", [&](const json& v) { g.bidirectional = boolean(v, where + ".bidirectional"); });
  return g;
}

DemandConfig parse_demand(const json& j) {
  check_keys(j, "demand", {"seed", "vehicle_count", "departures", "od", "trips"});
  DemandConfig d;
  optional_field(j, "seed", [&](const json& v) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError("demand.seed: expected a non-negative integer");
    }
    d.seed = v.get<std::uint64_t>();
  });
  bool have_per_block = false;
  optional_field(j, "departures", [&](const json& v) {
    check_keys(v, "demand.departures", {"hours", "per_hour", "block_s"});
    optional_field(v, "hours", [&](const json& x) { d.blocks = static_cast<int>(integer(x, "demand.departures.hours")); });
    optional_field(v, "per_hour", [&](const json& x) {
      d.per_block = integer(x, "demand.departures.per_hour");
      have_per_block = true;
    });
    optional_field(v, "block_s", [&](const json& x) { d.block_length = number(x, "demand.departures.block_s"); });
  });
  optional_field(j, "vehicle_count", [&](const json& v) {
    const std::int64_t n = integer(v, "demand.vehicle_count");
    if (!have_per_block) {
      if (d.blocks < 1 || n % d.blocks != 0) {
        throw ConfigError("demand.vehicle_count must be a multiple of departures.hours");
      }
      d.per_block = n / d.blocks;
    } else if (n != static_cast<std::int64_t>(d.blocks) * d.per_block) {
      throw ConfigError("demand.vehicle_count does not equal departures.hours * departures.per_hour");
    }
  });
  optional_field(j, "od", [&](const json& v) {
    check_keys(v, "demand.od", {"min_separation_frac", "min_separation_m"});
    optional_field(v, "min_separation_frac",
                   [&](const json& x) { d.min_separation_frac = number(x, "demand.od.min_separation_frac"); });
    optional_field(v, "min_separation_m",
                   [&](const json& x) { d.min_separation_m = number(x, "demand.od.min_separation_m"); });
  });
  optional_field(j, "trips", [&](const json& v) {
    if (!v.is_array()) throw ConfigError("demand.trips: expected an array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string where = "demand.trips[" + std::to_string(i) + "]";
      check_keys(v[i], where, {"id", "origin", "destination", "departure"});
      ExplicitTrip t;
      t.id = v[i].contains("id") ? integer(v[i]["id"], where + ".id") : static_cast<VehicleId>(i);
      if (!v[i].contains("origin") || !v[i].contains("destination")) {
        throw ConfigError(where + ": origin and destination are required");
      }
      t.origin = integer(v[i]["origin"], where + ".origin");
      t.destination = integer(v[i]["destination"], where + ".destination");
      if (v[i].contains("departure")) t.departure = number(v[i]["departure"], where + ".departure");
      d.trips.push_back(t);
    }
  });
  return d;
}

ProtocolConfig parse_protocol(const json& j, std::size_t index) {
  const std::string where = "protocols[" + std::to_string(index) + "]";
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  ProtocolConfig p;
  const std::string type = j.contains("type") ? string(j["type"], where + ".type") : "beejama";
  if (type == "beejama") {
    check_keys(j, where,
               {"id", "share", "type", "variant", "layer_cell_sizes", "hop_limits", "overlap_m", "navigator_cell_m",
                "scout_period_s", "downstream_period_s", "sample_period_s", "static_scaling"});
    p.kind = ProtocolKind::kBeeJama;
    auto& b = p.beejama;
    optional_field(j, "variant", [&](const json& v) {
      try {
        b.variant = variant_from_string(string(v, where + ".variant"));
      } catch (const InvalidArgument& e) {
        throw ConfigError(where + ".variant: " + e.what());
      }
    });
    optional_field(j, "layer_cell_sizes",
                   [&](const json& v) { b.layer_cell_sizes = number_list(v, where + ".layer_cell_sizes"); });
    optional_field(j, "hop_limits", [&](const json& v) {
      if (!v.is_array()) throw ConfigError(where + ".hop_limits: expected an array");
      b.hop_limits.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        b.hop_limits.push_back(hop_limit(v[i], where + ".hop_limits[" + std::to_string(i) + "]"));
      }
    });
    optional_field(j, "overlap_m", [&](const json& v) { b.overlap = number(v, where + ".overlap_m"); });
    optional_field(j, "navigator_cell_m", [&](const json& v) { b.navigator_cell = number(v, where + ".navigator_cell_m"); });
    optional_field(j, "scout_period_s", [&](const json& v) { b.scout_period = number(v, where + ".scout_period_s"); });
    optional_field(j, "downstream_period_s",
                   [&](const json& v) { b.downstream_period = number(v, where + ".downstream_period_s"); });
    optional_field(j, "sample_period_s", [&](const json& v) { b.sample_period = number(v, where + ".sample_period_s"); });
    optional_field(j, "static_scaling", [&](const json& v) {
      const std::string s = string(v, where + ".static_scaling");
      if (s == "flow") b.static_scaling = StaticScaling::kFlow;
      else if (s == "time") b.static_scaling = StaticScaling::kTime;
      else throw ConfigError(where + ".static_scaling: expected \"flow\" or \"time\"");
    });
  } else if (type == "dynsp") {
    check_keys(j, where, {"id", "share", "type", "period_s", "snapshot_period_s", "mean_window_s"});
    p.kind = ProtocolKind::kDynSp;
    bool snapshot_given = false;
    optional_field(j, "period_s", [&](const json& v) { p.dynsp.period = number(v, where + ".period_s"); });
    optional_field(j, "snapshot_period_s", [&](const json& v) {
      p.dynsp.snapshot_period = number(v, where + ".snapshot_period_s");
      snapshot_given = true;
    });
    optional_field(j, "mean_window_s", [&](const json& v) { p.dynsp.mean_window = number(v, where + ".mean_window_s"); });
    if (!snapshot_given) p.dynsp.snapshot_period = p.dynsp.period;
  } else if (type == "dynressp") {
    check_keys(j, where, {"id", "share", "type", "period_s"});
    p.kind = ProtocolKind::kDynResSp;
    optional_field(j, "period_s", [&](const json& v) { p.dynressp.period = number(v, where + ".period_s"); });
  } else {
    throw ConfigError(where + ".type: unknown protocol type '" + type + "'");
  }
  if (!j.contains("id")) throw ConfigError(where + ": missing id");
  p.id = string(j["id"], where + ".id");
  optional_field(j, "share", [&](const json& v) { p.share = number(v, where + ".share"); });
  return p;
}

json parse_override_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return json(text);
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string path = assignment.substr(0, eq);
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("override '" + assignment + "' has an empty path segment");
    json* child = nullptr;
    if (node->is_array()) {
      std::size_t pos = 0;
      try {
        pos = std::stoul(key);
      } catch (const std::exception&) {
        throw ConfigError("override '" + assignment + "': '" + key + "' is not an array index");
      }
      if (pos >= node->size()) throw ConfigError("override '" + assignment + "': index out of range");
      child = &(*node)[pos];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) throw ConfigError("override '" + assignment + "': cannot descend into a scalar");
      child = &(*node)[key];
    }
    if (dot == std::string::npos) {
      *child = parse_override_value(assignment.substr(eq + 1));
      return;
    }
    node = child;
    start = dot + 1;
  }
}

}  // namespace

ScenarioConfig parse_scenario(std::istream& in, const std::vector<std::string>& overrides, bool use_env) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
    throw ParseError(e.what(), line);
  }
  for (const auto& o : overrides) apply_override(doc, o);

  check_keys(doc, "scenario",
             {"network", "demand", "protocols", "horizon_s", "slot_length_s", "mean_window_s", "reservation_flow",
              "outputs"});
  ScenarioConfig c;
  if (!doc.contains("network")) throw ConfigError("scenario: missing network");
  const json& jn = doc["network"];
  check_keys(jn, "network", {"file", "grid"});
  if (jn.contains("file") == jn.contains("grid")) throw ConfigError("network: give exactly one of file or grid");
  if (jn.contains("file")) c.network.file = string(jn["file"], "network.file");
  if (jn.contains("grid")) c.network.grid = parse_grid(jn["grid"], "network.grid");

  if (doc.contains("demand")) c.demand = parse_demand(doc["demand"]);
  if (!doc.contains("protocols") || !doc["protocols"].is_array()) throw ConfigError("scenario: protocols must be an array");
  for (std::size_t i = 0; i < doc["protocols"].size(); ++i) c.protocols.push_back(parse_protocol(doc["protocols"][i], i));

  optional_field(doc, "horizon_s", [&](const json& v) { c.horizon = number(v, "horizon_s"); });
  optional_field(doc, "slot_length_s", [&](const json& v) { c.slot_length = number(v, "slot_length_s"); });
  optional_field(doc, "mean_window_s", [&](const json& v) { c.mean_window = number(v, "mean_window_s"); });
  optional_field(doc, "reservation_flow", [&](const json& v) {
    const std::string s = string(v, "reservation_flow");
    if (s == "hourly") c.reservation_flow = ReservationFlow::kHourlyRate;
    else if (s == "count") c.reservation_flow = ReservationFlow::kSlotCount;
    else throw ConfigError("reservation_flow: expected \"hourly\" or \"count\"");
  });
  optional_field(doc, "outputs", [&](const json& v) { c.outputs = string(v, "outputs"); });

  if (use_env) {
    if (const char* seed = std::getenv("RESROUTE_SEED"); seed && *seed) {
      char* end = nullptr;
      const unsigned long long v = std::strtoull(seed, &end, 10);
      if (*end != '\0' || seed[0] == '-') throw ConfigError("RESROUTE_SEED is not a non-negative integer");
      c.demand.seed = v;
    }
  }
  validate_scenario(c);
  return c;
}

ScenarioConfig load_scenario(const std::string& path, const std::vector<std::string>& overrides, bool use_env) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  return parse_scenario(in, overrides, use_env);
}

void validate_scenario(const ScenarioConfig& c) {
  if (c.protocols.empty()) throw ConfigError("scenario: at least one protocol is required");
  std::set<std::string> ids;
  double total = 0.0;
  for (const auto& p : c.protocols) {
    if (p.id.empty()) throw ConfigError("protocol id must not be empty");
    if (!ids.insert(p.id).second) throw ConfigError("duplicate protocol id '" + p.id + "'");
    if (!(p.share >= 0.0 && p.share <= 1.0)) throw ConfigError("protocol '" + p.id + "': share outside [0, 1]");
    total += p.share;
    if (p.kind == ProtocolKind::kBeeJama) {
      const auto& b = p.beejama;
      if (b.layer_cell_sizes.size() != b.hop_limits.size() || b.layer_cell_sizes.empty()) {
        throw ConfigError("protocol '" + p.id + "': need one hop limit per layer");
      }
    }
    if (p.kind == ProtocolKind::kDynSp && (!(p.dynsp.period > 0.0) || !(p.dynsp.snapshot_period > 0.0))) {
      throw ConfigError("protocol '" + p.id + "': periods must be > 0");
    }
    if (p.kind == ProtocolKind::kDynResSp && !(p.dynressp.period > 0.0)) {
      throw ConfigError("protocol '" + p.id + "': period must be > 0");
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("protocol shares must sum to 1");
  if (!(c.horizon > 0.0)) throw ConfigError("horizon_s must be > 0");
  if (!(c.slot_length > 0.0)) throw ConfigError("slot_length_s must be > 0");
  if (!(c.mean_window > 0.0)) throw ConfigError("mean_window_s must be > 0");
  const auto& d = c.demand;
  if (d.trips.empty()) {
    if (d.blocks < 0 || d.per_block < 0) throw ConfigError("demand: negative departure counts");
    if (!(d.block_length >= 1.0)) throw ConfigError("demand.departures.block_s must be >= 1");
    if (!(d.min_separation_frac >= 0.0 && d.min_separation_frac <= 1.0)) {
      throw ConfigError("demand.od.min_separation_frac must be in [0, 1]");
    }
  }
}

RoadNetwork build_network(const ScenarioConfig& config, const std::string& base_dir) {
  try {
    if (config.network.grid) return generate_grid(*config.network.grid);
    std::filesystem::path p(*config.network.file);
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    return load_network_file(p.string());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("network: ") + e.what());
  }
}

}  // namespace resroute
