#include "resroute/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "resroute/error.hpp"

namespace resroute {

namespace {

// Unbiased integer in [0, bound) from a 64-bit engine; std distributions are
// implementation-defined, this is not.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

constexpr std::uint64_t kAssignSalt = 0x9e3779b97f4a7c15ULL;

std::string fixed(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(4);
  s << v;
  return s.str();
}

}  // namespace

std::vector<Trip> generate_demand(const DemandConfig& demand, const RoadNetwork& net) {
  std::vector<Trip> trips;
  if (!demand.trips.empty()) {
    trips.reserve(demand.trips.size());
    for (const auto& t : demand.trips) {
      auto o = net.find_node(t.origin);
      auto d = net.find_node(t.destination);
      if (!o || !d) throw ConfigError("trip " + std::to_string(t.id) + " references an unknown node");
      if (!(t.departure >= 0.0)) throw ConfigError("trip " + std::to_string(t.id) + " departs before 0");
      trips.push_back(Trip{t.id, *o, *d, t.departure, 0});
    }
    return trips;
  }

  const auto total = static_cast<std::uint64_t>(demand.blocks) * static_cast<std::uint64_t>(demand.per_block);
  if (total == 0) return trips;
  if (net.node_count() < 2) throw ConfigError("demand needs at least two nodes");

  const double min_sep = demand.min_separation_m ? *demand.min_separation_m : demand.min_separation_frac * net.diameter();
  bool feasible = false;
  for (NodeIndex a = 0; a < net.node_count() && !feasible; ++a) {
    for (NodeIndex b = 0; b < net.node_count(); ++b) {
      if (a != b && net.distance(a, b) >= min_sep) {
        feasible = true;
        break;
      }
    }
  }
  if (!feasible) throw ConfigError("no node pair satisfies the minimum OD separation");

  std::mt19937_64 rng(demand.seed);
  const auto block_len = static_cast<std::uint64_t>(std::floor(demand.block_length));
  trips.reserve(total);
  VehicleId next_id = 0;
  for (int b = 0; b < demand.blocks; ++b) {
    for (std::int64_t i = 0; i < demand.per_block; ++i) {
      const double departure =
          static_cast<double>(b) * demand.block_length + static_cast<double>(uniform_below(rng, block_len));
      NodeIndex o = 0;
      NodeIndex d = 0;
      do {
        o = static_cast<NodeIndex>(uniform_below(rng, net.node_count()));
        d = static_cast<NodeIndex>(uniform_below(rng, net.node_count()));
      } while (o == d || net.distance(o, d) < min_sep);
      trips.push_back(Trip{next_id++, o, d, departure, 0});
    }
  }
  return trips;
}

std::vector<std::size_t> largest_remainder_counts(std::size_t n, const std::vector<double>& shares) {
  std::vector<std::size_t> counts(shares.size(), 0);
  std::vector<double> remainder(shares.size(), 0.0);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    const double exact = shares[i] * static_cast<double>(n);
    // Guard against 0.7 * 10 = 7.000000000000001 style representation noise.
    const double rounded = std::round(exact);
    const double base = std::abs(exact - rounded) < 1e-9 ? rounded : std::floor(exact);
    counts[i] = static_cast<std::size_t>(base);
    remainder[i] = exact - base;
    assigned += counts[i];
  }
  std::vector<std::size_t> order(shares.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < n && !order.empty(); k = (k + 1) % order.size()) {
    ++counts[order[k]];
    ++assigned;
  }
  return counts;
}

std::vector<ProtocolIndex> assign_protocols(std::size_t trip_count, const std::vector<double>& shares,
                                            std::uint64_t seed) {
  const auto counts = largest_remainder_counts(trip_count, shares);
  std::vector<std::size_t> perm(trip_count);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed ^ kAssignSalt);
  for (std::size_t i = trip_count; i > 1; --i) {
    std::swap(perm[i - 1], perm[uniform_below(rng, i)]);
  }
  std::vector<ProtocolIndex> out(trip_count, 0);
  std::size_t pos = 0;
  for (ProtocolIndex p = 0; p < counts.size(); ++p) {
    for (std::size_t k = 0; k < counts[p]; ++k) out[perm[pos++]] = p;
  }
  return out;
}

std::unique_ptr<GuidanceProtocol> make_protocol(const ProtocolConfig& config, const ScenarioConfig& scenario,
                                                const RoadNetwork& net) {
  try {
    switch (config.kind) {
      case ProtocolKind::kBeeJama: {
        BeeJamaConfig b = config.beejama;
        b.name = config.id;
        b.slot_length = scenario.slot_length;
        b.mean_window = scenario.mean_window;
        b.flow = scenario.reservation_flow;
        b.penetration = config.share > 0.0 ? config.share : 1.0;
        return std::make_unique<BeeJama>(net, b);
      }
      case ProtocolKind::kDynSp: {
        DynSpConfig d = config.dynsp;
        d.name = config.id;
        d.mean_window = std::max(d.mean_window, 1.0);
        return std::make_unique<DynSp>(net, d);
      }
      case ProtocolKind::kDynResSp: {
        DynResSpConfig d = config.dynressp;
        d.name = config.id;
        d.slot_length = scenario.slot_length;
        d.flow = scenario.reservation_flow;
        return std::make_unique<DynResSp>(net, d);
      }
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError("protocol '" + config.id + "': " + e.what());
  }
  throw ConfigError("protocol '" + config.id + "': unknown kind");
}

// ---------------------------------------------------------------------------

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::nan("");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

TravelTimeStats travel_time_stats(std::vector<double> tt, std::uint64_t stranded) {
  TravelTimeStats s;
  s.arrived = tt.size();
  s.stranded = stranded;
  if (tt.empty()) {
    s.mean_min = s.median_min = s.q1_min = s.q3_min = s.max_min = std::nan("");
    return s;
  }
  for (double& t : tt) t /= 60.0;
  std::sort(tt.begin(), tt.end());
  s.mean_min = std::accumulate(tt.begin(), tt.end(), 0.0) / static_cast<double>(tt.size());
  s.median_min = quantile_sorted(tt, 0.5);
  s.q1_min = quantile_sorted(tt, 0.25);
  s.q3_min = quantile_sorted(tt, 0.75);
  s.max_min = tt.back();
  return s;
}

const ProtocolSummary* SummaryStats::find(const std::string& id) const {
  for (const auto& p : protocols) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

SummaryStats summarize(const MetricsLog& log, const std::vector<double>& shares) {
  std::vector<std::vector<double>> per(log.protocols.size());
  std::vector<std::uint64_t> stranded(log.protocols.size(), 0);
  std::vector<double> all;
  std::uint64_t all_stranded = 0;
  for (const auto& v : log.vehicles) {
    if (auto tt = v.travel_time()) {
      per[v.protocol].push_back(*tt);
      all.push_back(*tt);
    } else {
      ++stranded[v.protocol];
      ++all_stranded;
    }
  }
  SummaryStats s;
  for (std::size_t p = 0; p < log.protocols.size(); ++p) {
    s.protocols.push_back(ProtocolSummary{log.protocols[p], p < shares.size() ? shares[p] : 0.0,
                                          travel_time_stats(std::move(per[p]), stranded[p])});
  }
  s.overall = travel_time_stats(std::move(all), all_stranded);
  return s;
}

void write_summary_csv(const SummaryStats& summary, std::ostream& out) {
  out << "penetration,protocol,mean_tt_min,median_tt_min,q1_min,q3_min,max_min,arrived,stranded\n";
  auto row = [&](double share, const std::string& id, const TravelTimeStats& t) {
    out << fixed(share) << ',' << id << ',' << fixed(t.mean_min) << ',' << fixed(t.median_min) << ','
        << fixed(t.q1_min) << ',' << fixed(t.q3_min) << ',' << fixed(t.max_min) << ',' << t.arrived << ','
        << t.stranded << '\n';
  };
  for (const auto& p : summary.protocols) row(p.share, p.id, p.stats);
  row(1.0, "all", summary.overall);
}

// ---------------------------------------------------------------------------

RunResult run_scenario(const ScenarioConfig& config, const RoadNetwork& net) {
  validate_scenario(config);
  std::vector<Trip> trips = generate_demand(config.demand, net);
  std::vector<double> shares;
  for (const auto& p : config.protocols) shares.push_back(p.share);
  const auto assignment = assign_protocols(trips.size(), shares, config.demand.seed);
  for (std::size_t i = 0; i < trips.size(); ++i) trips[i].protocol = assignment[i];

  std::vector<std::unique_ptr<GuidanceProtocol>> protocols;
  EngineOptions options;
  options.horizon = config.horizon;
  options.mean_window = config.mean_window;
  options.sample_retention = config.mean_window;
  for (const auto& p : config.protocols) {
    protocols.push_back(make_protocol(p, config, net));
    if (p.kind == ProtocolKind::kDynSp) {
      options.sample_retention = std::max(options.sample_retention, p.dynsp.mean_window);
    }
  }

  Engine engine(net, std::move(protocols), std::move(trips), options);
  RunResult result;
  result.metrics = engine.run();
  result.summary = summarize(result.metrics, shares);

  if (!config.outputs.empty()) {
    namespace fs = std::filesystem;
    const fs::path dir(config.outputs);
    fs::create_directories(dir);
    auto open = [&](const char* name) {
      std::ofstream f(dir / name, std::ios::binary);
      if (!f) throw Error("cannot write " + (dir / name).string());
      return f;
    };
    {
      auto f = open("vehicles.csv");
      result.metrics.write_vehicles_csv(f);
    }
    {
      auto f = open("arrivals.csv");
      result.metrics.write_arrivals_csv(f);
    }
    {
      auto f = open("links.csv");
      result.metrics.write_links_csv(net, f);
    }
    {
      auto f = open("summary.csv");
      write_summary_csv(result.summary, f);
    }
  }
  return result;
}

RunResult run_scenario(const ScenarioConfig& config, const std::string& base_dir) {
  const RoadNetwork net = build_network(config, base_dir);
  return run_scenario(config, net);
}

ScenarioConfig penetration_scenario(const ScenarioConfig& base, const std::string& protocol_id, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("penetration fractions must lie in [0, 1]");
  const ProtocolConfig* test = nullptr;
  const ProtocolConfig* background = nullptr;
  for (const auto& p : base.protocols) {
    if (p.id == protocol_id) test = &p;
    else if (p.kind == ProtocolKind::kDynSp && !background) background = &p;
  }
  if (!test) throw ConfigError("sweep: no protocol with id '" + protocol_id + "'");

  ProtocolConfig bg;
  if (background) {
    bg = *background;
  } else {
    bg.id = "dynsp30";
    bg.kind = ProtocolKind::kDynSp;
    bg.dynsp.period = 1800.0;
    bg.dynsp.snapshot_period = 1800.0;
  }

  ScenarioConfig s = base;
  s.protocols.clear();
  if (fraction > 0.0) {
    ProtocolConfig t = *test;
    t.share = fraction;
    s.protocols.push_back(t);
  }
  if (fraction < 1.0) {
    bg.share = 1.0 - fraction;
    s.protocols.push_back(bg);
  }
  return s;
}

std::vector<SweepRow> sweep_penetration(const ScenarioConfig& base, const std::string& protocol_id,
                                        const std::vector<double>& fractions, unsigned parallel,
                                        const std::string& base_dir) {
  const RoadNetwork net = build_network(base, base_dir);
  std::vector<ScenarioConfig> configs;
  for (double f : fractions) {
    ScenarioConfig s = penetration_scenario(base, protocol_id, f);
    if (!base.outputs.empty()) {
      std::ostringstream name;
      name << protocol_id << "_p" << fixed(f);
      s.outputs = (std::filesystem::path(base.outputs) / name.str()).string();
    }
    configs.push_back(std::move(s));
  }

  std::vector<SweepRow> rows(fractions.size());
  auto run_one = [&](std::size_t i) {
    const RunResult r = run_scenario(configs[i], net);
    SweepRow& row = rows[i];
    row.penetration = fractions[i];
    row.summary = r.summary;
    row.overall_mean_min = r.summary.overall.mean_min;
    for (const auto& p : r.summary.protocols) {
      if (p.id == protocol_id) row.protocol_mean_min = p.stats.mean_min;
      else row.background_mean_min = p.stats.mean_min;
    }
  };

  const unsigned workers = std::max(1U, std::min<unsigned>(parallel, static_cast<unsigned>(fractions.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < fractions.size(); ++i) run_one(i);
  } else {
    std::vector<std::exception_ptr> errors(fractions.size());
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < fractions.size(); i = next++) {
          try {
            run_one(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  if (!base.outputs.empty()) {
    std::filesystem::create_directories(base.outputs);
    std::ofstream f(std::filesystem::path(base.outputs) / ("sweep_" + protocol_id + ".csv"), std::ios::binary);
    write_sweep_csv(rows, f);
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "penetration,protocol_mean_min,background_mean_min,overall_mean_min\n";
  for (const auto& r : rows) {
    out << fixed(r.penetration) << ',' << (r.protocol_mean_min ? fixed(*r.protocol_mean_min) : "") << ','
        << (r.background_mean_min ? fixed(*r.background_mean_min) : "") << ',' << fixed(r.overall_mean_min) << '\n';
  }
}

}  // namespace resroute
