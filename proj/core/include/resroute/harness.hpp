#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "resroute/baseline.hpp"
#include "resroute/beejama.hpp"
#include "resroute/network.hpp"
#include "resroute/simulator.hpp"

namespace resroute {

// ---------------------------------------------------------------------------
// Scenario configuration

struct NetworkSource {
  std::optional<std::string> file;
  std::optional<GridSpec> grid;
};

struct ExplicitTrip {
  VehicleId id = 0;
  NodeId origin = 0;
  NodeId destination = 0;
  Seconds departure = 0.0;
};

struct DemandConfig {
  std::uint64_t seed = 1;
  // Departures: `blocks` consecutive windows of `block_length` seconds, each
  // with exactly `per_block` departures at uniform integer seconds.
  int blocks = 1;
  std::int64_t per_block = 0;
  Seconds block_length = 3600.0;
  // Origin/destination pairs are uniform over node pairs at least this far
  // apart. The fraction applies to the network diameter unless an absolute
  // distance is given.
  double min_separation_frac = 0.25;
  std::optional<double> min_separation_m;
  // When non-empty, replaces the generated demand.
  std::vector<ExplicitTrip> trips;
};

enum class ProtocolKind { kBeeJama, kDynSp, kDynResSp };

struct ProtocolConfig {
  std::string id;
  double share = 1.0;
  ProtocolKind kind = ProtocolKind::kDynSp;
  BeeJamaConfig beejama;
  DynSpConfig dynsp;
  DynResSpConfig dynressp;
};

struct ScenarioConfig {
  NetworkSource network;
  DemandConfig demand;
  std::vector<ProtocolConfig> protocols;
  Seconds horizon = 86400.0;
  Seconds slot_length = 60.0;
  Seconds mean_window = 60.0;
  ReservationFlow reservation_flow = ReservationFlow::kSlotCount;
  std::string outputs;  // directory; empty disables file output
};

// Parses a scenario document. `overrides` are dotted-path assignments
// ("demand.seed=7"); values are read as JSON, falling back to a string.
// RESROUTE_SEED in the environment overrides demand.seed when `use_env`.
// Throws ConfigError (ParseError for malformed documents).
ScenarioConfig parse_scenario(std::istream& in, const std::vector<std::string>& overrides = {},
                              bool use_env = true);
ScenarioConfig load_scenario(const std::string& path, const std::vector<std::string>& overrides = {},
                             bool use_env = true);

// Checks shares, ids and protocol parameters. Throws ConfigError.
void validate_scenario(const ScenarioConfig& config);

RoadNetwork build_network(const ScenarioConfig& config, const std::string& base_dir = {});

// ---------------------------------------------------------------------------
// Demand and protocol mix

// Deterministic in the seed. Ids are 0..n-1 in generation order; the
// protocol field is left at 0. Throws ConfigError when no node pair meets
// the separation constraint.
std::vector<Trip> generate_demand(const DemandConfig& demand, const RoadNetwork& net);

// Exact per-protocol counts by largest-remainder rounding of share * n
// (ties to the earlier protocol), spread over a seeded permutation of the
// trips so assignment does not follow departure order. Protocols listed
// first take the first positions of the permutation, so lowering a leading
// share only removes vehicles from it.
std::vector<ProtocolIndex> assign_protocols(std::size_t trip_count, const std::vector<double>& shares,
                                            std::uint64_t seed);
std::vector<std::size_t> largest_remainder_counts(std::size_t n, const std::vector<double>& shares);

std::unique_ptr<GuidanceProtocol> make_protocol(const ProtocolConfig& config, const ScenarioConfig& scenario,
                                                const RoadNetwork& net);

// ---------------------------------------------------------------------------
// Statistics

struct TravelTimeStats {
  double mean_min = 0.0;
  double median_min = 0.0;
  double q1_min = 0.0;
  double q3_min = 0.0;
  double max_min = 0.0;
  std::uint64_t arrived = 0;
  std::uint64_t stranded = 0;
};

// Linear-interpolation quantile of sorted data (q in [0, 1]).
double quantile_sorted(const std::vector<double>& sorted, double q);
TravelTimeStats travel_time_stats(std::vector<double> travel_times_s, std::uint64_t stranded);

struct ProtocolSummary {
  std::string id;
  double share = 0.0;
  TravelTimeStats stats;
};

struct SummaryStats {
  std::vector<ProtocolSummary> protocols;
  TravelTimeStats overall;

  const ProtocolSummary* find(const std::string& id) const;
};

SummaryStats summarize(const MetricsLog& log, const std::vector<double>& shares);
void write_summary_csv(const SummaryStats& summary, std::ostream& out);

// ---------------------------------------------------------------------------
// Runs

struct RunResult {
  MetricsLog metrics;
  SummaryStats summary;
};

// Builds network, demand, protocols and engine, runs to completion and, if
// config.outputs is set, writes vehicles.csv, arrivals.csv, links.csv and
// summary.csv there.
RunResult run_scenario(const ScenarioConfig& config, const std::string& base_dir = {});
RunResult run_scenario(const ScenarioConfig& config, const RoadNetwork& net);

struct SweepRow {
  double penetration = 0.0;
  SummaryStats summary;
  std::optional<double> protocol_mean_min;
  std::optional<double> background_mean_min;
  double overall_mean_min = 0.0;
};

// One run per fraction with the protocol under test at that share and the
// scenario's DynSP protocol (DynSP 30 min if none is configured) taking the
// rest. Demand is identical across runs. Runs may execute on `parallel`
// threads; rows come back in input order.
std::vector<SweepRow> sweep_penetration(const ScenarioConfig& base, const std::string& protocol_id,
                                        const std::vector<double>& fractions, unsigned parallel = 1,
                                        const std::string& base_dir = {});
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

// Scenario for a given penetration, as used by sweep_penetration.
ScenarioConfig penetration_scenario(const ScenarioConfig& base, const std::string& protocol_id, double fraction);

}  // namespace resroute
