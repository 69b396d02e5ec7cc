// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed
// here, not configurable.
//
//   resroute_acceptance            run everything
//   resroute_acceptance --only E3  run one criterion (repeatable)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "resroute/baseline.hpp"
#include "resroute/beejama.hpp"
#include "resroute/harness.hpp"
#include "resroute/network.hpp"
#include "resroute/predictor.hpp"
#include "resroute/reservation.hpp"
#include "resroute/simulator.hpp"

#ifndef RESROUTE_CONFIG_DIR
#error "RESROUTE_CONFIG_DIR must point at the configs directory"
#endif

using namespace resroute;

namespace {

// Pinned tolerances and limits.
constexpr double kE1StepTolerance = 1.0;
constexpr double kE1RuntimeS = 5.0;
constexpr double kE2CongestionFactor = 1.5;
constexpr double kE2ImprovementFactor = 0.8;
constexpr double kE2RuntimeS = 300.0;
constexpr double kE4LowPenetrationSlack = 0.15;
constexpr double kSweepRuntimeS = 1800.0;
constexpr double kP1RelTol = 1e-9;
constexpr double kP2RelTol = 1e-12;
constexpr int kP2Windows = 1000;
constexpr int kP3Graphs = 100;
constexpr int kP3MaxNodes = 50;
constexpr int kP4Histories = 1000;

const std::vector<std::uint64_t> kSeeds{1, 2, 3};
const std::vector<double> kSweep{0.1, 0.3, 0.5, 0.7, 0.9, 1.0};

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string config_path(const std::string& name) { return std::string(RESROUTE_CONFIG_DIR) + "/" + name; }

ScenarioConfig load(const std::string& name, std::vector<std::string> overrides = {}) {
  overrides.push_back("outputs=");
  return load_scenario(config_path(name), overrides, false);
}

bool rel_close(double got, double want, double tol) {
  return std::abs(got - want) <= tol * std::max(std::abs(want), std::numeric_limits<double>::min());
}

unsigned workers() { return std::max(1U, std::thread::hardware_concurrency()); }

// ---------------------------------------------------------------------------

void e1(Outcome& out) {
  const auto start = Clock::now();
  Link l;
  l.id = 0;
  l.from = 0;
  l.to = 1;
  l.length = 500;
  l.free_speed = 10;
  l.capacity = l.capacity_hat = 600;
  const RoadNetwork net({{0, 0, 0}, {1, 500, 0}}, {l});
  for (int f : {1, 50, 600, 601, 1200}) {
    std::vector<Trip> trips;
    for (int i = 0; i < f; ++i) trips.push_back({i, 0, 1, 0.0, 0});
    std::vector<std::unique_ptr<GuidanceProtocol>> p;
    p.push_back(std::make_unique<DynSp>(net, DynSpConfig{}));
    Engine engine(net, std::move(p), trips);
    const MetricsLog log = engine.run();
    double last = 0.0;
    for (const auto& v : log.vehicles) last = std::max(last, v.travel_time().value_or(1e18));
    const double want = queue_travel_time(50, f, 600);
    out.detail << " f=" << f << ":" << last << "/" << want;
    out.require(std::abs(last - want) <= kE1StepTolerance, "f=" + std::to_string(f));
  }
  const double rt = seconds_since(start);
  out.detail << " runtime=" << rt << "s";
  out.require(rt < kE1RuntimeS, "runtime");
}

double free_flow_mean_min(const ScenarioConfig& c, const RoadNetwork& net) {
  std::vector<Seconds> t0;
  for (LinkIndex l = 0; l < net.link_count(); ++l) t0.push_back(net.t0(l));
  const auto arcs = oracle::arcs_of(net, t0);
  std::map<NodeIndex, std::vector<double>> from;
  double sum = 0.0;
  const auto trips = generate_demand(c.demand, net);
  for (const Trip& t : trips) {
    auto it = from.find(t.origin);
    if (it == from.end()) {
      it = from.emplace(t.origin, oracle::dijkstra(static_cast<int>(net.node_count()), arcs,
                                                   static_cast<int>(t.origin)))
               .first;
    }
    sum += it->second[t.destination];
  }
  return sum / static_cast<double>(trips.size()) / 60.0;
}

void e2(Outcome& out) {
  const auto start = Clock::now();
  const ScenarioConfig dyn = load("grid_dynsp_vs_dynressp.json");
  const ScenarioConfig res =
      load("grid_dynsp_vs_dynressp.json", {"protocols.0.type=dynressp", "protocols.0.id=dynressp10"});
  const RoadNetwork net = build_network(dyn);
  const double ff = free_flow_mean_min(dyn, net);
  const TravelTimeStats a = run_scenario(dyn, net).summary.overall;
  const TravelTimeStats b = run_scenario(res, net).summary.overall;
  out.detail << std::fixed << std::setprecision(2) << " free_flow=" << ff << " dynsp10 mean/q1/med/q3=" << a.mean_min
             << "/" << a.q1_min << "/" << a.median_min << "/" << a.q3_min << " dynressp10=" << b.mean_min << "/"
             << b.q1_min << "/" << b.median_min << "/" << b.q3_min << " stranded=" << a.stranded << "/"
             << b.stranded;
  out.require(a.mean_min >= kE2CongestionFactor * ff, "dynsp congestion");
  out.require(b.mean_min <= kE2ImprovementFactor * a.mean_min, "mean ratio");
  out.require(b.q1_min < a.q1_min, "q1");
  out.require(b.median_min < a.median_min, "median");
  out.require(b.q3_min < a.q3_min, "q3");
  const double rt = seconds_since(start);
  out.detail << " runtime=" << rt << "s";
  out.require(rt < kE2RuntimeS, "runtime");
}

// 3-seed mean of the overall travel time for each penetration.
std::vector<double> sweep_means(const std::string& protocol, const std::vector<double>& fractions) {
  std::vector<double> sum(fractions.size(), 0.0);
  for (std::uint64_t seed : kSeeds) {
    const ScenarioConfig c = load("grid_beejama_sweep.json", {"demand.seed=" + std::to_string(seed)});
    const auto rows = sweep_penetration(c, protocol, fractions, workers());
    for (std::size_t i = 0; i < rows.size(); ++i) sum[i] += rows[i].overall_mean_min;
  }
  for (double& s : sum) s /= static_cast<double>(kSeeds.size());
  return sum;
}

void print_pairs(Outcome& out, const std::vector<double>& fr, const std::vector<double>& a,
                 const std::vector<double>& b, const char* na, const char* nb) {
  out.detail << std::fixed << std::setprecision(2);
  for (std::size_t i = 0; i < fr.size(); ++i) {
    out.detail << " " << static_cast<int>(std::lround(fr[i] * 100)) << "%:" << na << "=" << a[i] << "," << nb << "="
               << b[i];
  }
}

void e3(Outcome& out) {
  const auto start = Clock::now();
  const auto plain = sweep_means("plain", kSweep);
  const auto n = sweep_means("resN", kSweep);
  print_pairs(out, kSweep, n, plain, "N", "plain");
  for (std::size_t i = 0; i < kSweep.size(); ++i) {
    const std::string at = std::to_string(static_cast<int>(std::lround(kSweep[i] * 100))) + "%";
    if (kSweep[i] < 1.0) {
      out.require(n[i] > plain[i], "N > plain at " + at);
    } else {
      out.require(n[i] < plain[i], "N < plain at " + at);
    }
  }
  const double rt = seconds_since(start);
  out.detail << " runtime=" << rt << "s";
  out.require(rt < kSweepRuntimeS, "runtime");
}

void e4(Outcome& out) {
  const auto start = Clock::now();
  const auto plain = sweep_means("plain", kSweep);
  const auto dh = sweep_means("resDH", kSweep);
  print_pairs(out, kSweep, dh, plain, "DH", "plain");
  for (std::size_t i = 0; i < kSweep.size(); ++i) {
    const std::string at = std::to_string(static_cast<int>(std::lround(kSweep[i] * 100))) + "%";
    if (kSweep[i] >= 0.5) {
      out.require(dh[i] < plain[i], "DH < plain at " + at);
    } else if (kSweep[i] <= 0.3) {
      out.require(dh[i] <= (1.0 + kE4LowPenetrationSlack) * plain[i], "DH within +15% at " + at);
    }
  }
  const double rt = seconds_since(start);
  out.detail << " runtime=" << rt << "s";
  out.require(rt < kSweepRuntimeS, "runtime");
}

void e5(Outcome& out) {
  const std::vector<double> half{0.5};
  const double plain = sweep_means("plain", half)[0];
  const double n = sweep_means("resN", half)[0];
  const double s = sweep_means("resS", half)[0];
  const double dh = sweep_means("resDH", half)[0];
  out.detail << std::fixed << std::setprecision(2) << " DH=" << dh << " plain=" << plain << " S=" << s
             << " N=" << n;
  out.require(dh <= plain, "DH <= plain");
  out.require(plain < s, "plain < S");
  out.require(plain < n, "plain < N");
}

// ---------------------------------------------------------------------------

void p1(Outcome& out) {
  const BprParams def;
  struct Case {
    const char* name;
    double got;
    double want;
  };
  const std::vector<Case> cases{
      {"bpr(100,0,1000)", bpr_travel_time(100, 0, 1000, def), 100},
      {"bpr(100,1000,1000)", bpr_travel_time(100, 1000, 1000, def), 115},
      {"bpr(100,2000,1000)", bpr_travel_time(100, 2000, 1000, def), 340},
      {"queue(50,1,600)", queue_travel_time(50, 1, 600), 50},
      {"queue(50,600,600)", queue_travel_time(50, 600, 600), 3644},
      {"queue(50,601,600)", queue_travel_time(50, 601, 600), 3650},
  };
  for (const Case& c : cases) {
    out.detail << " " << c.name << "=" << c.got;
    out.require(rel_close(c.got, c.want, kP1RelTol), c.name);
  }
}

void p2(Outcome& out) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 40.0);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  int mismatches = 0;
  int affine_failures = 0;
  double worst = 0.0;
  for (int k = 0; k < kP2Windows; ++k) {
    const int n = 2 + static_cast<int>(rng() % 59);  // up to the 60-sample window
    const double trend = noise(rng) / 40.0;
    ErrorWindow w;
    std::vector<double> x, y;
    for (int i = 1; i <= n; ++i) {
      const double t_lpf = 60.0 + std::abs(noise(rng));
      const double e = trend * i + noise(rng);
      w.record(t_lpf + e, t_lpf);
      x.push_back(i);
      y.push_back((t_lpf + e) - t_lpf);
    }
    const double want = oracle::pearson(x, y);
    for (double got : {w.pearson_r(), pearson_r(x, y)}) {
      const double rel = std::abs(got - want) / std::max(std::abs(want), std::numeric_limits<double>::min());
      worst = std::max(worst, rel);
      if (!rel_close(got, want, kP2RelTol)) ++mismatches;
    }
    const double a = scale(rng), b = noise(rng);
    std::vector<double> pos, neg;
    for (double v : y) {
      pos.push_back(a * v + b);
      neg.push_back(-a * v + b);
    }
    const double r = pearson_r(x, y);
    if (!rel_close(pearson_r(x, pos), r, kP2RelTol) || !rel_close(pearson_r(x, neg), -r, kP2RelTol)) {
      ++affine_failures;
    }
  }
  out.detail << " windows=" << kP2Windows << " mismatches=" << mismatches << " affine_failures=" << affine_failures
             << " worst_rel=" << std::scientific << worst;
  out.require(mismatches == 0, "oracle agreement");
  out.require(affine_failures == 0, "affine invariance");
}

void p3(Outcome& out) {
  std::mt19937_64 rng(77);
  int mismatches = 0;
  std::size_t checked = 0;
  for (int g = 0; g < kP3Graphs; ++g) {
    const int n = 2 + static_cast<int>(rng() % (kP3MaxNodes - 1));
    const RoadNetwork net = oracle::random_network(rng, n, n + static_cast<int>(rng() % (2 * n)), g % 5 != 0);
    // Every node is its own finest-layer representative; the hop limit n
    // is at least the hop diameter.
    const std::vector<double> sizes{1e-3, 1e9};
    const std::vector<int> hops{n, kInfiniteHops};
    const Hierarchy h = build_hierarchy(net, sizes, hops, 0.0);
    RoutingTables tables(h, net.node_count());
    std::vector<Seconds> cost;
    for (LinkIndex l = 0; l < net.link_count(); ++l) cost.push_back(net.t0(l));
    flood_upstream(h, net, cost, 0, tables);
    const auto arcs = oracle::arcs_of(net, cost);
    for (NodeIndex d = 0; d < net.node_count(); ++d) {
      const auto dist = oracle::dijkstra_to(n, arcs, static_cast<int>(d));
      const ClusterId c = h.layers[0].represented_by[d];
      for (NodeIndex v = 0; v < net.node_count(); ++v) {
        const RouteEntry& e = tables.entry(0, c, v);
        ++checked;
        const bool ok = dist[v] == oracle::kInf ? !e.valid() : (e.valid() && e.cost == dist[v]);
        if (!ok) ++mismatches;
      }
    }
  }
  out.detail << " graphs=" << kP3Graphs << " entries=" << checked << " mismatches=" << mismatches;
  out.require(mismatches == 0, "exact Dijkstra costs");
}

void p4(Outcome& out) {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> start(0.0, 5000.0);
  std::uniform_real_distribution<double> len(0.5, 600.0);
  int mismatches = 0;
  std::uint64_t clamps = 0;
  int not_empty_after_unwind = 0;
  for (int h = 0; h < kP4Histories; ++h) {
    ReservationLog log(60);
    std::vector<oracle::Interval> live;
    const int ops = 1 + static_cast<int>(rng() % 200);
    for (int op = 0; op < ops; ++op) {
      if (!live.empty() && rng() % 3 == 0) {
        const std::size_t k = rng() % live.size();
        log.remove(live[k].enter, live[k].exit);
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(k));
      } else {
        const double a = start(rng);
        live.push_back({a, a + len(rng)});
        log.add(live.back().enter, live.back().exit);
      }
    }
    for (std::int64_t k = 0; k <= 5600 / 60 + 1; ++k) {
      if (log.count(k) != oracle::intersecting(live, 60, k)) ++mismatches;
    }
    for (const auto& iv : live) log.remove(iv.enter, iv.exit);
    for (std::int64_t k = 0; k <= 5600 / 60 + 1; ++k) {
      if (log.count(k) != 0) {
        ++not_empty_after_unwind;
        break;
      }
    }
    clamps += log.clamps();
  }
  out.detail << " histories=" << kP4Histories << " mismatches=" << mismatches << " clamps=" << clamps
             << " residue=" << not_empty_after_unwind;
  out.require(mismatches == 0, "oracle counts");
  out.require(clamps == 0, "clamp counter");
  out.require(not_empty_after_unwind == 0, "round trip to empty");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void p5(Outcome& out) {
  const auto root = std::filesystem::temp_directory_path() / "resroute_acceptance_p5";
  std::filesystem::remove_all(root);
  for (const char* run : {"a", "b"}) {
    ScenarioConfig c = load("grid_dynsp_vs_dynressp.json");
    c.outputs = (root / run).string();
    run_scenario(c);
  }
  for (const char* f : {"vehicles.csv", "arrivals.csv", "links.csv", "summary.csv"}) {
    const std::string a = slurp(root / "a" / f);
    const std::string b = slurp(root / "b" / f);
    out.detail << " " << f << "=" << a.size() << "B";
    out.require(!a.empty() && a == b, std::string(f) + " identical");
  }
  std::filesystem::remove_all(root);
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"E1", e1}, {"E2", e2}, {"E3", e3}, {"E4", e4}, {"E5", e5},
      {"P1", p1}, {"P2", p2}, {"P3", p3}, {"P4", p4}, {"P5", p5},
  };

  CLI::App app{"resroute acceptance suite"};
  std::vector<std::string> only;
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  bool all_pass = true;
  int ran = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    ++ran;
    Outcome out;
    try {
      fn(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << " [exception: " << e.what() << "]";
    }
    std::cout << (out.pass ? "PASS " : "FAIL ") << name << ":" << out.detail.str() << std::endl;
    all_pass = all_pass && out.pass;
  }
  if (ran == 0) {
    std::cerr << "no matching criteria\n";
    return 2;
  }
  return all_pass ? 0 : 1;
}
