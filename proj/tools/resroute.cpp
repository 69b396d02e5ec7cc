// resroute: command-line front end for scenario runs, penetration sweeps and
// grid generation.
//
// Exit status: 0 success, 1 configuration error, 2 runtime error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "resroute/error.hpp"
#include "resroute/harness.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

std::vector<double> parse_fractions(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw resroute::ConfigError("bad fraction '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw resroute::ConfigError("--fractions is empty");
  return out;
}

std::string base_dir_of(const std::string& config_path) {
  return std::filesystem::path(config_path).parent_path().string();
}

void print_summary(const resroute::SummaryStats& summary) { resroute::write_summary_csv(summary, std::cout); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Queue-based traffic simulation with distributed and centralized route guidance"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;

  auto* run = app.add_subcommand("run", "Run one scenario and write CSV outputs");
  run->add_option("--config", config_path, "Scenario file")->required();
  run->add_option("--set", overrides, "Override a scenario field, key=value (dotted path)");

  std::string protocol;
  std::string fractions_text = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0";
  unsigned parallel = 1;
  auto* sweep = app.add_subcommand("sweep", "Penetration sweep of one protocol against DynSP background traffic");
  sweep->add_option("--config", config_path, "Scenario file")->required();
  sweep->add_option("--protocol", protocol, "Id of the protocol under test")->required();
  sweep->add_option("--fractions", fractions_text, "Comma-separated penetration fractions");
  sweep->add_option("--parallel", parallel, "Concurrent runs")->check(CLI::PositiveNumber);
  sweep->add_option("--set", overrides, "Override a scenario field, key=value (dotted path)");

  resroute::GridSpec grid;
  bool unidirectional = false;
  std::string out_path;
  auto* gen = app.add_subcommand("gen-grid", "Write a synthetic grid network file");
  gen->add_option("--rows", grid.rows, "Rows (>= 2)")->required();
  gen->add_option("--cols", grid.cols, "Columns (>= 2)")->required();
  gen->add_option("--edge-length", grid.edge_length, "Link length in meters");
  gen->add_option("--free-speed", grid.free_speed, "Free speed in m/s");
  gen->add_option("--capacity", grid.capacity, "Capacity per lane in veh/h");
  gen->add_option("--lanes", grid.lanes, "Lanes per link");
  gen->add_flag("--unidirectional", unidirectional, "One link per lattice edge, oriented east/south");
  gen->add_option("-o,--output", out_path, "Output file (stdout if omitted)");

  auto* validate = app.add_subcommand("validate", "Check a scenario file without running it");
  validate->add_option("--config", config_path, "Scenario file")->required();
  validate->add_option("--set", overrides, "Override a scenario field, key=value (dotted path)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  resroute::ScenarioConfig config;
  try {
    if (*gen) {
      grid.bidirectional = !unidirectional;
      const auto net = resroute::generate_grid(grid);
      if (out_path.empty()) {
        resroute::save_network(net, std::cout);
      } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw resroute::ConfigError("cannot write '" + out_path + "'");
        resroute::save_network(net, f);
      }
      return 0;
    }
    config = resroute::load_scenario(config_path, overrides);
    if (*validate) {
      const auto net = resroute::build_network(config, base_dir_of(config_path));
      const auto trips = resroute::generate_demand(config.demand, net);
      for (const auto& p : config.protocols) (void)resroute::make_protocol(p, config, net);
      std::cout << "ok: " << net.node_count() << " nodes, " << net.link_count() << " links, " << trips.size()
                << " vehicles, " << config.protocols.size() << " protocols\n";
      return 0;
    }
  } catch (const resroute::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const resroute::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const resroute::ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const resroute::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (*run) {
      const auto result = resroute::run_scenario(config, base_dir_of(config_path));
      print_summary(result.summary);
      if (result.summary.overall.stranded > 0) {
        std::cerr << "warning: " << result.summary.overall.stranded << " vehicles stranded at the horizon\n";
      }
    } else if (*sweep) {
      const auto fractions = parse_fractions(fractions_text);
      const auto rows = resroute::sweep_penetration(config, protocol, fractions, parallel, base_dir_of(config_path));
      resroute::write_sweep_csv(rows, std::cout);
    }
  } catch (const resroute::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
