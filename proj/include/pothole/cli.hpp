#pragma once

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pothole/maintenance.hpp"
#include "pothole/registry.hpp"
#include "pothole/routing.hpp"
#include "pothole/scenario.hpp"
#include "pothole/simulation.hpp"
#include "pothole/weighting.hpp"

namespace pothole::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kUnreachable = 2 };

struct SimulateOptions {
    std::string network;
    std::string scenario;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> threshold_mm;
    std::optional<double> cell_m;
};

/// Runs a scenario end to end and writes all outputs into `out_dir`.
inline World simulate(const SimulateOptions& opt)
{
    auto net = std::make_shared<const StreetNetwork>(load_network(opt.network));
    auto sc = load_scenario(opt.scenario);
    if (opt.seed) {
        sc.seed = *opt.seed;
    }
    if (opt.threshold_mm) {
        sc.threshold_mm = *opt.threshold_mm;
    }
    if (opt.cell_m) {
        sc.cell_m = *opt.cell_m;
    }
    World world(net, std::move(sc));
    world.run();
    world.write_outputs(opt.out_dir);
    return world;
}

inline PotholeRegistry load_registry(std::shared_ptr<const StreetNetwork> net, const std::optional<std::string>& path)
{
    if (!path) {
        return PotholeRegistry(std::move(net));
    }
    return PotholeRegistry::from_csv(std::move(net), detail::read_file(*path));
}

/// Entry point shared by the executable and the tests. `args[0]` is the
/// program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr)
{
    CLI::App app{"Pothole detection, avoidance and maintenance simulator"};
    app.require_subcommand(1);

    SimulateOptions sim;
    std::string network, registry_path, events_path, source, dest;
    std::optional<std::string> registry_opt;
    std::int64_t at = 0;

    auto* simulate_cmd = app.add_subcommand("simulate", "Run a scenario and write trace, routes, registry and reports");
    simulate_cmd->add_option("--network", sim.network, "Network JSON")->required();
    simulate_cmd->add_option("--scenario", sim.scenario, "Scenario JSON")->required();
    simulate_cmd->add_option("--out-dir", sim.out_dir, "Output directory")->required();
    simulate_cmd->add_option("--seed", sim.seed, "Override the scenario seed");
    simulate_cmd->add_option("--threshold-mm", sim.threshold_mm, "Detection depth threshold (mm)");
    simulate_cmd->add_option("--cell-m", sim.cell_m, "Scanner cell size (m)");

    auto* route_cmd = app.add_subcommand("route", "Print the minimum-damage route between two nodes");
    route_cmd->add_option("--network", network, "Network JSON")->required();
    route_cmd->add_option("--registry", registry_opt, "Registry CSV (default: no potholes)");
    route_cmd->add_option("--source", source, "Source node")->required();
    route_cmd->add_option("--dest", dest, "Destination node")->required();

    auto* report_cmd = app.add_subcommand("report", "Print the repair priority report");
    report_cmd->add_option("--registry", registry_path, "Registry CSV")->required();
    report_cmd->add_option("--events", events_path, "Update events CSV")->required();
    report_cmd->add_option("--at", at, "Evaluation instant (ms)")->required();

    auto* preprocess_cmd = app.add_subcommand("preprocess", "Weight every arc and print the weighted network CSV");
    preprocess_cmd->add_option("--network", network, "Network JSON")->required();
    preprocess_cmd->add_option("--registry", registry_opt, "Registry CSV (default: no potholes)");

    std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(rest.begin(), rest.end());
    try {
        app.parse(rest);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*simulate_cmd) {
            auto world = simulate(sim);
            out << "simulated " << world.scenario().duration_ms << " ms: " << world.server().registry().size()
                << " potholes, " << world.server().stats().accepted << " envelopes accepted\n";
        } else if (*route_cmd) {
            auto net = std::make_shared<const StreetNetwork>(load_network(network));
            auto registry = load_registry(net, registry_opt);
            auto wnet = preprocess(net, registry);
            out << format_route_trace(wnet, route(wnet, source, dest));
        } else if (*report_cmd) {
            auto records = PotholeRegistry::parse_records_csv(detail::read_file(registry_path));
            auto events = events_from_csv(detail::read_file(events_path));
            out << priority_report_to_csv(priority_report(records, events, at));
        } else if (*preprocess_cmd) {
            auto net = std::make_shared<const StreetNetwork>(load_network(network));
            auto registry = load_registry(net, registry_opt);
            out << preprocess(net, registry).to_csv();
        }
    } catch (const Unreachable& e) {
        err << "error: " << e.what() << "\n";
        return kUnreachable;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kOk;
}

} // namespace pothole::cli
