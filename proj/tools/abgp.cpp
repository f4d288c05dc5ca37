#include "abgp/errors.hpp"
#include "abgp/node/client.hpp"
#include "abgp/node/server.hpp"
#include "abgp/sim.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw abgp::Error(abgp::Errc::ConfigError, "cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

int run_node(const std::string& config_path) {
    auto config = abgp::node::load_config(config_path);
    abgp::node::NodeServer server(std::move(config));
    server.start();
    std::cout << "abgp node listening on port " << server.port() << std::endl;

    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    int sig = 0;
    sigwait(&set, &sig);

    server.stop();
    return 0;
}

int run_sim(const std::string& scenario_path, const std::string& report_path) {
    const auto config = abgp::sim::scenario_from_json(read_file(scenario_path));
    const auto report = abgp::sim::run_simulation(config);
    const std::string json = abgp::sim::report_to_json(report);
    std::cout << json << std::endl;
    if (!report_path.empty()) {
        std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
        if (!out) throw abgp::Error(abgp::Errc::ConfigError, "cannot write " + report_path);
        out << json << '\n';
    }
    return report.converged ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ABGP node and simulator"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "run a node");
    run->add_option("--config", config_path, "node config JSON file")->required();

    std::string node_address, key, value;
    std::uint64_t version = 0;
    auto* append = app.add_subcommand("append", "append a record through a node's local API");
    append->add_option("--node", node_address, "node host:port")->required();
    append->add_option("--key", key)->required();
    append->add_option("--value", value)->required();
    append->add_option("--version", version)->required();

    std::string status_address;
    auto* status = app.add_subcommand("status", "query a node's root and counters");
    status->add_option("--node", status_address, "node host:port")->required();

    std::string scenario_path, report_path;
    auto* sim = app.add_subcommand("sim", "run a deterministic simulation scenario");
    sim->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    sim->add_option("--report", report_path, "write the report JSON here too");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_node(config_path);
        if (append->parsed()) {
            const auto hash = abgp::node::cmd_append(node_address, key, value, version);
            std::cout << abgp::records::digest_to_hex(hash) << std::endl;
            return 0;
        }
        if (status->parsed()) {
            const auto info = abgp::node::cmd_status(status_address);
            std::cout << abgp::node::wire::status_json(info) << std::endl;
            return 0;
        }
        if (sim->parsed()) return run_sim(scenario_path, report_path);
    } catch (const abgp::Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
