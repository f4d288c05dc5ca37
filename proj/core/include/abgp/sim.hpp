#pragma once

#include "abgp/gossip.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace abgp::sim {

enum class FaultBehavior {
    Crashed,   // never responds, never gossips
    Forger,    // re-signs outbound records with a non-member key
    Tamperer,  // flips record values after signing, keeps signatures
};

const char* fault_behavior_name(FaultBehavior behavior) noexcept;

struct FaultSpec {
    std::size_t node_index = 0;
    FaultBehavior behavior = FaultBehavior::Crashed;
    std::int64_t start_ms = 0;
};

struct SimConfig {
    std::uint64_t seed = 0;
    std::size_t node_count = 0;
    bool full_mesh = true;
    std::vector<std::vector<std::size_t>> adjacency;  // per node, when !full_mesh
    std::vector<FaultSpec> faults;
    double drop_probability = 0.0;
    double duplicate_probability = 0.0;
    std::int64_t delay_min_ms = 1;
    std::int64_t delay_max_ms = 1;
    gossip::GossipMode gossip_mode = gossip::GossipMode::RandomPeer;
    std::int64_t min_interval_ms = 150;
    std::int64_t max_interval_ms = 300;
    std::size_t batch_limit = 10;

    struct Append {
        std::int64_t at_ms = 0;
        std::size_t node_index = 0;
        std::string key;
        std::string value;
        std::uint64_t version = 0;
    };
    std::vector<Append> appends;
    std::int64_t max_virtual_time_ms = 0;
};

struct SimReport {
    bool converged = false;
    std::optional<std::int64_t> convergence_time_ms;
    std::vector<std::string> per_node_root;  // honest nodes, ascending node index
    std::uint64_t messages_sent = 0;
    std::uint64_t messages_dropped = 0;
    std::uint64_t messages_duplicated = 0;
    std::uint64_t rounds_executed = 0;
};

/// Scenario file schema mirrors SimConfig field names.
/// Throws Error{ConfigError} naming the offending field.
SimConfig scenario_from_json(std::string_view text);

std::string report_to_json(const SimReport& report);

/// All honest stores agree on current_root and hold every scripted digest as
/// a multisig record.
bool check_convergence(std::span<const state::StateStore* const> honest_stores,
                       std::span<const records::Digest> scripted);

/// Fault transform for a responder's outbound record batch. Crashed is
/// silence (nullopt). forged_key is required for Forger.
std::optional<std::vector<records::RecordModel>> apply_fault(
    FaultBehavior behavior, std::vector<records::RecordModel> outbound,
    const crypto::KeyPair* forged_key);

/// Single-threaded discrete-event simulation over virtual time. One seeded
/// generator forked per subsystem drives every probabilistic choice, so a
/// config (seed included) pins the report byte for byte. The virtual clock
/// also feeds record timestamps inside the simulated nodes.
class Simulation {
public:
    explicit Simulation(SimConfig config);  // throws Error{ConfigError}
    ~Simulation();
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    SimReport run();

    std::size_t node_count() const noexcept;
    const state::StateStore& store(std::size_t node_index) const;
    bool is_honest(std::size_t node_index) const noexcept;
    const std::vector<records::Digest>& scripted_digests() const noexcept;

private:
    struct Ctx;
    std::unique_ptr<Ctx> ctx_;
};

SimReport run_simulation(const SimConfig& config);

}  // namespace abgp::sim
