#pragma once

#include "abgp/gossip.hpp"

#include <optional>
#include <string>
#include <vector>

namespace abgp::node {

struct PeerEntry {
    std::optional<std::string> address;  // "tcp://host:port"; absent for key-only members
    crypto::CurvePoint public_key;
};

struct NodeConfig {
    crypto::KeyPair keys;
    std::int64_t min_gossip_interval_ms = 150;
    std::int64_t max_gossip_interval_ms = 300;
    std::int64_t proof_expiration_ms = 300;  // parsed and surfaced in status; drives nothing
    std::size_t batch_limit = 10;
    gossip::GossipMode gossip_mode = gossip::GossipMode::RandomPeer;
    bool reduced_timestamp_index = false;  // only under external clock discipline
    std::vector<PeerEntry> peers;
    std::string listen_address;  // "host:port"
    std::optional<std::string> journal_path;

    /// Self plus every peer key, sorted.
    records::ClusterSpec cluster() const;
};

/// Parses and checks every NodeConfig invariant; throws Error{ConfigError}
/// naming the offending field.
NodeConfig config_from_json(std::string_view text);
NodeConfig load_config(const std::string& path);

}  // namespace abgp::node
