#include "abgp/node/config.hpp"

#include "abgp/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace abgp::node {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw Error(Errc::ConfigError, what); }

}  // namespace

records::ClusterSpec NodeConfig::cluster() const {
    std::vector<crypto::CurvePoint> members;
    members.push_back(keys.public_key);
    for (const auto& peer : peers) members.push_back(peer.public_key);
    return records::ClusterSpec::from_members(std::move(members));
}

NodeConfig config_from_json(std::string_view text) try {
    json obj = json::parse(text, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) fail("config is not a JSON object");

    NodeConfig cfg;

    if (!obj.contains("privateKey") || !obj["privateKey"].is_string()) fail("privateKey: missing");
    auto private_key = crypto::Scalar::from_hex(obj["privateKey"].get<std::string>());
    if (!private_key || private_key->is_zero()) fail("privateKey: not a valid nonzero scalar");
    cfg.keys = crypto::KeyPair::from_private(*private_key);

    if (!obj.contains("publicKey") || !obj["publicKey"].is_string()) fail("publicKey: missing");
    auto public_key = crypto::CurvePoint::from_hex(obj["publicKey"].get<std::string>());
    if (!public_key) fail("publicKey: not a valid compressed point");
    if (!(*public_key == cfg.keys.public_key)) {
        fail("publicKey: does not match privateKey");
    }

    cfg.min_gossip_interval_ms = obj.value("minGossipIntervalMs", std::int64_t{150});
    cfg.max_gossip_interval_ms = obj.value("maxGossipIntervalMs", std::int64_t{300});
    if (cfg.min_gossip_interval_ms < 0 || cfg.max_gossip_interval_ms < cfg.min_gossip_interval_ms) {
        fail("minGossipIntervalMs/maxGossipIntervalMs: need 0 <= min <= max");
    }
    cfg.proof_expiration_ms = obj.value("proofExpirationMs", std::int64_t{300});
    cfg.batch_limit = obj.value("batchLimit", std::size_t{10});
    if (cfg.batch_limit < 1) fail("batchLimit: must be at least 1");

    const std::string mode = obj.value("gossipMode", std::string("RANDOM_PEER"));
    if (mode == "RANDOM_PEER") cfg.gossip_mode = gossip::GossipMode::RandomPeer;
    else if (mode == "ALL_PEERS") cfg.gossip_mode = gossip::GossipMode::AllPeers;
    else fail("gossipMode: must be RANDOM_PEER or ALL_PEERS");

    if (obj.contains("reducedTimestampIndex")) {
        if (!obj["reducedTimestampIndex"].is_boolean()) {
            fail("reducedTimestampIndex: must be a boolean");
        }
        cfg.reduced_timestamp_index = obj["reducedTimestampIndex"].get<bool>();
    }

    if (!obj.contains("peers") || !obj["peers"].is_array()) fail("peers: missing");
    std::set<std::string> seen;
    for (const auto& p : obj["peers"]) {
        if (!p.is_object() || !p.contains("publicKey") || !p["publicKey"].is_string()) {
            fail("peers: each entry needs a publicKey");
        }
        PeerEntry entry;
        auto pk = crypto::CurvePoint::from_hex(p["publicKey"].get<std::string>());
        if (!pk) fail("peers: publicKey is not a valid compressed point");
        entry.public_key = *pk;
        if (entry.public_key == cfg.keys.public_key) fail("peers: contains this node's own key");
        if (!seen.insert(entry.public_key.to_hex()).second) fail("peers: duplicate publicKey");
        if (p.contains("address")) {
            if (!p["address"].is_string()) fail("peers: address must be a string");
            entry.address = p["address"].get<std::string>();
        }
        cfg.peers.push_back(std::move(entry));
    }
    if (cfg.peers.size() < 2) fail("peers: need at least 2 for a 3-member cluster");

    if (!obj.contains("listenAddress") || !obj["listenAddress"].is_string()) {
        fail("listenAddress: missing");
    }
    cfg.listen_address = obj["listenAddress"].get<std::string>();

    if (obj.contains("journalPath")) {
        if (!obj["journalPath"].is_string()) fail("journalPath: must be a string");
        cfg.journal_path = obj["journalPath"].get<std::string>();
    }

    return cfg;
} catch (const json::exception& e) {
    fail(std::string("config: ") + e.what());
}

NodeConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return config_from_json(buffer.str());
}

}  // namespace abgp::node
