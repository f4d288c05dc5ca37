#pragma once

#include "abgp/rng.hpp"
#include "abgp/state.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace abgp::gossip {

/// Member identity on the gossip plane: the 66-char compressed-point hex.
using PeerId = std::string;

/// Per-peer replication watermark; (0, 0) before first contact. Advances to
/// the stamp of the last record received from that peer, never backwards.
struct PeerCursor {
    PeerId peer_id;
    std::int64_t last_timestamp = 0;
    std::uint64_t last_timestamp_index = 0;
};

enum class GossipMode { RandomPeer, AllPeers };

struct GossipConfig {
    std::int64_t min_interval_ms = 150;
    std::int64_t max_interval_ms = 300;
    std::size_t batch_limit = 10;
    GossipMode mode = GossipMode::RandomPeer;
    std::vector<PeerId> neighbors;
};

struct PullRequest {
    std::int64_t last_timestamp = 0;
    std::uint64_t last_timestamp_index = 0;
};

struct PullResponse {
    std::vector<records::RecordModel> records;
};

/// Uniform choice driven entirely by rng. Throws Error{NoPeers} on [].
const PeerId& select_peer(std::span<const PeerId> neighbors, Rng& rng);

/// Carries the stored cursor verbatim.
PullRequest build_pull_request(const PeerCursor& cursor);

/// Responder side: the ascending batch strictly after the requester's cursor,
/// capped at batch_limit.
PullResponse handle_pull_request(const state::StateStore& store, const PullRequest& request,
                                 const GossipConfig& config);

struct ApplyResult {
    std::vector<state::AppendOutcome> outcomes;  // one per record, sorted order
    PeerCursor cursor;                           // advanced when the batch was nonempty
};

/// Requester side: sorts ascending, applies each record, then moves the
/// cursor to the stamp of the last record as received. Invalid records are
/// skipped but do not hold the cursor back — a lying responder can only
/// starve itself as a source.
ApplyResult handle_pull_response(state::StateStore& store, const PeerCursor& cursor,
                                 std::vector<records::RecordModel> batch);

/// Uniform in [min_interval_ms, max_interval_ms].
std::int64_t next_delay(const GossipConfig& config, Rng& rng);

/// Cursor table for one node.
struct GossipState {
    std::map<PeerId, PeerCursor> cursors;

    PeerCursor& cursor_for(const PeerId& peer) {
        auto [it, inserted] = cursors.try_emplace(peer);
        if (inserted) it->second.peer_id = peer;
        return it->second;
    }
};

/// One blocking pull exchange; nullopt means the peer was unreachable or the
/// reply was malformed.
struct Transport {
    virtual ~Transport() = default;
    virtual std::optional<PullResponse> exchange(const PeerId& peer, const PullRequest& request) = 0;
};

struct ExchangeOutcome {
    PeerId peer;
    bool ok = false;
    std::size_t received = 0;
    std::size_t mutations = 0;
};

struct RoundSummary {
    std::vector<ExchangeOutcome> exchanges;
};

/// One gossip round: a single exchange with one random neighbor, or one per
/// neighbor in all-peers mode. A failed exchange leaves that peer's cursor
/// untouched. The caller sleeps next_delay between rounds.
RoundSummary run_round(state::StateStore& store, GossipState& gossip, const GossipConfig& config,
                       Transport& transport, Rng& rng);

/// The f+1 neighbor floor for quorum reachability; callers warn, not refuse,
/// so degraded topologies stay observable.
bool meets_connectivity_floor(const GossipConfig& config, const records::ClusterSpec& cluster);

}  // namespace abgp::gossip
