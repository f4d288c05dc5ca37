#include "abgp/gossip.hpp"

#include "abgp/errors.hpp"

#include <algorithm>

namespace abgp::gossip {

const PeerId& select_peer(std::span<const PeerId> neighbors, Rng& rng) {
    if (neighbors.empty()) {
        throw Error(Errc::NoPeers, "cannot select a peer from an empty neighbor set");
    }
    return neighbors[rng.uniform_below(neighbors.size())];
}

PullRequest build_pull_request(const PeerCursor& cursor) {
    return PullRequest{cursor.last_timestamp, cursor.last_timestamp_index};
}

PullResponse handle_pull_request(const state::StateStore& store, const PullRequest& request,
                                 const GossipConfig& config) {
    return PullResponse{
        store.records_after(request.last_timestamp, request.last_timestamp_index,
                            std::max<std::size_t>(config.batch_limit, 1))};
}

ApplyResult handle_pull_response(state::StateStore& store, const PeerCursor& cursor,
                                 std::vector<records::RecordModel> batch) {
    ApplyResult result;
    result.cursor = cursor;
    if (batch.empty()) return result;

    std::sort(batch.begin(), batch.end(), [](const auto& a, const auto& b) {
        return records::replication_order(a, b) == std::strong_ordering::less;
    });

    result.outcomes.reserve(batch.size());
    for (const auto& record : batch) {
        result.outcomes.push_back(store.append_remote(record));
    }

    const records::RecordModel& last = batch.back();
    result.cursor.last_timestamp = last.timestamp;
    result.cursor.last_timestamp_index = last.timestamp_index;
    return result;
}

std::int64_t next_delay(const GossipConfig& config, Rng& rng) {
    return rng.uniform_range(config.min_interval_ms, config.max_interval_ms);
}

RoundSummary run_round(state::StateStore& store, GossipState& gossip, const GossipConfig& config,
                       Transport& transport, Rng& rng) {
    RoundSummary summary;
    std::vector<PeerId> targets;
    if (config.neighbors.empty()) return summary;
    if (config.mode == GossipMode::RandomPeer) {
        targets.push_back(select_peer(config.neighbors, rng));
    } else {
        targets = config.neighbors;
    }

    for (const auto& peer : targets) {
        ExchangeOutcome outcome;
        outcome.peer = peer;
        PeerCursor& cursor = gossip.cursor_for(peer);
        const PullRequest request = build_pull_request(cursor);
        auto response = transport.exchange(peer, request);
        if (!response) {
            summary.exchanges.push_back(std::move(outcome));
            continue;
        }
        outcome.ok = true;
        outcome.received = response->records.size();
        ApplyResult applied = handle_pull_response(store, cursor, std::move(response->records));
        for (const auto& o : applied.outcomes) {
            if (o.mutated()) ++outcome.mutations;
        }
        cursor = applied.cursor;
        summary.exchanges.push_back(std::move(outcome));
    }
    return summary;
}

bool meets_connectivity_floor(const GossipConfig& config, const records::ClusterSpec& cluster) {
    return config.neighbors.size() >= cluster.fault_bound() + 1;
}

}  // namespace abgp::gossip
