#pragma once

#include "abgp/node/config.hpp"
#include "abgp/node/journal.hpp"
#include "abgp/node/net.hpp"
#include "abgp/node/wire.hpp"
#include "abgp/rng.hpp"

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <thread>

namespace abgp::node {

/// A running node: one listener serving framed pull/append/status exchanges
/// and one gossip loop pulling from peers that have addresses. All store
/// mutations are serialized under one mutex; the journal (when configured)
/// is written from the store's mutation hook, inside that lock.
class NodeServer {
public:
    explicit NodeServer(NodeConfig config);
    ~NodeServer();
    NodeServer(const NodeServer&) = delete;
    NodeServer& operator=(const NodeServer&) = delete;

    /// Binds, replays the journal (boot fails if replay_validate does), and
    /// starts the listener and gossip threads. Throws Error{TransportError}
    /// on bind failure, Error{InternalError} on a corrupt journal.
    void start();
    void stop();

    std::uint16_t port() const noexcept { return port_; }
    wire::StatusInfo status() const;

private:
    void listen_loop();
    void gossip_loop();
    void handle_connection(net::Socket socket);
    std::string handle_payload(const std::string& payload);

    NodeConfig config_;
    records::ClusterSpec cluster_;
    std::unique_ptr<state::StateStore> store_;
    std::unique_ptr<JournalWriter> journal_;
    mutable std::mutex store_mutex_;

    gossip::GossipState gossip_state_;
    gossip::GossipConfig gossip_config_;
    std::map<gossip::PeerId, net::Address> peer_addresses_;
    Rng rng_;

    net::Listener listener_;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::condition_variable stop_cv_;
    std::mutex stop_mutex_;
    std::thread listen_thread_;
    std::thread gossip_thread_;
    std::mutex workers_mutex_;
    std::vector<std::thread> workers_;
    bool started_ = false;
};

}  // namespace abgp::node
