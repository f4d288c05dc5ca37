#include "abgp/node/server.hpp"

#include "abgp/errors.hpp"
#include "abgp/log.hpp"

#include <chrono>

namespace abgp::node {

namespace {

constexpr int kConnectionTimeoutMs = 2000;

std::int64_t wall_clock_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

/// One TCP connection per exchange: connect, request, response, close.
class TcpTransport final : public gossip::Transport {
public:
    TcpTransport(const std::map<gossip::PeerId, net::Address>& addresses,
                 const records::ClusterSpec& cluster)
        : addresses_(addresses), cluster_(cluster) {}

    std::optional<gossip::PullResponse> exchange(const gossip::PeerId& peer,
                                                 const gossip::PullRequest& request) override {
        auto address = addresses_.find(peer);
        if (address == addresses_.end()) return std::nullopt;
        auto socket = net::connect_to(address->second, kConnectionTimeoutMs);
        if (!socket) return std::nullopt;
        if (!net::write_frame(*socket, wire::pull_request_json(request))) return std::nullopt;
        std::string payload;
        if (net::read_frame(*socket, payload) != net::FrameStatus::Ok) return std::nullopt;
        auto parsed = wire::parse_reply(payload, &cluster_);
        if (!parsed.reply) {
            ABGP_LOG_DEBUG("gossip: bad reply from " << peer << ": " << parsed.error);
            return std::nullopt;
        }
        auto* batch = std::get_if<wire::ReplyRecords>(&*parsed.reply);
        if (batch == nullptr) return std::nullopt;
        return gossip::PullResponse{std::move(batch->records)};
    }

private:
    const std::map<gossip::PeerId, net::Address>& addresses_;
    const records::ClusterSpec& cluster_;
};

}  // namespace

NodeServer::NodeServer(NodeConfig config)
    : config_(std::move(config)), cluster_(config_.cluster()), rng_(static_cast<std::uint64_t>(
          std::chrono::steady_clock::now().time_since_epoch().count())) {
    store_ = std::make_unique<state::StateStore>(
        cluster_, config_.keys, wall_clock_ms,
        state::StoreOptions{config_.reduced_timestamp_index});

    gossip_config_.min_interval_ms = config_.min_gossip_interval_ms;
    gossip_config_.max_interval_ms = config_.max_gossip_interval_ms;
    gossip_config_.batch_limit = config_.batch_limit;
    gossip_config_.mode = config_.gossip_mode;
    for (const auto& peer : config_.peers) {
        if (!peer.address) continue;  // known by key only (M-of-N)
        auto address = net::parse_address(*peer.address);
        if (!address) {
            throw Error(Errc::ConfigError, "peers: bad address: " + *peer.address);
        }
        const gossip::PeerId id = peer.public_key.to_hex();
        gossip_config_.neighbors.push_back(id);
        peer_addresses_.emplace(id, *address);
    }
    if (!gossip::meets_connectivity_floor(gossip_config_, cluster_)) {
        ABGP_LOG_WARN("only " << gossip_config_.neighbors.size()
                              << " addressable neighbors, below the f+1 floor of "
                              << (cluster_.fault_bound() + 1));
    }
}

NodeServer::~NodeServer() { stop(); }

void NodeServer::start() {
    if (started_) return;

    if (config_.journal_path) {
        const std::size_t restored = replay_journal(*config_.journal_path, *store_);
        if (!store_->replay_validate()) {
            throw Error(Errc::InternalError, "journal replay failed validation");
        }
        if (restored > 0) {
            ABGP_LOG_INFO("journal: restored " << restored << " records, root "
                                               << store_->current_root().to_hex());
        }
        journal_ = std::make_unique<JournalWriter>(*config_.journal_path, cluster_);
        store_->set_mutation_hook([this](const records::RecordModel& rec) { journal_->append(rec); });
    }

    auto address = net::parse_address(config_.listen_address);
    if (!address) {
        throw Error(Errc::ConfigError, "listenAddress: bad address: " + config_.listen_address);
    }
    listener_ = net::Listener::bind(*address);
    port_ = listener_.port();
    stopping_ = false;
    started_ = true;
    listen_thread_ = std::thread([this] { listen_loop(); });
    gossip_thread_ = std::thread([this] { gossip_loop(); });
    ABGP_LOG_INFO("listening on " << address->host << ":" << port_);
}

void NodeServer::stop() {
    if (!started_) return;
    stopping_ = true;
    stop_cv_.notify_all();
    listener_.close();
    if (listen_thread_.joinable()) listen_thread_.join();
    if (gossip_thread_.joinable()) gossip_thread_.join();
    std::lock_guard<std::mutex> lock(workers_mutex_);
    for (auto& worker : workers_) {
        if (worker.joinable()) worker.join();
    }
    workers_.clear();
    started_ = false;
}

wire::StatusInfo NodeServer::status() const {
    std::lock_guard<std::mutex> lock(store_mutex_);
    wire::StatusInfo info;
    info.root = store_->current_root().to_hex();
    info.record_count = store_->record_count();
    info.confirmed_count = store_->confirmed_count();
    info.peer_cursors = gossip_state_.cursors;
    info.proof_expiration_ms = config_.proof_expiration_ms;
    return info;
}

namespace {

/// Releases the store lock for the duration of the network exchange so
/// inbound handling never waits on a remote peer.
class UnlockedExchange final : public gossip::Transport {
public:
    UnlockedExchange(std::unique_lock<std::mutex>& lock, gossip::Transport& inner)
        : lock_(lock), inner_(inner) {}

    std::optional<gossip::PullResponse> exchange(const gossip::PeerId& peer,
                                                 const gossip::PullRequest& request) override {
        lock_.unlock();
        auto response = inner_.exchange(peer, request);
        lock_.lock();
        return response;
    }

private:
    std::unique_lock<std::mutex>& lock_;
    gossip::Transport& inner_;
};

}  // namespace

void NodeServer::listen_loop() {
    while (!stopping_) {
        auto socket = listener_.accept(100);
        if (!socket) continue;
        socket->set_timeouts(kConnectionTimeoutMs);
        std::lock_guard<std::mutex> lock(workers_mutex_);
        // reap finished workers so the vector stays small on long runs
        if (workers_.size() > 32) {
            for (auto& worker : workers_) {
                if (worker.joinable()) worker.join();
            }
            workers_.clear();
        }
        workers_.emplace_back(
            [this, sock = std::move(*socket)]() mutable { handle_connection(std::move(sock)); });
    }
}

void NodeServer::handle_connection(net::Socket socket) {
    std::string payload;
    switch (net::read_frame(socket, payload)) {
        case net::FrameStatus::Ok: break;
        case net::FrameStatus::TooLarge:
            net::write_frame(socket, wire::error_json("FrameTooLarge"));
            return;
        case net::FrameStatus::Closed: return;
    }
    const std::string reply = handle_payload(payload);
    net::write_frame(socket, reply);
}

std::string NodeServer::handle_payload(const std::string& payload) {
    auto parsed = wire::parse_inbound(payload);
    if (!parsed.message) return wire::error_json(parsed.error_code);

    if (auto* pull = std::get_if<wire::InboundPull>(&*parsed.message)) {
        std::lock_guard<std::mutex> lock(store_mutex_);
        const auto response = gossip::handle_pull_request(*store_, pull->request, gossip_config_);
        return wire::pull_response_json(response, cluster_);
    }
    if (auto* append = std::get_if<wire::InboundAppend>(&*parsed.message)) {
        std::lock_guard<std::mutex> lock(store_mutex_);
        try {
            const auto& rec = store_->append_local(append->key, append->value, append->version);
            return wire::appended_json(rec.hash);
        } catch (const Error& e) {
            return wire::error_json(errc_name(e.code()));
        }
    }
    return wire::status_json(status());
}

void NodeServer::gossip_loop() {
    TcpTransport tcp(peer_addresses_, cluster_);
    while (!stopping_) {
        if (!gossip_config_.neighbors.empty()) {
            std::unique_lock<std::mutex> lock(store_mutex_);
            UnlockedExchange transport(lock, tcp);
            gossip::run_round(*store_, gossip_state_, gossip_config_, transport, rng_);
        }
        std::unique_lock<std::mutex> lock(stop_mutex_);
        const auto delay = std::chrono::milliseconds(gossip::next_delay(gossip_config_, rng_));
        stop_cv_.wait_for(lock, delay, [this] { return stopping_.load(); });
    }
}

}  // namespace abgp::node
