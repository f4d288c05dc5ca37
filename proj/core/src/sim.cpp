#include "abgp/sim.hpp"

#include "abgp/errors.hpp"
#include "abgp/log.hpp"

#include <json.hpp>

#include <algorithm>
#include <queue>
#include <unordered_map>

namespace abgp::sim {

namespace {

using nlohmann::json;

constexpr std::int64_t kTimeoutDelayFactor = 4;  // pull timeout = delay_max * factor

}  // namespace

const char* fault_behavior_name(FaultBehavior behavior) noexcept {
    switch (behavior) {
        case FaultBehavior::Crashed: return "CRASHED";
        case FaultBehavior::Forger: return "FORGER";
        case FaultBehavior::Tamperer: return "TAMPERER";
    }
    return "?";
}

bool check_convergence(std::span<const state::StateStore* const> honest_stores,
                       std::span<const records::Digest> scripted) {
    if (honest_stores.empty()) return true;
    const crypto::Scalar first_root = honest_stores.front()->current_root();
    for (const auto* store : honest_stores) {
        if (!(store->current_root() == first_root)) return false;
        for (const auto& digest : scripted) {
            const records::RecordModel* rec = store->find(digest);
            if (rec == nullptr || rec->signature_type != records::SignatureType::Multisig) {
                return false;
            }
        }
    }
    return true;
}

std::optional<std::vector<records::RecordModel>> apply_fault(
    FaultBehavior behavior, std::vector<records::RecordModel> outbound,
    const crypto::KeyPair* forged_key) {
    switch (behavior) {
        case FaultBehavior::Crashed:
            return std::nullopt;
        case FaultBehavior::Forger: {
            if (forged_key == nullptr) {
                throw Error(Errc::InternalError, "forger fault needs a forged key");
            }
            for (auto& rec : outbound) {
                const crypto::Scalar hash_scalar = crypto::hash_to_scalar(rec.hash);
                rec.signature_type = records::SignatureType::Intermediate;
                rec.signatures.clear();
                rec.signatures.emplace(
                    forged_key->public_key,
                    crypto::partial_sign(forged_key->private_key, hash_scalar));
                rec.public_keys = {forged_key->public_key};
                rec.state_hash.reset();
            }
            return outbound;
        }
        case FaultBehavior::Tamperer: {
            for (auto& rec : outbound) {
                rec.value.push_back('!');  // hash and signatures left stale
            }
            return outbound;
        }
    }
    return outbound;
}

struct Simulation::Ctx {
    struct Message {
        enum class Kind { Request, Response };
        Kind kind = Kind::Request;
        std::size_t from = 0;
        std::size_t to = 0;
        std::uint64_t exchange_id = 0;
        gossip::PullRequest request;                // Request
        std::vector<records::RecordModel> records;  // Response
    };

    struct Event {
        std::int64_t at = 0;
        std::uint64_t seq = 0;
        enum class Kind { RoundStart, Deliver, Timeout, Append } kind = Kind::RoundStart;
        std::size_t node = 0;           // RoundStart / Timeout owner, Append target
        std::uint64_t exchange_id = 0;  // Timeout
        std::size_t append_index = 0;   // Append
        Message message;                // Deliver
    };

    struct EventAfter {
        bool operator()(const Event& a, const Event& b) const noexcept {
            if (a.at != b.at) return a.at > b.at;
            return a.seq > b.seq;
        }
    };

    struct Node {
        crypto::KeyPair keys;
        std::unique_ptr<state::StateStore> store;
        gossip::GossipState cursors;
        gossip::GossipConfig gossip_config;
        std::vector<std::size_t> neighbor_indexes;
        Rng sched_rng{0};
        std::optional<FaultSpec> fault;
        std::optional<crypto::KeyPair> forged_key;
        std::unordered_map<std::uint64_t, std::size_t> pending;  // exchange id -> peer index
        std::size_t outstanding = 0;

        bool faulty_at(std::int64_t t) const noexcept { return fault && t >= fault->start_ms; }
        bool crashed_at(std::int64_t t) const noexcept {
            return faulty_at(t) && fault->behavior == FaultBehavior::Crashed;
        }
    };

    explicit Ctx(SimConfig cfg);

    void validate() const;
    void schedule(Event ev);
    void send(Message msg);
    void schedule_next_round(std::size_t node_index);
    void start_round(std::size_t node_index);
    void deliver(const Message& msg);
    void on_timeout(std::size_t node_index, std::uint64_t exchange_id);
    void run_append(std::size_t append_index);
    bool probe_convergence() const;
    SimReport run();

    SimConfig config;
    std::int64_t now = 0;
    std::uint64_t seq = 0;
    std::uint64_t next_exchange_id = 1;
    std::size_t appends_issued = 0;
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue;
    std::vector<Node> nodes;
    std::vector<gossip::PeerId> peer_ids;  // node index -> id
    std::unordered_map<std::string, std::size_t> peer_index;
    std::optional<records::ClusterSpec> cluster;
    std::vector<records::Digest> scripted;
    Rng net_rng{0};
    SimReport report;
};

Simulation::Ctx::Ctx(SimConfig cfg) : config(std::move(cfg)) {
    validate();

    Rng root(config.seed);
    Rng keys_rng = root.fork("keys");
    net_rng = root.fork("network");
    Rng fault_rng = root.fork("fault-keys");

    nodes.resize(config.node_count);
    std::vector<crypto::CurvePoint> members;
    for (std::size_t i = 0; i < config.node_count; ++i) {
        nodes[i].keys = crypto::KeyPair::generate(keys_rng);
        members.push_back(nodes[i].keys.public_key);
        peer_ids.push_back(nodes[i].keys.public_key.to_hex());
        peer_index.emplace(peer_ids.back(), i);
        nodes[i].sched_rng = root.fork("node." + std::to_string(i) + ".sched");
    }
    cluster = records::ClusterSpec::from_members(members);

    for (const auto& fault : config.faults) {
        Node& node = nodes[fault.node_index];
        node.fault = fault;
        if (fault.behavior == FaultBehavior::Forger) {
            node.forged_key = crypto::KeyPair::generate(fault_rng);
        }
    }

    for (std::size_t i = 0; i < config.node_count; ++i) {
        Node& node = nodes[i];
        if (config.full_mesh) {
            for (std::size_t j = 0; j < config.node_count; ++j) {
                if (j != i) node.neighbor_indexes.push_back(j);
            }
        } else {
            node.neighbor_indexes = config.adjacency[i];
        }
        node.gossip_config.min_interval_ms = config.min_interval_ms;
        node.gossip_config.max_interval_ms = config.max_interval_ms;
        node.gossip_config.batch_limit = config.batch_limit;
        node.gossip_config.mode = config.gossip_mode;
        for (std::size_t j : node.neighbor_indexes) {
            node.gossip_config.neighbors.push_back(peer_ids[j]);
        }
        if (!gossip::meets_connectivity_floor(node.gossip_config, *cluster)) {
            ABGP_LOG_WARN("sim node " << i << " has " << node.neighbor_indexes.size()
                                      << " neighbors, below the f+1 floor of "
                                      << (cluster->fault_bound() + 1));
        }
        node.store = std::make_unique<state::StateStore>(*cluster, node.keys,
                                                         [this] { return now; });
    }

    for (std::size_t a = 0; a < config.appends.size(); ++a) {
        const auto& append = config.appends[a];
        scripted.push_back(
            records::compute_record_hash(append.key, append.value, append.version));
        Event ev;
        ev.at = append.at_ms;
        ev.kind = Event::Kind::Append;
        ev.node = append.node_index;
        ev.append_index = a;
        schedule(std::move(ev));
    }

    for (std::size_t i = 0; i < config.node_count; ++i) {
        if (nodes[i].neighbor_indexes.empty()) continue;
        Event ev;
        ev.at = gossip::next_delay(nodes[i].gossip_config, nodes[i].sched_rng);
        ev.kind = Event::Kind::RoundStart;
        ev.node = i;
        schedule(std::move(ev));
    }
}

void Simulation::Ctx::validate() const {
    auto fail = [](const std::string& what) { throw Error(Errc::ConfigError, what); };
    if (config.node_count < 3) fail("nodeCount must be at least 3");
    if (config.max_virtual_time_ms <= 0) fail("maxVirtualTimeMs must be positive");
    if (config.drop_probability < 0.0 || config.drop_probability > 1.0)
        fail("dropProbability must be in [0,1]");
    if (config.duplicate_probability < 0.0 || config.duplicate_probability > 1.0)
        fail("duplicateProbability must be in [0,1]");
    if (config.delay_min_ms < 0 || config.delay_max_ms < config.delay_min_ms)
        fail("delayMsRange must satisfy 0 <= min <= max");
    if (config.min_interval_ms < 0 || config.max_interval_ms < config.min_interval_ms)
        fail("gossip intervals must satisfy 0 <= min <= max");
    if (config.batch_limit < 1) fail("batchLimit must be at least 1");
    if (!config.full_mesh && config.adjacency.size() != config.node_count)
        fail("adjacency must list every node");
    if (!config.full_mesh) {
        for (std::size_t i = 0; i < config.adjacency.size(); ++i) {
            for (std::size_t j : config.adjacency[i]) {
                if (j >= config.node_count) fail("adjacency index out of range");
                if (j == i) fail("adjacency contains a self edge");
            }
        }
    }
    for (const auto& fault : config.faults) {
        if (fault.node_index >= config.node_count) fail("fault nodeIndex out of range");
    }
    for (const auto& append : config.appends) {
        if (append.node_index >= config.node_count) fail("append nodeIndex out of range");
        if (append.at_ms < 0 || append.at_ms > config.max_virtual_time_ms)
            fail("append virtualTimeMs outside the horizon");
    }
}

void Simulation::Ctx::schedule(Event ev) {
    ev.seq = seq++;
    queue.push(std::move(ev));
}

void Simulation::Ctx::send(Message msg) {
    ++report.messages_sent;
    std::size_t copies = 1;
    if (net_rng.uniform01() < config.duplicate_probability) {
        ++copies;
        ++report.messages_duplicated;
    }
    for (std::size_t c = 0; c < copies; ++c) {
        if (net_rng.uniform01() < config.drop_probability) {
            ++report.messages_dropped;
            continue;
        }
        Event ev;
        ev.at = now + net_rng.uniform_range(config.delay_min_ms, config.delay_max_ms);
        ev.kind = Event::Kind::Deliver;
        ev.message = msg;  // copy; the duplicate is a second independent delivery
        schedule(std::move(ev));
    }
}

void Simulation::Ctx::schedule_next_round(std::size_t node_index) {
    Node& node = nodes[node_index];
    if (node.crashed_at(now)) return;
    Event ev;
    ev.at = now + gossip::next_delay(node.gossip_config, node.sched_rng);
    ev.kind = Event::Kind::RoundStart;
    ev.node = node_index;
    schedule(std::move(ev));
}

void Simulation::Ctx::start_round(std::size_t node_index) {
    Node& node = nodes[node_index];
    if (node.crashed_at(now)) return;  // crashed nodes stop their loop entirely
    ++report.rounds_executed;

    std::vector<std::size_t> targets;
    if (config.gossip_mode == gossip::GossipMode::RandomPeer) {
        targets.push_back(
            node.neighbor_indexes[node.sched_rng.uniform_below(node.neighbor_indexes.size())]);
    } else {
        targets = node.neighbor_indexes;
    }

    for (std::size_t target : targets) {
        const std::uint64_t id = next_exchange_id++;
        node.pending.emplace(id, target);
        ++node.outstanding;

        Message msg;
        msg.kind = Message::Kind::Request;
        msg.from = node_index;
        msg.to = target;
        msg.exchange_id = id;
        msg.request = gossip::build_pull_request(node.cursors.cursor_for(peer_ids[target]));
        send(std::move(msg));

        Event timeout;
        timeout.at = now + config.delay_max_ms * kTimeoutDelayFactor;
        timeout.kind = Event::Kind::Timeout;
        timeout.node = node_index;
        timeout.exchange_id = id;
        schedule(std::move(timeout));
    }
}

void Simulation::Ctx::deliver(const Message& msg) {
    Node& dest = nodes[msg.to];
    if (msg.kind == Message::Kind::Request) {
        if (dest.crashed_at(now)) return;  // requester times out
        gossip::PullResponse response =
            gossip::handle_pull_request(*dest.store, msg.request, dest.gossip_config);
        std::vector<records::RecordModel> outbound = std::move(response.records);
        if (dest.faulty_at(now)) {
            auto transformed =
                apply_fault(dest.fault->behavior, std::move(outbound),
                            dest.forged_key ? &*dest.forged_key : nullptr);
            if (!transformed) return;
            outbound = std::move(*transformed);
        }
        Message reply;
        reply.kind = Message::Kind::Response;
        reply.from = msg.to;
        reply.to = msg.from;
        reply.exchange_id = msg.exchange_id;
        reply.records = std::move(outbound);
        send(std::move(reply));
        return;
    }

    // response
    if (dest.crashed_at(now)) return;
    auto pending_it = dest.pending.find(msg.exchange_id);
    if (pending_it == dest.pending.end()) return;  // duplicate or post-timeout reply
    const std::size_t peer = pending_it->second;
    dest.pending.erase(pending_it);

    gossip::PeerCursor& cursor = dest.cursors.cursor_for(peer_ids[peer]);
    gossip::ApplyResult applied = gossip::handle_pull_response(*dest.store, cursor, msg.records);
    cursor = applied.cursor;

    if (--dest.outstanding == 0) schedule_next_round(msg.to);
}

void Simulation::Ctx::on_timeout(std::size_t node_index, std::uint64_t exchange_id) {
    Node& node = nodes[node_index];
    auto it = node.pending.find(exchange_id);
    if (it == node.pending.end()) return;  // completed in time
    node.pending.erase(it);
    if (--node.outstanding == 0) schedule_next_round(node_index);
}

void Simulation::Ctx::run_append(std::size_t append_index) {
    const auto& append = config.appends[append_index];
    ++appends_issued;
    Node& node = nodes[append.node_index];
    if (node.crashed_at(now)) {
        ABGP_LOG_WARN("sim append " << append_index << " targets crashed node "
                                    << append.node_index << "; skipped");
        return;
    }
    try {
        node.store->append_local(append.key, append.value, append.version);
    } catch (const Error& e) {
        if (e.code() != Errc::DuplicateRecord) throw;
        ABGP_LOG_WARN("sim append " << append_index << " duplicates an existing record");
    }
}

bool Simulation::Ctx::probe_convergence() const {
    std::vector<const state::StateStore*> honest;
    for (const auto& node : nodes) {
        if (!node.fault) honest.push_back(node.store.get());
    }
    return check_convergence(honest, scripted);
}

SimReport Simulation::Ctx::run() {
    if (config.appends.empty()) {
        // nothing to replicate; converged by definition, no events run
        report.converged = true;
        report.convergence_time_ms = 0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (!nodes[i].fault) {
                report.per_node_root.push_back(nodes[i].store->current_root().to_hex());
            }
        }
        return report;
    }
    while (!queue.empty()) {
        const Event ev = queue.top();
        if (ev.at > config.max_virtual_time_ms) break;
        queue.pop();
        now = ev.at;
        switch (ev.kind) {
            case Event::Kind::RoundStart: start_round(ev.node); break;
            case Event::Kind::Deliver: deliver(ev.message); break;
            case Event::Kind::Timeout: on_timeout(ev.node, ev.exchange_id); break;
            case Event::Kind::Append: run_append(ev.append_index); break;
        }
        if (appends_issued == config.appends.size() && probe_convergence()) {
            report.converged = true;
            report.convergence_time_ms = now;
            break;
        }
    }

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!nodes[i].fault) {
            report.per_node_root.push_back(nodes[i].store->current_root().to_hex());
        }
    }
    return report;
}

Simulation::Simulation(SimConfig config) : ctx_(std::make_unique<Ctx>(std::move(config))) {}

Simulation::~Simulation() = default;

SimReport Simulation::run() { return ctx_->run(); }

std::size_t Simulation::node_count() const noexcept { return ctx_->nodes.size(); }

const state::StateStore& Simulation::store(std::size_t node_index) const {
    return *ctx_->nodes.at(node_index).store;
}

bool Simulation::is_honest(std::size_t node_index) const noexcept {
    return !ctx_->nodes[node_index].fault.has_value();
}

const std::vector<records::Digest>& Simulation::scripted_digests() const noexcept {
    return ctx_->scripted;
}

SimReport run_simulation(const SimConfig& config) {
    Simulation simulation(config);
    return simulation.run();
}

SimConfig scenario_from_json(std::string_view text) try {
    json obj = json::parse(text, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
        throw Error(Errc::ConfigError, "scenario is not a JSON object");
    }
    auto require = [&](const char* field) -> const json& {
        auto it = obj.find(field);
        if (it == obj.end()) throw Error(Errc::ConfigError, std::string("missing field: ") + field);
        return *it;
    };

    SimConfig cfg;
    cfg.seed = require("seed").get<std::uint64_t>();
    cfg.node_count = require("nodeCount").get<std::size_t>();
    const json& topology = require("topology");
    if (topology.is_string() && topology.get<std::string>() == "FULL_MESH") {
        cfg.full_mesh = true;
    } else if (topology.is_array()) {
        cfg.full_mesh = false;
        cfg.adjacency = topology.get<std::vector<std::vector<std::size_t>>>();
    } else {
        throw Error(Errc::ConfigError, "topology must be \"FULL_MESH\" or an adjacency list");
    }
    if (auto it = obj.find("faults"); it != obj.end()) {
        for (const auto& f : *it) {
            FaultSpec spec;
            spec.node_index = f.at("nodeIndex").get<std::size_t>();
            const std::string behavior = f.at("behavior").get<std::string>();
            if (behavior == "CRASHED") spec.behavior = FaultBehavior::Crashed;
            else if (behavior == "FORGER") spec.behavior = FaultBehavior::Forger;
            else if (behavior == "TAMPERER") spec.behavior = FaultBehavior::Tamperer;
            else throw Error(Errc::ConfigError, "unknown fault behavior: " + behavior);
            if (f.contains("startMs")) spec.start_ms = f.at("startMs").get<std::int64_t>();
            cfg.faults.push_back(spec);
        }
    }
    cfg.drop_probability = require("dropProbability").get<double>();
    cfg.duplicate_probability = require("duplicateProbability").get<double>();
    const json& delay = require("delayMsRange");
    cfg.delay_min_ms = delay.at("min").get<std::int64_t>();
    cfg.delay_max_ms = delay.at("max").get<std::int64_t>();
    const json& gossip_obj = require("gossip");
    cfg.min_interval_ms = gossip_obj.at("minIntervalMs").get<std::int64_t>();
    cfg.max_interval_ms = gossip_obj.at("maxIntervalMs").get<std::int64_t>();
    cfg.batch_limit = gossip_obj.at("batchLimit").get<std::size_t>();
    const std::string mode = gossip_obj.value("mode", std::string("RANDOM_PEER"));
    if (mode == "RANDOM_PEER") cfg.gossip_mode = gossip::GossipMode::RandomPeer;
    else if (mode == "ALL_PEERS") cfg.gossip_mode = gossip::GossipMode::AllPeers;
    else throw Error(Errc::ConfigError, "unknown gossip mode: " + mode);
    if (auto it = obj.find("appends"); it != obj.end()) {
        for (const auto& a : *it) {
            SimConfig::Append append;
            append.at_ms = a.at("virtualTimeMs").get<std::int64_t>();
            append.node_index = a.at("nodeIndex").get<std::size_t>();
            append.key = a.at("key").get<std::string>();
            append.value = a.at("value").get<std::string>();
            append.version = a.at("version").get<std::uint64_t>();
            cfg.appends.push_back(std::move(append));
        }
    }
    cfg.max_virtual_time_ms = require("maxVirtualTimeMs").get<std::int64_t>();
    return cfg;
} catch (const json::exception& e) {
    throw Error(Errc::ConfigError, std::string("scenario: ") + e.what());
}

std::string report_to_json(const SimReport& report) {
    json obj{
        {"converged", report.converged},
        {"perNodeRoot", report.per_node_root},
        {"messagesSent", report.messages_sent},
        {"messagesDropped", report.messages_dropped},
        {"messagesDuplicated", report.messages_duplicated},
        {"roundsExecuted", report.rounds_executed},
    };
    if (report.convergence_time_ms) {
        obj["convergenceTimeMs"] = *report.convergence_time_ms;
    }
    return obj.dump();
}

}  // namespace abgp::sim
