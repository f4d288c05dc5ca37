#include "abgp/node/wire.hpp"

#include "abgp/errors.hpp"

#include <json.hpp>

namespace abgp::node::wire {

namespace {

using nlohmann::json;

}  // namespace

std::string encode_frame(std::string_view payload) {
    if (payload.size() > kMaxFrameBytes) {
        throw Error(Errc::ProtocolError, "frame payload exceeds 4 MiB");
    }
    std::string out;
    out.reserve(payload.size() + 4);
    const std::uint32_t len = static_cast<std::uint32_t>(payload.size());
    out.push_back(static_cast<char>((len >> 24) & 0xFF));
    out.push_back(static_cast<char>((len >> 16) & 0xFF));
    out.push_back(static_cast<char>((len >> 8) & 0xFF));
    out.push_back(static_cast<char>(len & 0xFF));
    out.append(payload);
    return out;
}

std::optional<std::string> split_frame(std::string& buffer, bool& too_large) {
    too_large = false;
    if (buffer.size() < 4) return std::nullopt;
    const auto b = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(buffer[i])); };
    const std::uint32_t len = (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
    if (len > kMaxFrameBytes) {
        too_large = true;
        return std::nullopt;
    }
    if (buffer.size() < 4 + static_cast<std::size_t>(len)) return std::nullopt;
    std::string payload = buffer.substr(4, len);
    buffer.erase(0, 4 + static_cast<std::size_t>(len));
    return payload;
}

std::string pull_request_json(const gossip::PullRequest& request) {
    return json{{"type", "pull"},
                {"lastTimestamp", request.last_timestamp},
                {"lastTimestampIndex", request.last_timestamp_index}}
        .dump();
}

std::string pull_response_json(const gossip::PullResponse& response,
                               const records::ClusterSpec& cluster) {
    json array = json::array();
    for (const auto& rec : response.records) {
        array.push_back(json::parse(records::record_to_json(rec, cluster)));
    }
    return json{{"type", "records"}, {"records", std::move(array)}}.dump();
}

std::string append_request_json(std::string_view key, std::string_view value,
                                std::uint64_t version) {
    return json{{"type", "append"}, {"key", key}, {"value", value}, {"version", version}}.dump();
}

std::string appended_json(const records::Digest& hash) {
    return json{{"type", "appended"}, {"hash", records::digest_to_hex(hash)}}.dump();
}

std::string status_request_json() { return json{{"type", "status"}}.dump(); }

std::string status_json(const StatusInfo& status) {
    json cursors = json::object();
    for (const auto& [peer, cursor] : status.peer_cursors) {
        cursors[peer] = json{{"lastTimestamp", cursor.last_timestamp},
                             {"lastTimestampIndex", cursor.last_timestamp_index}};
    }
    return json{{"type", "status"},
                {"root", status.root},
                {"recordCount", status.record_count},
                {"confirmedCount", status.confirmed_count},
                {"peerCursors", std::move(cursors)},
                {"proofExpirationMs", status.proof_expiration_ms}}
        .dump();
}

std::string error_json(std::string_view code) {
    return json{{"type", "error"}, {"code", code}}.dump();
}

InboundParse parse_inbound(std::string_view payload) {
    json obj = json::parse(payload, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) return {std::nullopt, "BadJson"};
    auto type_it = obj.find("type");
    if (type_it == obj.end() || !type_it->is_string()) return {std::nullopt, "MissingType"};
    const auto& type = type_it->get_ref<const std::string&>();

    if (type == "pull") {
        auto ts = obj.find("lastTimestamp");
        auto idx = obj.find("lastTimestampIndex");
        if (ts == obj.end() || !ts->is_number_integer() || ts->get<std::int64_t>() < 0 ||
            idx == obj.end() || !idx->is_number_unsigned()) {
            return {std::nullopt, "BadPull"};
        }
        return {InboundPull{{ts->get<std::int64_t>(), idx->get<std::uint64_t>()}}, ""};
    }
    if (type == "append") {
        auto key = obj.find("key");
        auto value = obj.find("value");
        auto version = obj.find("version");
        if (key == obj.end() || !key->is_string() || value == obj.end() || !value->is_string() ||
            version == obj.end() || !version->is_number_unsigned()) {
            return {std::nullopt, "BadAppend"};
        }
        return {InboundAppend{key->get<std::string>(), value->get<std::string>(),
                              version->get<std::uint64_t>()},
                ""};
    }
    if (type == "status") {
        return {InboundStatus{}, ""};
    }
    return {std::nullopt, "UnknownType"};
}

ReplyParse parse_reply(std::string_view payload, const records::ClusterSpec* cluster) {
    json obj = json::parse(payload, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) return {std::nullopt, "reply is not a JSON object"};
    auto type_it = obj.find("type");
    if (type_it == obj.end() || !type_it->is_string()) return {std::nullopt, "reply has no type"};
    const auto& type = type_it->get_ref<const std::string&>();

    if (type == "error") {
        auto code = obj.find("code");
        if (code == obj.end() || !code->is_string()) return {std::nullopt, "error reply has no code"};
        return {ReplyError{code->get<std::string>()}, ""};
    }
    if (type == "appended") {
        auto hash_it = obj.find("hash");
        if (hash_it == obj.end() || !hash_it->is_string()) {
            return {std::nullopt, "appended reply has no hash"};
        }
        auto digest = records::digest_from_hex(hash_it->get_ref<const std::string&>());
        if (!digest) return {std::nullopt, "appended hash is not 64 hex chars"};
        return {ReplyAppended{*digest}, ""};
    }
    if (type == "records") {
        if (cluster == nullptr) return {std::nullopt, "record batch needs cluster context"};
        auto records_it = obj.find("records");
        if (records_it == obj.end() || !records_it->is_array()) {
            return {std::nullopt, "records reply has no records array"};
        }
        ReplyRecords out;
        for (const auto& entry : *records_it) {
            auto parsed = records::record_from_json(entry.dump(), *cluster);
            if (!parsed.record) return {std::nullopt, "bad record in batch: " + parsed.error};
            out.records.push_back(std::move(*parsed.record));
        }
        return {std::move(out), ""};
    }
    if (type == "status") {
        ReplyStatus out;
        auto root = obj.find("root");
        if (root == obj.end() || !root->is_string()) return {std::nullopt, "status has no root"};
        out.status.root = root->get<std::string>();
        auto rc = obj.find("recordCount");
        auto cc = obj.find("confirmedCount");
        if (rc == obj.end() || !rc->is_number_unsigned() || cc == obj.end() ||
            !cc->is_number_unsigned()) {
            return {std::nullopt, "status has no counters"};
        }
        out.status.record_count = rc->get<std::uint64_t>();
        out.status.confirmed_count = cc->get<std::uint64_t>();
        out.status.proof_expiration_ms = obj.value("proofExpirationMs", std::int64_t{0});
        if (auto cursors = obj.find("peerCursors"); cursors != obj.end() && cursors->is_object()) {
            for (const auto& [peer, cur] : cursors->items()) {
                if (!cur.is_object()) continue;
                gossip::PeerCursor cursor;
                cursor.peer_id = peer;
                cursor.last_timestamp = cur.value("lastTimestamp", std::int64_t{0});
                cursor.last_timestamp_index = cur.value("lastTimestampIndex", std::uint64_t{0});
                out.status.peer_cursors.emplace(peer, std::move(cursor));
            }
        }
        return {std::move(out), ""};
    }
    return {std::nullopt, "unknown reply type: " + type};
}

}  // namespace abgp::node::wire
