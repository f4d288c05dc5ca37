#pragma once

#include "abgp/gossip.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>

namespace abgp::node::wire {

/// Frame = 4-byte big-endian payload length, then that many bytes of UTF-8
/// JSON. Oversized lengths are rejected before the payload is touched.
inline constexpr std::size_t kMaxFrameBytes = 4u * 1024 * 1024;

/// Throws Error{ProtocolError} when the payload exceeds kMaxFrameBytes.
std::string encode_frame(std::string_view payload);

/// Splits one frame off the front of `buffer`. Returns the payload, nullopt
/// if more bytes are needed. too_large is set (and nothing consumed) when the
/// length prefix exceeds the bound.
std::optional<std::string> split_frame(std::string& buffer, bool& too_large);

struct StatusInfo {
    std::string root;
    std::uint64_t record_count = 0;
    std::uint64_t confirmed_count = 0;
    std::map<std::string, gossip::PeerCursor> peer_cursors;
    std::int64_t proof_expiration_ms = 0;
};

// payload builders
std::string pull_request_json(const gossip::PullRequest& request);
std::string pull_response_json(const gossip::PullResponse& response,
                               const records::ClusterSpec& cluster);
std::string append_request_json(std::string_view key, std::string_view value,
                                std::uint64_t version);
std::string appended_json(const records::Digest& hash);
std::string status_request_json();
std::string status_json(const StatusInfo& status);
std::string error_json(std::string_view code);

// server-side inbound messages
struct InboundPull {
    gossip::PullRequest request;
};
struct InboundAppend {
    std::string key;
    std::string value;
    std::uint64_t version = 0;
};
struct InboundStatus {};
using Inbound = std::variant<InboundPull, InboundAppend, InboundStatus>;

struct InboundParse {
    std::optional<Inbound> message;
    std::string error_code;  // set when message is empty
};

/// Never throws on hostile payloads.
InboundParse parse_inbound(std::string_view payload);

// client-side replies
struct ReplyRecords {
    std::vector<records::RecordModel> records;
};
struct ReplyAppended {
    records::Digest hash{};
};
struct ReplyStatus {
    StatusInfo status;
};
struct ReplyError {
    std::string code;
};
using Reply = std::variant<ReplyRecords, ReplyAppended, ReplyStatus, ReplyError>;

struct ReplyParse {
    std::optional<Reply> reply;
    std::string error;  // set when reply is empty
};

/// `cluster` is required to decode record batches ("records" replies); other
/// reply kinds parse without it. Never throws on hostile payloads.
ReplyParse parse_reply(std::string_view payload, const records::ClusterSpec* cluster);

}  // namespace abgp::node::wire
