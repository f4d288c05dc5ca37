#include "abgp/node/client.hpp"

#include "abgp/errors.hpp"
#include "abgp/node/net.hpp"

namespace abgp::node {

namespace {

constexpr int kClientTimeoutMs = 3000;

wire::Reply roundtrip(const std::string& node_address, const std::string& payload) {
    auto address = net::parse_address(node_address);
    if (!address) throw Error(Errc::TransportError, "bad node address: " + node_address);
    auto socket = net::connect_to(*address, kClientTimeoutMs);
    if (!socket) throw Error(Errc::TransportError, "cannot connect to " + node_address);
    if (!net::write_frame(*socket, payload)) {
        throw Error(Errc::TransportError, "send failed to " + node_address);
    }
    std::string reply_payload;
    if (net::read_frame(*socket, reply_payload) != net::FrameStatus::Ok) {
        throw Error(Errc::TransportError, "no reply from " + node_address);
    }
    auto parsed = wire::parse_reply(reply_payload, nullptr);
    if (!parsed.reply) throw Error(Errc::ProtocolError, "bad reply: " + parsed.error);
    return std::move(*parsed.reply);
}

}  // namespace

records::Digest cmd_append(const std::string& node_address, std::string_view key,
                           std::string_view value, std::uint64_t version) {
    const auto reply =
        roundtrip(node_address, wire::append_request_json(key, value, version));
    if (const auto* appended = std::get_if<wire::ReplyAppended>(&reply)) {
        return appended->hash;
    }
    if (const auto* error = std::get_if<wire::ReplyError>(&reply)) {
        throw Error(Errc::ProtocolError, "append rejected: " + error->code);
    }
    throw Error(Errc::ProtocolError, "unexpected reply to append");
}

wire::StatusInfo cmd_status(const std::string& node_address) {
    auto reply = roundtrip(node_address, wire::status_request_json());
    if (auto* status = std::get_if<wire::ReplyStatus>(&reply)) {
        return std::move(status->status);
    }
    if (const auto* error = std::get_if<wire::ReplyError>(&reply)) {
        throw Error(Errc::ProtocolError, "status rejected: " + error->code);
    }
    throw Error(Errc::ProtocolError, "unexpected reply to status");
}

}  // namespace abgp::node
