#pragma once

#include "abgp/node/wire.hpp"

#include <string>

namespace abgp::node {

/// Sends one append to the node's local API and returns the record hash.
/// Throws Error{TransportError} when the node is unreachable and
/// Error{ProtocolError} carrying the node's error code (e.g. DuplicateRecord)
/// on a rejected append.
records::Digest cmd_append(const std::string& node_address, std::string_view key,
                           std::string_view value, std::uint64_t version);

/// Read-only status snapshot.
wire::StatusInfo cmd_status(const std::string& node_address);

}  // namespace abgp::node
