#pragma once

#include <stdexcept>
#include <string>

namespace abgp {

enum class Errc {
    InvalidDigest,
    InvalidKey,
    EmptyAggregate,
    QuorumNotReached,
    DuplicateRecord,
    InternalError,
    NoPeers,
    UnknownSigner,
    BadBitmap,
    ConfigError,
    TransportError,
    ProtocolError,
};

const char* errc_name(Errc code) noexcept;

/// Thrown on contract violations and unrecoverable conditions. Untrusted
/// input (records, frames) is handled with verdict/outcome values instead.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace abgp
