#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace abgp::node::net {

struct Address {
    std::string host;
    std::uint16_t port = 0;
};

/// Accepts "host:port" and "tcp://host:port".
std::optional<Address> parse_address(std::string_view text) noexcept;

/// Connected stream socket with send/receive timeouts. Move-only RAII.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) noexcept : fd_(fd) {}
    ~Socket();
    Socket(Socket&& other) noexcept;
    Socket& operator=(Socket&& other) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;

    bool valid() const noexcept { return fd_ >= 0; }
    void set_timeouts(int milliseconds) noexcept;

    /// Appends up to `max_bytes` to `out`; false on error/close/timeout.
    bool read_some(std::string& out, std::size_t max_bytes);
    bool write_all(std::string_view data);
    void close() noexcept;

private:
    int fd_ = -1;
};

enum class FrameStatus { Ok, TooLarge, Closed };

/// Blocking read of exactly one frame (4-byte big-endian length + payload).
/// TooLarge is reported before any payload byte is read.
FrameStatus read_frame(Socket& socket, std::string& payload);

bool write_frame(Socket& socket, std::string_view payload);

class Listener {
public:
    /// Throws Error{TransportError} when the address cannot be bound.
    static Listener bind(const Address& address);

    Listener() = default;
    ~Listener();
    Listener(Listener&& other) noexcept;
    Listener& operator=(Listener&& other) noexcept;
    Listener(const Listener&) = delete;
    Listener& operator=(const Listener&) = delete;

    /// Waits up to timeout_ms; nullopt on timeout or shutdown.
    std::optional<Socket> accept(int timeout_ms);

    std::uint16_t port() const noexcept { return port_; }
    void close() noexcept;

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

std::optional<Socket> connect_to(const Address& address, int timeout_ms);

}  // namespace abgp::node::net
