#include "abgp/node/net.hpp"

#include "abgp/errors.hpp"
#include "abgp/node/wire.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

namespace abgp::node::net {

std::optional<Address> parse_address(std::string_view text) noexcept {
    constexpr std::string_view scheme = "tcp://";
    if (text.starts_with(scheme)) text.remove_prefix(scheme.size());
    const auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 >= text.size()) {
        return std::nullopt;
    }
    Address address;
    address.host = std::string(text.substr(0, colon));
    const std::string_view port_text = text.substr(colon + 1);
    unsigned int port = 0;
    const auto [ptr, ec] =
        std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port > 65535) {
        return std::nullopt;
    }
    address.port = static_cast<std::uint16_t>(port);
    return address;
}

Socket::~Socket() { close(); }

Socket::Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

Socket& Socket::operator=(Socket&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

void Socket::set_timeouts(int milliseconds) noexcept {
    timeval tv{};
    tv.tv_sec = milliseconds / 1000;
    tv.tv_usec = (milliseconds % 1000) * 1000;
    setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

bool Socket::read_some(std::string& out, std::size_t max_bytes) {
    char buffer[4096];
    const std::size_t want = std::min(max_bytes, sizeof(buffer));
    const ssize_t n = ::recv(fd_, buffer, want, 0);
    if (n <= 0) return false;
    out.append(buffer, static_cast<std::size_t>(n));
    return true;
}

bool Socket::write_all(std::string_view data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n <= 0) return false;
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

void Socket::close() noexcept {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

FrameStatus read_frame(Socket& socket, std::string& payload) {
    std::string buffer;
    // length prefix first, so an oversized frame is rejected unread
    while (buffer.size() < 4) {
        if (!socket.read_some(buffer, 4 - buffer.size())) return FrameStatus::Closed;
    }
    const auto b = [&](std::size_t i) {
        return static_cast<std::uint32_t>(static_cast<unsigned char>(buffer[i]));
    };
    const std::uint32_t len = (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
    if (len > wire::kMaxFrameBytes) return FrameStatus::TooLarge;
    while (buffer.size() < 4 + static_cast<std::size_t>(len)) {
        if (!socket.read_some(buffer, 4 + static_cast<std::size_t>(len) - buffer.size())) {
            return FrameStatus::Closed;
        }
    }
    payload.assign(buffer, 4, len);
    return FrameStatus::Ok;
}

bool write_frame(Socket& socket, std::string_view payload) {
    return socket.write_all(wire::encode_frame(payload));
}

Listener::~Listener() { close(); }

Listener::Listener(Listener&& other) noexcept : fd_(other.fd_), port_(other.port_) {
    other.fd_ = -1;
    other.port_ = 0;
}

Listener& Listener::operator=(Listener&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        port_ = other.port_;
        other.fd_ = -1;
        other.port_ = 0;
    }
    return *this;
}

Listener Listener::bind(const Address& address) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw Error(Errc::TransportError, "socket() failed");
    const int one = 1;
    setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(address.port);
    if (address.host == "0.0.0.0" || address.host.empty()) {
        addr.sin_addr.s_addr = INADDR_ANY;
    } else if (inet_pton(AF_INET, address.host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw Error(Errc::TransportError, "listen host must be an IPv4 address: " + address.host);
    }
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd);
        throw Error(Errc::TransportError,
                    "cannot bind " + address.host + ":" + std::to_string(address.port) + ": " +
                        std::strerror(errno));
    }
    if (::listen(fd, 64) != 0) {
        ::close(fd);
        throw Error(Errc::TransportError, "listen() failed");
    }
    sockaddr_in bound{};
    socklen_t bound_len = sizeof(bound);
    getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &bound_len);

    Listener listener;
    listener.fd_ = fd;
    listener.port_ = ntohs(bound.sin_port);
    return listener;
}

std::optional<Socket> Listener::accept(int timeout_ms) {
    if (fd_ < 0) return std::nullopt;
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, timeout_ms);
    if (ready <= 0 || (pfd.revents & POLLIN) == 0) return std::nullopt;
    const int client = ::accept(fd_, nullptr, nullptr);
    if (client < 0) return std::nullopt;
    return Socket(client);
}

void Listener::close() noexcept {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

std::optional<Socket> connect_to(const Address& address, int timeout_ms) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* result = nullptr;
    const std::string port = std::to_string(address.port);
    if (getaddrinfo(address.host.c_str(), port.c_str(), &hints, &result) != 0 ||
        result == nullptr) {
        return std::nullopt;
    }

    const int fd = ::socket(result->ai_family, result->ai_socktype, result->ai_protocol);
    if (fd < 0) {
        freeaddrinfo(result);
        return std::nullopt;
    }

    // non-blocking connect with a poll deadline
    const int flags = fcntl(fd, F_GETFL, 0);
    fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(fd, result->ai_addr, result->ai_addrlen);
    freeaddrinfo(result);
    if (rc != 0 && errno != EINPROGRESS) {
        ::close(fd);
        return std::nullopt;
    }
    if (rc != 0) {
        pollfd pfd{fd, POLLOUT, 0};
        if (::poll(&pfd, 1, timeout_ms) <= 0) {
            ::close(fd);
            return std::nullopt;
        }
        int err = 0;
        socklen_t len = sizeof(err);
        if (getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len) != 0 || err != 0) {
            ::close(fd);
            return std::nullopt;
        }
    }
    fcntl(fd, F_SETFL, flags);

    Socket socket(fd);
    socket.set_timeouts(timeout_ms);
    return socket;
}

}  // namespace abgp::node::net
