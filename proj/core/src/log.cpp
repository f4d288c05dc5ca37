#include "abgp/log.hpp"

#include "abgp/errors.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace abgp::log {

namespace {

Level threshold_from_env() noexcept {
    const char* v = std::getenv("ABGP_LOG");
    if (v == nullptr) return Level::Warn;
    if (std::strcmp(v, "error") == 0) return Level::Error;
    if (std::strcmp(v, "warn") == 0) return Level::Warn;
    if (std::strcmp(v, "info") == 0) return Level::Info;
    if (std::strcmp(v, "debug") == 0) return Level::Debug;
    return Level::Warn;
}

Level threshold() noexcept {
    static const Level t = threshold_from_env();
    return t;
}

const char* level_tag(Level level) noexcept {
    switch (level) {
        case Level::Error: return "error";
        case Level::Warn: return "warn";
        case Level::Info: return "info";
        case Level::Debug: return "debug";
    }
    return "?";
}

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

bool enabled(Level level) noexcept { return static_cast<int>(level) <= static_cast<int>(threshold()); }

void write(Level level, const std::string& message) {
    std::lock_guard<std::mutex> lock(sink_mutex());
    std::fprintf(stderr, "[abgp %s] %s\n", level_tag(level), message.c_str());
    std::fflush(stderr);
}

}  // namespace abgp::log

namespace abgp {

const char* errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::InvalidDigest: return "InvalidDigest";
        case Errc::InvalidKey: return "InvalidKey";
        case Errc::EmptyAggregate: return "EmptyAggregate";
        case Errc::QuorumNotReached: return "QuorumNotReached";
        case Errc::DuplicateRecord: return "DuplicateRecord";
        case Errc::InternalError: return "InternalError";
        case Errc::NoPeers: return "NoPeers";
        case Errc::UnknownSigner: return "UnknownSigner";
        case Errc::BadBitmap: return "BadBitmap";
        case Errc::ConfigError: return "ConfigError";
        case Errc::TransportError: return "TransportError";
        case Errc::ProtocolError: return "ProtocolError";
    }
    return "UnknownError";
}

}  // namespace abgp
