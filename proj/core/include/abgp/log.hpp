#pragma once

#include <sstream>
#include <string>

namespace abgp::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Threshold comes from the ABGP_LOG env var (error|warn|info|debug),
/// read once. Default: warn.
bool enabled(Level level) noexcept;

void write(Level level, const std::string& message);

}  // namespace abgp::log

#define ABGP_LOG_AT(lvl, expr)                          \
    do {                                                \
        if (::abgp::log::enabled(lvl)) {                \
            std::ostringstream abgp_log_os_;            \
            abgp_log_os_ << expr;                       \
            ::abgp::log::write(lvl, abgp_log_os_.str()); \
        }                                               \
    } while (0)

#define ABGP_LOG_ERROR(expr) ABGP_LOG_AT(::abgp::log::Level::Error, expr)
#define ABGP_LOG_WARN(expr) ABGP_LOG_AT(::abgp::log::Level::Warn, expr)
#define ABGP_LOG_INFO(expr) ABGP_LOG_AT(::abgp::log::Level::Info, expr)
#define ABGP_LOG_DEBUG(expr) ABGP_LOG_AT(::abgp::log::Level::Debug, expr)
