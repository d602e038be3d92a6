#pragma once

#include <spdlog/spdlog.h>

#include <utility>

namespace crown::log {

/// Shared stderr logger; results never go through it.
spdlog::logger& logger();

/// Applies CROWN_LOG={error,info,debug} (default: warn).
void configure_from_env();

template <typename Fmt, typename... Args>
void debug(const Fmt& fmt, Args&&... args) {
    logger().debug(fmt::runtime(fmt), std::forward<Args>(args)...);
}
template <typename Fmt, typename... Args>
void info(const Fmt& fmt, Args&&... args) {
    logger().info(fmt::runtime(fmt), std::forward<Args>(args)...);
}
template <typename Fmt, typename... Args>
void warn(const Fmt& fmt, Args&&... args) {
    logger().warn(fmt::runtime(fmt), std::forward<Args>(args)...);
}
template <typename Fmt, typename... Args>
void error(const Fmt& fmt, Args&&... args) {
    logger().error(fmt::runtime(fmt), std::forward<Args>(args)...);
}

}  // namespace crown::log
