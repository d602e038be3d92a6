#include "crown/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>

#include <cstdlib>
#include <string_view>

namespace crown::log {

spdlog::logger& logger() {
    static auto instance = [] {
        auto l = spdlog::stderr_logger_mt("crown");
        l->set_pattern("[%H:%M:%S] [%l] %v");
        l->set_level(spdlog::level::warn);
        return l;
    }();
    return *instance;
}

void configure_from_env() {
    const char* raw = std::getenv("CROWN_LOG");
    if (raw == nullptr) return;
    const std::string_view level(raw);
    if (level == "error") {
        logger().set_level(spdlog::level::err);
    } else if (level == "info") {
        logger().set_level(spdlog::level::info);
    } else if (level == "debug") {
        logger().set_level(spdlog::level::debug);
    } else {
        logger().warn("ignoring unknown CROWN_LOG value '{}'", level);
    }
}

}  // namespace crown::log
