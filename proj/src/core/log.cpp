#include "remi/core/log.hpp"

#include "remi/core/clock.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>
#include <string>

namespace remi::log {

namespace {
std::atomic<Level> g_level{Level::warn};
std::mutex g_mutex;

const char* name_of(Level l) {
    switch (l) {
        case Level::debug: return "DEBUG";
        case Level::info: return "INFO";
        case Level::warn: return "WARN";
        case Level::error: return "ERROR";
        case Level::off: return "OFF";
    }
    return "?";
}
}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

Level parse_level(std::string_view name) {
    if (name == "debug") return Level::debug;
    if (name == "warn" || name == "warning") return Level::warn;
    if (name == "error") return Level::error;
    if (name == "off" || name == "none") return Level::off;
    return Level::info;
}

void write(Level level, std::string_view component, std::string_view message) {
    if (level < g_level.load() || level == Level::off) return;
    auto stamp = format_timestamp(SystemClock().now());
    std::lock_guard lock(g_mutex);
    std::fprintf(stderr, "%s %-5s [%.*s] %.*s\n", stamp.c_str(), name_of(level), static_cast<int>(component.size()),
                 component.data(), static_cast<int>(message.size()), message.data());
}

}  // namespace remi::log
