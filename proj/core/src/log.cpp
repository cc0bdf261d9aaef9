#include "viewgraph/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace viewgraph::log {
namespace {

Level parse(const char* value) {
    if (value == nullptr) return Level::warn;
    const std::string v(value);
    if (v == "error") return Level::error;
    if (v == "info") return Level::info;
    if (v == "debug") return Level::debug;
    return Level::warn;
}

constexpr const char* kNames[] = {"error", "warn", "info", "debug"};

}  // namespace

Level threshold() {
    static const Level level = parse(std::getenv("THREEDVG_LOG"));
    return level;
}

void write(Level level, std::string_view message) {
    if (static_cast<int>(level) > static_cast<int>(threshold())) return;
    static std::mutex mu;
    std::lock_guard lock(mu);
    std::cerr << "[viewgraph " << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace viewgraph::log
