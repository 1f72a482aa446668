#include "patchpoison/log.hpp"

#include <cstdlib>
#include <iostream>
#include <string>

namespace patchpoison {

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("PATCHPOISON_LOG");
        const std::string v = env ? env : "";
        if (v == "error") return LogLevel::Error;
        if (v == "info") return LogLevel::Info;
        if (v == "debug") return LogLevel::Debug;
        return LogLevel::Warn;
    }();
    return level;
}

void log_message(LogLevel level, std::string_view msg) {
    if (static_cast<int>(level) > static_cast<int>(log_level())) return;
    static constexpr const char* kTags[] = {"error", "warn", "info", "debug"};
    std::cerr << "[" << kTags[static_cast<int>(level)] << "] " << msg << '\n';
}

}  // namespace patchpoison
