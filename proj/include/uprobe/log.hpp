#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The unlearn-probe Authors

// Minimal stderr logger. Verbosity comes from UNLEARN_PROBE_LOG
// (error|warn|info|debug, or 0..3); default is warn.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>

namespace uprobe::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

inline Level level_from_env() {
    const char* raw = std::getenv("UNLEARN_PROBE_LOG");
    if (!raw) return Level::warn;
    std::string_view v(raw);
    if (v == "error" || v == "0") return Level::error;
    if (v == "warn" || v == "1") return Level::warn;
    if (v == "info" || v == "2") return Level::info;
    if (v == "debug" || v == "3") return Level::debug;
    return Level::warn;
}

inline Level level() {
    static const Level lvl = level_from_env();
    return lvl;
}

inline void write(Level lvl, const char* tag, const std::string& msg) {
    if (static_cast<int>(lvl) > static_cast<int>(level())) return;
    std::fprintf(stderr, "[unlearn-probe] %s: %s\n", tag, msg.c_str());
}

inline void error(const std::string& msg) { write(Level::error, "error", msg); }
inline void warn(const std::string& msg) { write(Level::warn, "warn", msg); }
inline void info(const std::string& msg) { write(Level::info, "info", msg); }
inline void debug(const std::string& msg) { write(Level::debug, "debug", msg); }

}  // namespace uprobe::log
