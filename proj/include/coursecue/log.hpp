// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string_view>

namespace coursecue {

enum class LogLevel { Debug, Info, Warning, Error, Off };

using LogSink = std::function<void(LogLevel, std::string_view)>;

void set_log_level(LogLevel level);
LogLevel log_level();

/// Replaces the sink (default writes to stderr). Passing an empty function
/// restores the default.
void set_log_sink(LogSink sink);

void log_message(LogLevel level, std::string_view message);

inline void log_info(std::string_view message) { log_message(LogLevel::Info, message); }
inline void log_warning(std::string_view message) { log_message(LogLevel::Warning, message); }

}  // namespace coursecue
