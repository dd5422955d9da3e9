// SPDX-License-Identifier: Apache-2.0
#include "coursecue/log.hpp"

#include <iostream>
#include <mutex>

namespace coursecue {
namespace {

std::mutex g_mutex;
LogLevel g_level = LogLevel::Warning;
LogSink g_sink;

const char* level_name(LogLevel level) {
  switch (level) {
    case LogLevel::Debug: return "debug";
    case LogLevel::Info: return "info";
    case LogLevel::Warning: return "warning";
    case LogLevel::Error: return "error";
    case LogLevel::Off: break;
  }
  return "";
}

}  // namespace

void set_log_level(LogLevel level) {
  std::lock_guard lock(g_mutex);
  g_level = level;
}

LogLevel log_level() {
  std::lock_guard lock(g_mutex);
  return g_level;
}

void set_log_sink(LogSink sink) {
  std::lock_guard lock(g_mutex);
  g_sink = std::move(sink);
}

void log_message(LogLevel level, std::string_view message) {
  std::lock_guard lock(g_mutex);
  if (level < g_level || level == LogLevel::Off) return;
  if (g_sink) {
    g_sink(level, message);
  } else {
    std::cerr << "[" << level_name(level) << "] " << message << '\n';
  }
}

}  // namespace coursecue
