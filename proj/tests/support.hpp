// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "coursecue/log.hpp"
#include "coursecue/verbal_cues.hpp"

namespace testing {

inline std::filesystem::path data_dir() { return COURSECUE_DATA_DIR; }
inline std::filesystem::path fixture_dir() { return COURSECUE_FIXTURE_DIR; }

/// Fresh scratch directory per name.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::path(COURSECUE_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline const coursecue::LexiconBundle& shipped_lexicons() {
  static const coursecue::LexiconBundle bundle = coursecue::LexiconBundle::load_directory(data_dir() / "lexicons");
  return bundle;
}

/// Silences warnings for the lifetime of the guard.
struct QuietLog {
  coursecue::LogLevel saved = coursecue::log_level();
  QuietLog() { coursecue::set_log_level(coursecue::LogLevel::Error); }
  ~QuietLog() { coursecue::set_log_level(saved); }
};

/// Collects log messages for the lifetime of the guard.
struct CapturedLog {
  std::string text;
  CapturedLog() {
    coursecue::set_log_sink([this](coursecue::LogLevel, std::string_view m) {
      text += std::string(m);
      text += '\n';
    });
  }
  ~CapturedLog() { coursecue::set_log_sink({}); }
};

}  // namespace testing
