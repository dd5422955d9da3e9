// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace coursecue {

/// One lecture transcript. Text is immutable; tokens and sentences are
/// computed on first access and cached (thread-safe, computed once). Copies
/// share the cache.
class Lecture {
 public:
  Lecture(std::string id, std::string text, int section_index, int position_in_section);

  const std::string& id() const { return id_; }
  const std::string& text() const { return text_; }
  /// 1-based section index (s_ij).
  int section_index() const { return section_index_; }
  /// 1-based position within the section (pi_ij).
  int position_in_section() const { return position_; }

  const std::vector<std::string>& tokens() const;
  const std::vector<std::string>& sentences() const;

 private:
  struct Cache;
  std::string id_;
  std::string text_;
  int section_index_;
  int position_;
  std::shared_ptr<Cache> cache_;
};

struct Section {
  std::string title;
  std::vector<Lecture> lectures;
};

struct Course {
  std::string id;
  std::string title;
  std::vector<Section> sections;
  std::optional<double> instructor_rating;
  std::optional<double> course_rating;

  /// J_i.
  std::size_t lecture_count() const;
  /// Lectures in document order.
  std::vector<const Lecture*> lectures() const;
};

/// Text layout of a course used by builders: sections of (lecture id, text).
struct SectionDraft {
  std::string title;
  std::vector<std::pair<std::string, std::string>> lectures;
};

/// Builds a course and assigns section/position indices from document order.
Course make_course(std::string id, std::string title, std::vector<SectionDraft> sections,
                   std::optional<double> instructor_rating = std::nullopt,
                   std::optional<double> course_rating = std::nullopt);

/// Convenience: sections given as lists of texts; lecture ids are
/// "<course>-s<k>-l<j>".
Course make_course_from_texts(std::string id, const std::vector<std::vector<std::string>>& sections);

/// Throws ValidationError when a structural invariant is violated.
void validate_course(const Course& course, bool require_nonempty_text = true);

/// Parses one JSONL record. `line` is used in error messages.
Course course_from_json(const nlohmann::json& record, std::size_t line);
nlohmann::json course_to_json(const Course& course);

/// Reads a JSONL corpus. Errors name the offending (1-based) line.
std::vector<Course> load_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, std::span<const Course> courses);

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
};

/// Seeded shuffle then a 70/10/20 partition by course count. Validation and
/// test sizes are floor(10%) and floor(20%); train takes the remainder.
DatasetSplit split_dataset(std::span<const Course> courses, std::uint64_t seed);

nlohmann::json split_to_json(const DatasetSplit& split);
DatasetSplit split_from_json(const nlohmann::json& j);

}  // namespace coursecue
