// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coursecue/corpus.hpp"
#include "coursecue/structure.hpp"
#include "coursecue/verbal_cues.hpp"

namespace coursecue {

enum class Target { Instructor, Course };

Target parse_target(std::string_view name);
std::string_view target_name(Target target);

/// Extracted features of one course together with its labels.
struct FeatureRecord {
  std::string course_id;
  FeatureVector features;
  std::optional<double> instructor_rating;
  std::optional<double> course_rating;

  std::optional<double> rating(Target target) const {
    return target == Target::Instructor ? instructor_rating : course_rating;
  }
};

FeatureRecord compute_feature_record(const Course& course, const LexiconBundle& lexicons,
                                     const LectureEmbedder& embedder);

/// Extracts every course, optionally on a worker pool; output order follows
/// the input.
std::vector<FeatureRecord> compute_feature_table(std::span<const Course> courses, const LexiconBundle& lexicons,
                                                 const LectureEmbedder& embedder, std::size_t threads = 1);

/// Header: course_id, the eight feature names, instructor_rating,
/// course_rating. Absent ratings are empty cells.
std::string feature_table_csv(std::span<const FeatureRecord> records);
void write_feature_table(const std::filesystem::path& path, std::span<const FeatureRecord> records);
std::vector<FeatureRecord> read_feature_table(const std::filesystem::path& path);

}  // namespace coursecue
