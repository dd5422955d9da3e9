// SPDX-License-Identifier: Apache-2.0
#include "coursecue/feature_table.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <fstream>
#include <sstream>
#include <thread>

#include "coursecue/csv.hpp"
#include "coursecue/error.hpp"

namespace coursecue {

namespace csv {

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace csv

Target parse_target(std::string_view name) {
  if (name == "instructor") return Target::Instructor;
  if (name == "course") return Target::Course;
  throw ValidationError("unknown target '" + std::string(name) + "' (expected instructor|course)");
}

std::string_view target_name(Target target) {
  return target == Target::Instructor ? "instructor" : "course";
}

FeatureRecord compute_feature_record(const Course& course, const LexiconBundle& lexicons,
                                     const LectureEmbedder& embedder) {
  FeatureRecord record;
  record.course_id = course.id;
  record.features = extract_features(course, lexicons, structure_quality(course, embedder));
  record.instructor_rating = course.instructor_rating;
  record.course_rating = course.course_rating;
  return record;
}

std::vector<FeatureRecord> compute_feature_table(std::span<const Course> courses, const LexiconBundle& lexicons,
                                                 const LectureEmbedder& embedder, std::size_t threads) {
  std::vector<FeatureRecord> out(courses.size());
  if (threads <= 1 || courses.size() < 2) {
    for (std::size_t i = 0; i < courses.size(); ++i) out[i] = compute_feature_record(courses[i], lexicons, embedder);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, courses.size()); ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= courses.size()) return;
        try {
          out[i] = compute_feature_record(courses[i], lexicons, embedder);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(courses.size());
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

std::string feature_table_csv(std::span<const FeatureRecord> records) {
  std::ostringstream out;
  out << "course_id";
  for (auto name : kFeatureNames) out << ',' << name;
  out << ",instructor_rating,course_rating\n";
  for (const auto& r : records) {
    out << csv::escape(r.course_id);
    auto values = r.features.to_array();
    for (std::size_t i = 0; i < kFeatureCount; ++i) out << ',' << csv::format_double(values[i]);
    out << ',' << (r.instructor_rating ? csv::format_double(*r.instructor_rating) : "");
    out << ',' << (r.course_rating ? csv::format_double(*r.course_rating) : "");
    out << '\n';
  }
  return out.str();
}

void write_feature_table(const std::filesystem::path& path, std::span<const FeatureRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write features file '" + path.string() + "'");
  out << feature_table_csv(records);
}

namespace {

double parse_number(const std::string& field, std::size_t line, std::string_view column) {
  try {
    std::size_t used = 0;
    double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("features file line " + std::to_string(line) + ": column '" + std::string(column) +
                          "' is not a number: '" + field + "'");
  }
}

}  // namespace

std::vector<FeatureRecord> read_feature_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open features file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("features file '" + path.string() + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = csv::split_line(line);
  const std::size_t expected_columns = kFeatureCount + 3;
  bool header_ok = header.size() == expected_columns && header.front() == "course_id" &&
                   header[kFeatureCount + 1] == "instructor_rating" && header[kFeatureCount + 2] == "course_rating";
  for (std::size_t i = 0; header_ok && i < kFeatureCount; ++i) header_ok = header[i + 1] == kFeatureNames[i];
  if (!header_ok) throw ValidationError("features file '" + path.string() + "' has an unexpected header");

  std::vector<FeatureRecord> records;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = csv::split_line(line);
    if (fields.size() != expected_columns) {
      throw ValidationError("features file line " + std::to_string(number) + ": expected " +
                            std::to_string(expected_columns) + " columns");
    }
    FeatureRecord r;
    r.course_id = fields[0];
    std::array<double, kFeatureCount> values{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) values[i] = parse_number(fields[i + 1], number, kFeatureNames[i]);
    r.features = FeatureVector::from_array(values);
    if (!fields[kFeatureCount + 1].empty()) {
      r.instructor_rating = parse_number(fields[kFeatureCount + 1], number, "instructor_rating");
    }
    if (!fields[kFeatureCount + 2].empty()) {
      r.course_rating = parse_number(fields[kFeatureCount + 2], number, "course_rating");
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace coursecue
