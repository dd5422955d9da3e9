// SPDX-License-Identifier: Apache-2.0
#include "coursecue/corpus.hpp"

#include <cctype>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "coursecue/error.hpp"
#include "coursecue/random.hpp"
#include "coursecue/text.hpp"

namespace coursecue {

using nlohmann::json;

struct Lecture::Cache {
  std::once_flag tokens_once;
  std::once_flag sentences_once;
  std::vector<std::string> tokens;
  std::vector<std::string> sentences;
};

Lecture::Lecture(std::string id, std::string text, int section_index, int position_in_section)
    : id_(std::move(id)),
      text_(std::move(text)),
      section_index_(section_index),
      position_(position_in_section),
      cache_(std::make_shared<Cache>()) {}

const std::vector<std::string>& Lecture::tokens() const {
  std::call_once(cache_->tokens_once, [this] { cache_->tokens = tokenize(text_); });
  return cache_->tokens;
}

const std::vector<std::string>& Lecture::sentences() const {
  std::call_once(cache_->sentences_once, [this] { cache_->sentences = split_sentences(text_); });
  return cache_->sentences;
}

std::size_t Course::lecture_count() const {
  std::size_t n = 0;
  for (const auto& s : sections) n += s.lectures.size();
  return n;
}

std::vector<const Lecture*> Course::lectures() const {
  std::vector<const Lecture*> out;
  out.reserve(lecture_count());
  for (const auto& s : sections) {
    for (const auto& l : s.lectures) out.push_back(&l);
  }
  return out;
}

Course make_course(std::string id, std::string title, std::vector<SectionDraft> sections,
                   std::optional<double> instructor_rating, std::optional<double> course_rating) {
  Course course;
  course.id = std::move(id);
  course.title = std::move(title);
  course.instructor_rating = instructor_rating;
  course.course_rating = course_rating;
  int section_index = 0;
  for (auto& draft : sections) {
    ++section_index;
    Section section;
    section.title = std::move(draft.title);
    int position = 0;
    for (auto& [lecture_id, text] : draft.lectures) {
      section.lectures.emplace_back(std::move(lecture_id), std::move(text), section_index, ++position);
    }
    course.sections.push_back(std::move(section));
  }
  return course;
}

Course make_course_from_texts(std::string id, const std::vector<std::vector<std::string>>& sections) {
  std::vector<SectionDraft> drafts;
  for (std::size_t s = 0; s < sections.size(); ++s) {
    SectionDraft draft;
    draft.title = "section " + std::to_string(s + 1);
    for (std::size_t l = 0; l < sections[s].size(); ++l) {
      draft.lectures.emplace_back(id + "-s" + std::to_string(s + 1) + "-l" + std::to_string(l + 1), sections[s][l]);
    }
    drafts.push_back(std::move(draft));
  }
  std::string title = id;
  return make_course(std::move(id), std::move(title), std::move(drafts));
}

namespace {

void check_rating(const std::optional<double>& rating, const char* name, const std::string& course) {
  if (rating && !(*rating >= 0.0 && *rating <= 5.0)) {
    std::ostringstream msg;
    msg << "course '" << course << "': " << name << " " << *rating << " outside [0, 5]";
    throw ValidationError(msg.str());
  }
}

bool is_blank(const std::string& s) {
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

void validate_course(const Course& course, bool require_nonempty_text) {
  if (course.id.empty()) throw ValidationError("course id is empty");
  if (course.sections.empty()) throw ValidationError("course '" + course.id + "' has no sections");
  check_rating(course.instructor_rating, "instructor_rating", course.id);
  check_rating(course.course_rating, "course_rating", course.id);
  std::set<std::string> ids;
  for (std::size_t s = 0; s < course.sections.size(); ++s) {
    const auto& section = course.sections[s];
    if (section.lectures.empty()) {
      throw ValidationError("course '" + course.id + "': section " + std::to_string(s + 1) + " has no lectures");
    }
    for (std::size_t p = 0; p < section.lectures.size(); ++p) {
      const Lecture& lecture = section.lectures[p];
      if (lecture.section_index() != static_cast<int>(s + 1) ||
          lecture.position_in_section() != static_cast<int>(p + 1)) {
        throw ValidationError("course '" + course.id + "': lecture '" + lecture.id() +
                              "' has indices inconsistent with document order");
      }
      if (require_nonempty_text && is_blank(lecture.text())) {
        throw ValidationError("course '" + course.id + "': lecture '" + lecture.id() + "' has empty text");
      }
      if (!ids.insert(lecture.id()).second) {
        throw ValidationError("course '" + course.id + "': duplicate lecture id '" + lecture.id() + "'");
      }
    }
  }
}

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw ValidationError("line " + std::to_string(line) + ": " + what);
}

std::string require_string(const json& obj, const char* key, std::size_t line, bool required = true) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) fail(line, std::string("missing field '") + key + "'");
    return {};
  }
  if (!it->is_string()) fail(line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::optional<double> optional_rating(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) fail(line, std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

void check_explicit_index(const json& obj, const char* key, int expected, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_number_integer() || it->get<long long>() != expected) {
    fail(line, std::string("explicit '") + key + "' disagrees with document order (expected " +
                   std::to_string(expected) + ")");
  }
}

}  // namespace

Course course_from_json(const json& record, std::size_t line) {
  if (!record.is_object()) fail(line, "record is not a JSON object");
  std::string id = require_string(record, "id", line);
  std::string title = require_string(record, "title", line, false);
  auto sections_it = record.find("sections");
  if (sections_it == record.end() || !sections_it->is_array()) fail(line, "missing array field 'sections'");

  std::vector<SectionDraft> drafts;
  int section_index = 0;
  for (const auto& section : *sections_it) {
    ++section_index;
    if (!section.is_object()) fail(line, "section is not an object");
    check_explicit_index(section, "index", section_index, line);
    SectionDraft draft;
    draft.title = require_string(section, "title", line, false);
    auto lectures_it = section.find("lectures");
    if (lectures_it == section.end() || !lectures_it->is_array()) fail(line, "section missing array 'lectures'");
    int position = 0;
    for (const auto& lecture : *lectures_it) {
      ++position;
      if (!lecture.is_object()) fail(line, "lecture is not an object");
      check_explicit_index(lecture, "section_index", section_index, line);
      check_explicit_index(lecture, "position_in_section", position, line);
      draft.lectures.emplace_back(require_string(lecture, "id", line), require_string(lecture, "text", line));
    }
    drafts.push_back(std::move(draft));
  }
  Course course = make_course(std::move(id), std::move(title), std::move(drafts),
                              optional_rating(record, "instructor_rating", line),
                              optional_rating(record, "course_rating", line));
  try {
    validate_course(course);
  } catch (const ValidationError& e) {
    fail(line, e.what());
  }
  return course;
}

json course_to_json(const Course& course) {
  json j;
  j["id"] = course.id;
  j["title"] = course.title;
  if (course.instructor_rating) j["instructor_rating"] = *course.instructor_rating;
  if (course.course_rating) j["course_rating"] = *course.course_rating;
  json sections = json::array();
  for (const auto& section : course.sections) {
    json lectures = json::array();
    for (const auto& lecture : section.lectures) {
      lectures.push_back({{"id", lecture.id()}, {"text", lecture.text()}});
    }
    sections.push_back({{"title", section.title}, {"lectures", std::move(lectures)}});
  }
  j["sections"] = std::move(sections);
  return j;
}

std::vector<Course> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open corpus file '" + path.string() + "'");
  std::vector<Course> courses;
  std::set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (is_blank(text)) continue;
    json record;
    try {
      record = json::parse(text);
    } catch (const json::parse_error& e) {
      fail(line, std::string("malformed JSON: ") + e.what());
    }
    Course course = course_from_json(record, line);
    if (!ids.insert(course.id).second) fail(line, "duplicate course id '" + course.id + "'");
    courses.push_back(std::move(course));
  }
  return courses;
}

void write_corpus(const std::filesystem::path& path, std::span<const Course> courses) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write corpus file '" + path.string() + "'");
  for (const auto& course : courses) out << course_to_json(course).dump() << '\n';
  if (!out) throw ValidationError("failed writing corpus file '" + path.string() + "'");
}

DatasetSplit split_dataset(std::span<const Course> courses, std::uint64_t seed) {
  if (courses.size() < 10) {
    throw ValidationError("split_dataset needs at least 10 courses, got " + std::to_string(courses.size()));
  }
  std::vector<std::string> ids;
  ids.reserve(courses.size());
  for (const auto& c : courses) ids.push_back(c.id);
  Rng rng(derive_seed(seed, "split"));
  rng.shuffle(ids);

  const std::size_t n = ids.size();
  const std::size_t n_val = n * 10 / 100;
  const std::size_t n_test = n * 20 / 100;
  const std::size_t n_train = n - n_val - n_test;

  DatasetSplit split;
  split.seed = seed;
  split.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.validation.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train),
                          ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), ids.end());
  return split;
}

json split_to_json(const DatasetSplit& split) {
  return {{"seed", split.seed}, {"train", split.train}, {"validation", split.validation}, {"test", split.test}};
}

DatasetSplit split_from_json(const json& j) {
  try {
    DatasetSplit split;
    split.seed = j.at("seed").get<std::uint64_t>();
    split.train = j.at("train").get<std::vector<std::string>>();
    split.validation = j.at("validation").get<std::vector<std::string>>();
    split.test = j.at("test").get<std::vector<std::string>>();
    return split;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed split file: ") + e.what());
  }
}

}  // namespace coursecue
