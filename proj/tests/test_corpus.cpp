// SPDX-License-Identifier: Apache-2.0
#include "coursecue/corpus.hpp"

#include <algorithm>
#include <set>
#include <thread>

#include "coursecue/error.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace coursecue;

namespace {

std::string two_by_two_record() {
  return R"({"id":"c1","title":"T","instructor_rating":4.5,"sections":[)"
         R"({"title":"S1","lectures":[{"id":"a","text":"One two."},{"id":"b","text":"Three four."}]},)"
         R"({"title":"S2","lectures":[{"id":"c","text":"Five six."},{"id":"d","text":"Seven eight."}]}]})";
}

std::vector<Course> numbered_courses(std::size_t n) {
  std::vector<Course> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(make_course_from_texts("c" + std::to_string(i), {{"text"}}));
  return out;
}

}  // namespace

TEST_SUITE("load_corpus") {
  TEST_CASE("indices follow document order") {
    auto dir = testing::scratch("corpus_order");
    testing::write_file(dir / "c.jsonl", two_by_two_record() + "\n");
    const auto courses = load_corpus(dir / "c.jsonl");
    REQUIRE(courses.size() == 1);
    const Course& c = courses[0];
    CHECK(c.lecture_count() == 4);
    std::vector<int> s, p;
    for (const Lecture* l : c.lectures()) {
      s.push_back(l->section_index());
      p.push_back(l->position_in_section());
    }
    CHECK(s == std::vector<int>{1, 1, 2, 2});
    CHECK(p == std::vector<int>{1, 2, 1, 2});
    CHECK(c.instructor_rating == doctest::Approx(4.5));
    CHECK_FALSE(c.course_rating.has_value());
  }

  TEST_CASE("rating above 5 is rejected with its line number") {
    auto dir = testing::scratch("corpus_rating");
    std::string bad = two_by_two_record();
    bad.replace(bad.find("4.5"), 3, "5.1");
    testing::write_file(dir / "c.jsonl", two_by_two_record() + "\n" + bad + "\n");
    try {
      load_corpus(dir / "c.jsonl");
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("line 2") != std::string::npos);
      CHECK(msg.find("outside [0, 5]") != std::string::npos);
    }
  }

  TEST_CASE("empty lecture text is rejected") {
    auto dir = testing::scratch("corpus_empty_text");
    std::string bad = two_by_two_record();
    bad.replace(bad.find("One two."), 8, "   ");
    testing::write_file(dir / "c.jsonl", bad + "\n");
    CHECK_THROWS_AS(load_corpus(dir / "c.jsonl"), ValidationError);
  }

  TEST_CASE("malformed JSON names the line") {
    auto dir = testing::scratch("corpus_malformed");
    testing::write_file(dir / "c.jsonl", two_by_two_record() + "\n\n{not json\n");
    CHECK_THROWS_WITH_AS(load_corpus(dir / "c.jsonl"), doctest::Contains("line 3"), ValidationError);
  }

  TEST_CASE("explicit indices must agree with document order") {
    auto dir = testing::scratch("corpus_explicit");
    std::string ok = two_by_two_record();
    ok.replace(ok.find(R"("id":"b")"), 8, R"("id":"b","position_in_section":2)");
    testing::write_file(dir / "ok.jsonl", ok + "\n");
    CHECK(load_corpus(dir / "ok.jsonl").size() == 1);

    std::string bad = two_by_two_record();
    bad.replace(bad.find(R"("id":"b")"), 8, R"("id":"b","position_in_section":3)");
    testing::write_file(dir / "bad.jsonl", bad + "\n");
    CHECK_THROWS_WITH_AS(load_corpus(dir / "bad.jsonl"), doctest::Contains("position_in_section"), ValidationError);
  }

  TEST_CASE("duplicate course ids are rejected") {
    auto dir = testing::scratch("corpus_dup");
    testing::write_file(dir / "c.jsonl", two_by_two_record() + "\n" + two_by_two_record() + "\n");
    CHECK_THROWS_AS(load_corpus(dir / "c.jsonl"), ValidationError);
  }

  TEST_CASE("section sizes sum to the lecture count") {
    const Course c = make_course_from_texts("x", {{"a", "b", "c"}, {"d"}, {"e", "f"}});
    std::size_t total = 0;
    for (const auto& s : c.sections) total += s.lectures.size();
    CHECK(total == c.lecture_count());
    CHECK(c.lecture_count() == 6);
  }

  TEST_CASE("write then load preserves structure") {
    auto dir = testing::scratch("corpus_roundtrip");
    testing::write_file(dir / "c.jsonl", two_by_two_record() + "\n");
    const auto first = load_corpus(dir / "c.jsonl");
    write_corpus(dir / "d.jsonl", first);
    const auto second = load_corpus(dir / "d.jsonl");
    CHECK(course_to_json(first[0]) == course_to_json(second[0]));
  }
}

TEST_SUITE("lecture caches") {
  TEST_CASE("tokens and sentences are computed once and shared by copies") {
    const Lecture lecture("l", "Hello there. General Kenobi?", 1, 1);
    const Lecture copy = lecture;
    CHECK(&lecture.tokens() == &copy.tokens());
    CHECK(lecture.tokens() == std::vector<std::string>{"hello", "there", "general", "kenobi"});
    CHECK(lecture.sentences().size() == 2);
  }

  TEST_CASE("concurrent first access yields one consistent cache") {
    const Lecture lecture("l", "alpha beta gamma. delta!", 1, 1);
    std::vector<const std::vector<std::string>*> seen(8);
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < seen.size(); ++i) pool.emplace_back([&, i] { seen[i] = &lecture.tokens(); });
    for (auto& t : pool) t.join();
    CHECK(std::all_of(seen.begin(), seen.end(), [&](auto* p) { return p == seen[0]; }));
  }
}

TEST_SUITE("split_dataset") {
  TEST_CASE("ten courses split 7/1/2") {
    const auto split = split_dataset(numbered_courses(10), 3);
    CHECK(split.train.size() == 7);
    CHECK(split.validation.size() == 1);
    CHECK(split.test.size() == 2);
  }

  TEST_CASE("1085 courses split 760/108/217") {
    const auto split = split_dataset(numbered_courses(1085), 3);
    CHECK(split.train.size() == 760);
    CHECK(split.validation.size() == 108);
    CHECK(split.test.size() == 217);
  }

  TEST_CASE("fewer than ten courses is an error") {
    CHECK_THROWS_AS(split_dataset(numbered_courses(9), 0), ValidationError);
  }

  TEST_CASE("same seed gives the same split, other seeds differ") {
    const auto courses = numbered_courses(50);
    const auto a = split_dataset(courses, 42);
    const auto b = split_dataset(courses, 42);
    const auto c = split_dataset(courses, 43);
    CHECK(a.train == b.train);
    CHECK(a.validation == b.validation);
    CHECK(a.test == b.test);
    CHECK(a.train != c.train);
  }

  TEST_CASE("partition is exhaustive, disjoint and near 70/10/20") {
    for (std::size_t n : {10u, 11u, 19u, 37u, 100u, 503u}) {
      const auto courses = numbered_courses(n);
      const auto split = split_dataset(courses, n);
      std::set<std::string> all;
      all.insert(split.train.begin(), split.train.end());
      all.insert(split.validation.begin(), split.validation.end());
      all.insert(split.test.begin(), split.test.end());
      CHECK(all.size() == n);
      CHECK(split.train.size() + split.validation.size() + split.test.size() == n);
      const double dn = static_cast<double>(n);
      CHECK(std::abs(static_cast<double>(split.validation.size()) - 0.1 * dn) < 1.0);
      CHECK(std::abs(static_cast<double>(split.test.size()) - 0.2 * dn) < 1.0);
      CHECK(std::abs(static_cast<double>(split.train.size()) - 0.7 * dn) <= 2.0);
    }
  }

  TEST_CASE("split JSON round-trips") {
    const auto split = split_dataset(numbered_courses(20), 9);
    const auto back = split_from_json(split_to_json(split));
    CHECK(back.train == split.train);
    CHECK(back.validation == split.validation);
    CHECK(back.test == split.test);
    CHECK(back.seed == split.seed);
  }
}
