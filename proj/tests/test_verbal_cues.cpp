// SPDX-License-Identifier: Apache-2.0
#include "coursecue/verbal_cues.hpp"

#include <cmath>

#include "coursecue/corpus.hpp"
#include "coursecue/error.hpp"
#include "coursecue/lexicon.hpp"
#include "coursecue/structure.hpp"
#include "coursecue/text.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace coursecue;

namespace {

Course one_lecture(const std::string& text) { return make_course_from_texts("c", {{text}}); }

std::string repeat_word(const std::string& w, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += w + " ";
  return s;
}

}  // namespace

TEST_SUITE("lexicon") {
  TEST_CASE("entries are normalized and phrases matched greedily longest first") {
    const Lexicon lex("h", {"Kind Of", "kind", "a little bit", "a little"});
    const auto tokens = tokenize("a little bit kind of kind");
    const auto matches = lex.find_matches(tokens);
    REQUIRE(matches.size() == 3);
    CHECK(matches[0].start == 0);
    CHECK(matches[0].length == 3);
    CHECK(matches[1].start == 3);
    CHECK(matches[1].length == 2);
    CHECK(matches[2].start == 5);
    CHECK(matches[2].length == 1);
    CHECK(lex.max_phrase_length() == 3);
  }

  TEST_CASE("files skip comments and blank lines") {
    auto dir = testing::scratch("lexicon_file");
    testing::write_file(dir / "l.txt", "# header\nbasically\n\nsort of  # trailing comment\n");
    const Lexicon lex = Lexicon::load(dir / "l.txt");
    CHECK(lex.size() == 2);
    CHECK(lex.contains("basically"));
    const std::vector<std::string> phrase{"sort", "of"};
    CHECK(lex.contains(phrase));
  }

  TEST_CASE("emotion TSV supports multiple emotions per token and rejects unknown names") {
    auto dir = testing::scratch("emotion_file");
    testing::write_file(dir / "e.tsv", "hope\tjoy\nhope\tanticipation\nsad\tsadness\n");
    const EmotionLexicon lex = EmotionLexicon::load(dir / "e.tsv");
    CHECK(lex.emotions_of("hope") == ((1u << static_cast<int>(Emotion::Joy)) | (1u << static_cast<int>(Emotion::Anticipation))));
    CHECK(lex.single_emotion_tokens().size() == 1);
    testing::write_file(dir / "bad.tsv", "hope\tglee\n");
    CHECK_THROWS_WITH_AS(EmotionLexicon::load(dir / "bad.tsv"), doctest::Contains(":1:"), ValidationError);
  }

  TEST_CASE("a missing bundle file is named in the error") {
    auto dir = testing::scratch("bundle_missing");
    for (auto name : {"hedges.txt", "strong_modal.txt", "weak_modal.txt", "emotions.tsv"}) {
      testing::write_file(dir / name, "");
    }
    CHECK_THROWS_WITH_AS(LexiconBundle::load_directory(dir), doctest::Contains("gazetteer.txt"), ValidationError);
  }
}

TEST_SUITE("concreteness_ratio") {
  const Lexicon gazetteer("g", {"python", "numpy", "new york", "windows 95"});

  TEST_CASE("no entities and no numbers gives zero") { CHECK(concreteness_ratio(one_lecture("we learn things"), gazetteer) == 0.0); }

  TEST_CASE("two gazetteer hits over five tokens") {
    CHECK(concreteness_ratio(one_lecture("we use python and numpy"), gazetteer) == doctest::Approx(2.0 / 5.0));
  }

  TEST_CASE("numeric tokens count as entities") {
    CHECK(concreteness_ratio(one_lecture("founded in 1995"), gazetteer) == doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("multi-word entities count once and cover their numbers") {
    CHECK(concreteness_ratio(one_lecture("visit new york today"), gazetteer) == doctest::Approx(1.0 / 4.0));
    CHECK(concreteness_ratio(one_lecture("install windows 95 now"), gazetteer) == doctest::Approx(1.0 / 4.0));
  }

  TEST_CASE("empty course gives zero") {
    const Course empty = make_course("e", "", {SectionDraft{"s", {{"l", ""}}}});
    CHECK(concreteness_ratio(empty, gazetteer) == 0.0);
  }
}

TEST_SUITE("is_question") {
  TEST_CASE("rule a: trailing question mark") {
    CHECK(is_question("What is regression?"));
    CHECK(is_question("the model converges?"));
    CHECK(is_question("Right?\""));
  }

  TEST_CASE("declaratives are not questions") {
    CHECK_FALSE(is_question("This is a decision tree."));
    CHECK_FALSE(is_question("What a day."));
    CHECK_FALSE(is_question("How we train models matters."));
  }

  TEST_CASE("rule b: wh-word followed within three tokens by an auxiliary") {
    CHECK(is_question("Where do we go from here"));
    CHECK(is_question("How the model can learn"));
    CHECK_FALSE(is_question("How the big old model can learn"));
  }

  TEST_CASE("rule c: inverted yes/no question") {
    CHECK(is_question("Do you see the pattern"));
    CHECK(is_question("Could this work."));
  }

  TEST_CASE("every sentence ending in a question mark qualifies") {
    for (const char* s : {"x?", "Is it?", "a b c d e f?", "  spaced  ?  "}) CHECK(is_question(s));
  }
}

TEST_SUITE("question_ratio") {
  TEST_CASE("one question among three sentences") { CHECK(question_ratio(one_lecture("A. B? C!")) == doctest::Approx(1.0 / 3.0)); }

  TEST_CASE("all questions") { CHECK(question_ratio(one_lecture("Why? How so? Is it?")) == 1.0); }

  TEST_CASE("sentences are counted across lectures") {
    const Course c = make_course_from_texts("c", {{"One. Two?"}, {"Three. Four. Five?"}});
    CHECK(question_ratio(c) == doctest::Approx(2.0 / 5.0));
  }

  TEST_CASE("zero sentences gives zero and a warning") {
    testing::CapturedLog log;
    const Course empty = make_course("e", "", {SectionDraft{"s", {{"l", "   "}}}});
    CHECK(question_ratio(empty) == 0.0);
    CHECK(log.text.find("no sentences") != std::string::npos);
  }
}

TEST_SUITE("emotion_entropy") {
  EmotionLexicon lexicon() {
    EmotionLexicon lex;
    lex.add("glad", Emotion::Joy);
    lex.add("loyal", Emotion::Trust);
    for (std::size_t e = 0; e < kEmotionCount; ++e) lex.add("e" + std::to_string(e), static_cast<Emotion>(e));
    for (std::size_t e = 0; e < kEmotionCount; ++e) lex.add("omni", static_cast<Emotion>(e));
    return lex;
  }

  TEST_CASE("no emotion tokens gives zero") { CHECK(emotion_entropy(one_lecture("plain words only"), lexicon()) == 0.0); }

  TEST_CASE("four joy and four trust tokens among one hundred") {
    const std::string text = repeat_word("glad", 4) + repeat_word("loyal", 4) + repeat_word("filler", 92);
    const double expected = -2.0 * 0.04 * std::log(0.04);
    CHECK(expected == doctest::Approx(0.2575100659894).epsilon(1e-12));
    CHECK(emotion_entropy(one_lecture(text), lexicon()) == doctest::Approx(expected).epsilon(1e-14));
  }

  TEST_CASE("a single emotion on every token gives zero") { CHECK(emotion_entropy(one_lecture("glad glad glad"), lexicon()) == 0.0); }

  TEST_CASE("equal positive shares of all eight reach ln 8") {
    std::string text;
    for (std::size_t e = 0; e < kEmotionCount; ++e) text += "e" + std::to_string(e) + " ";
    CHECK(emotion_entropy(one_lecture(text), lexicon()) == doctest::Approx(std::log(8.0)).epsilon(1e-14));
  }

  TEST_CASE("unequal shares stay below ln 8") {
    std::string text;
    for (std::size_t e = 0; e < kEmotionCount; ++e) text += repeat_word("e" + std::to_string(e), e + 1);
    text += "filler filler";
    const double h = emotion_entropy(one_lecture(text), lexicon());
    CHECK(h > 0.0);
    CHECK(h < std::log(8.0));
  }

  TEST_CASE("a token carrying every emotion counts toward each dimension") {
    // r_i = 1/2 for all eight, so the sum is 8 * (1/2) ln 2 = 4 ln 2 > ln 8.
    CHECK(emotion_entropy(one_lecture("omni filler"), lexicon()) == doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-14));
  }

  TEST_CASE("empty course gives zero") {
    const Course empty = make_course("e", "", {SectionDraft{"s", {{"l", ""}}}});
    CHECK(emotion_entropy(empty, lexicon()) == 0.0);
  }
}

TEST_SUITE("lexicon_ratio") {
  const Lexicon hedges("hedges", {"basically", "kind of"});

  TEST_CASE("no matches") { CHECK(lexicon_ratio(one_lecture("nothing here"), hedges) == 0.0); }

  TEST_CASE("phrase and unigram over six tokens") {
    CHECK(lexicon_ratio(one_lecture("it is kind of basically simple"), hedges) == doctest::Approx(2.0 / 6.0));
  }

  TEST_CASE("a text that is a single hedge") { CHECK(lexicon_ratio(one_lecture("Basically."), hedges) == 1.0); }

  TEST_CASE("tokens inside a phrase match are not re-counted") {
    const Lexicon lex("l", {"kind", "kind of"});
    CHECK(lexicon_ratio(one_lecture("kind of kind"), lex) == doctest::Approx(2.0 / 3.0));
  }

  TEST_CASE("appending a matching term never lowers the match count") {
    std::string text = "we talk about models";
    std::size_t previous = 0;
    for (int i = 0; i < 5; ++i) {
      text += i % 2 ? " basically" : " kind of";
      const auto tokens = tokenize(text);
      const std::size_t matches = hedges.count_matches(tokens);
      CHECK(matches >= previous);
      previous = matches;
    }
    CHECK(previous == 5);
  }
}

TEST_SUITE("course_length") {
  TEST_CASE("empty course") {
    const Course empty = make_course("e", "", {SectionDraft{"s", {{"l", ""}}}});
    CHECK(course_length(empty) == 0);
  }
  TEST_CASE("sums lecture token counts") { CHECK(course_length(make_course_from_texts("c", {{"a b c", "d e f"}})) == 6); }
}

TEST_SUITE("extract_features") {
  TEST_CASE("empty-text course gives all zeros") {
    testing::QuietLog quiet;
    const Course empty = make_course("e", "", {SectionDraft{"s", {{"l", ""}}}});
    const FeatureVector f = extract_features(empty, testing::shipped_lexicons(), 0.0);
    CHECK(f == FeatureVector{});
  }

  TEST_CASE("duplicating every lecture keeps ratios and doubles length") {
    const auto courses = load_corpus(testing::fixture_dir() / "mini_corpus.jsonl");
    for (const Course& c : courses) {
      std::vector<SectionDraft> doubled;
      for (const auto& s : c.sections) {
        SectionDraft d{s.title, {}};
        for (const auto& l : s.lectures) {
          d.lectures.emplace_back(l.id() + "a", l.text());
          d.lectures.emplace_back(l.id() + "b", l.text());
        }
        doubled.push_back(std::move(d));
      }
      const Course twice = make_course(c.id, c.title, std::move(doubled));
      const FeatureVector a = extract_features(c, testing::shipped_lexicons(), 0.0);
      const FeatureVector b = extract_features(twice, testing::shipped_lexicons(), 0.0);
      CHECK(b.concreteness == doctest::Approx(a.concreteness).epsilon(1e-14));
      CHECK(b.questions == doctest::Approx(a.questions).epsilon(1e-14));
      CHECK(b.emotion_entropy == doctest::Approx(a.emotion_entropy).epsilon(1e-14));
      CHECK(b.hedging == doctest::Approx(a.hedging).epsilon(1e-14));
      CHECK(b.strong_modal == doctest::Approx(a.strong_modal).epsilon(1e-14));
      CHECK(b.weak_modal == doctest::Approx(a.weak_modal).epsilon(1e-14));
      CHECK(b.course_length == 2 * a.course_length);
    }
  }

  TEST_CASE("identical courses give identical vectors") {
    const auto courses = load_corpus(testing::fixture_dir() / "mini_corpus.jsonl");
    const auto again = load_corpus(testing::fixture_dir() / "mini_corpus.jsonl");
    for (std::size_t i = 0; i < courses.size(); ++i) {
      CHECK(extract_features(courses[i], testing::shipped_lexicons(), 0.5) ==
            extract_features(again[i], testing::shipped_lexicons(), 0.5));
    }
  }

  TEST_CASE("fixture course matches its frozen feature vector") {
    const auto courses = load_corpus(testing::fixture_dir() / "mini_corpus.jsonl");
    const Course& c = courses[0];
    const FeatureVector f = extract_features(c, testing::shipped_lexicons(), structure_quality(c));
    // Lexicon hits counted by hand against the shipped lists; structure
    // quality frozen from the first run.
    CHECK(f.concreteness == doctest::Approx(4.0 / 76.0).epsilon(1e-12));
    CHECK(f.questions == doctest::Approx(3.0 / 13.0).epsilon(1e-12));
    CHECK(f.emotion_entropy == doctest::Approx(-(2.0 / 76.0) * std::log(2.0 / 76.0)).epsilon(1e-12));
    CHECK(f.hedging == doctest::Approx(2.0 / 76.0).epsilon(1e-12));
    CHECK(f.strong_modal == doctest::Approx(3.0 / 76.0).epsilon(1e-12));
    CHECK(f.weak_modal == doctest::Approx(2.0 / 76.0).epsilon(1e-12));
    CHECK(f.course_length == 76);
    CHECK(f.structure_quality == doctest::Approx(-0.11928984536822453).epsilon(1e-10));
  }

  TEST_CASE("fixture hand counts agree with the frozen vector") {
    // intro-ml by hand: 13 sentences, 76 word tokens, 3 questions
    // ("What is..?", "Do you see.." and "How does..?").
    const auto courses = load_corpus(testing::fixture_dir() / "mini_corpus.jsonl");
    CHECK(question_ratio(courses[0]) == doctest::Approx(3.0 / 13.0));
    CHECK(course_length(courses[0]) == 76);
  }
}
