// SPDX-License-Identifier: Apache-2.0
#include "coursecue/text.hpp"

#include <string>
#include <vector>

#include "doctest.h"

using coursecue::is_numeric_token;
using coursecue::split_sentences;
using coursecue::tokenize;
using Strings = std::vector<std::string>;

TEST_SUITE("tokenize") {
  TEST_CASE("empty input gives no tokens") {
    CHECK(tokenize("").empty());
    CHECK(tokenize("   \t\n").empty());
  }

  TEST_CASE("lowercases and splits on whitespace") {
    CHECK(tokenize("Machine Learning With Python") == Strings{"machine", "learning", "with", "python"});
  }

  TEST_CASE("strips outer punctuation and keeps inner apostrophes") {
    CHECK(tokenize("It's kind of easy.") == Strings{"it's", "kind", "of", "easy"});
    CHECK(tokenize("(well-known), \"quoted\"!") == Strings{"well-known", "quoted"});
  }

  TEST_CASE("pure punctuation is dropped") { CHECK(tokenize("-- ... ? !") .empty()); }

  TEST_CASE("non-ASCII bytes are word characters") {
    CHECK(tokenize("Caf\xC3\xA9 na\xC3\xAFve.") == Strings{"caf\xC3\xA9", "na\xC3\xAFve"});
  }

  TEST_CASE("idempotent on punctuation-free text") {
    const Strings tokens = tokenize("Alpha beta GAMMA delta's x-ray 42");
    std::string joined;
    for (const auto& t : tokens) joined += t + " ";
    CHECK(tokenize(joined) == tokens);
  }

  TEST_CASE("deterministic") { CHECK(tokenize("Same text, same tokens.") == tokenize("Same text, same tokens.")); }
}

TEST_SUITE("split_sentences") {
  TEST_CASE("splits on terminal punctuation followed by whitespace or end") {
    CHECK(split_sentences("A. B? C!") == Strings{"A.", "B?", "C!"});
  }

  TEST_CASE("empty input gives no sentences") {
    CHECK(split_sentences("").empty());
    CHECK(split_sentences("  ").empty());
  }

  TEST_CASE("abbreviations from the stop-list do not end a sentence") {
    CHECK(split_sentences("e.g. we train") == Strings{"e.g. we train"});
    CHECK(split_sentences("Ask Dr. Smith. Then go.") == Strings{"Ask Dr. Smith.", "Then go."});
  }

  TEST_CASE("decimal points and inner dots are not boundaries") {
    CHECK(split_sentences("Pi is 3.14 roughly. Yes") == Strings{"Pi is 3.14 roughly.", "Yes"});
  }

  TEST_CASE("delimiter runs and closing quotes stay with their sentence") {
    CHECK(split_sentences("Really?! \"Yes.\" Fine") == Strings{"Really?!", "\"Yes.\"", "Fine"});
  }

  TEST_CASE("text without delimiter is one sentence") { CHECK(split_sentences("no end here") == Strings{"no end here"}); }
}

TEST_CASE("numeric tokens need a digit and only numeric punctuation") {
  CHECK(is_numeric_token("1995"));
  CHECK(is_numeric_token("3.5"));
  CHECK(is_numeric_token("50%"));
  CHECK(is_numeric_token("2020-2021"));
  CHECK_FALSE(is_numeric_token("abc"));
  CHECK_FALSE(is_numeric_token("b2b"));
  CHECK_FALSE(is_numeric_token("--"));
}
