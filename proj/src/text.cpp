// SPDX-License-Identifier: Apache-2.0
#include "coursecue/text.hpp"

#include <algorithm>
#include <cctype>

namespace coursecue {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Bytes >= 0x80 belong to UTF-8 sequences and are treated as word characters.
bool is_punct(char c) {
  auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) != 0;
}

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}'; }

bool is_delimiter(char c) { return c == '.' || c == '?' || c == '!'; }

std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    auto u = static_cast<unsigned char>(c);
    if (u < 0x80) c = static_cast<char>(std::tolower(u));
  }
  return out;
}

bool ends_with_abbreviation(std::string_view text, std::size_t dot) {
  std::size_t start = dot;
  while (start > 0 && !is_space(text[start - 1])) --start;
  std::string word = lower(text.substr(start, dot - start + 1));
  while (!word.empty() && (word.front() == '(' || word.front() == '[' || word.front() == '"')) {
    word.erase(word.begin());
  }
  const auto& abbreviations = sentence_abbreviations();
  return std::find(abbreviations.begin(), abbreviations.end(), word) != abbreviations.end();
}

}  // namespace

const std::vector<std::string>& sentence_abbreviations() {
  static const std::vector<std::string> list = {"e.g.", "i.e.", "etc.", "dr.",  "mr.",  "mrs.",
                                                "ms.",  "prof.", "vs.",  "cf.",  "fig.", "approx."};
  return list;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < n && !is_space(text[j])) ++j;
    std::size_t b = i, e = j;
    while (b < e && is_punct(text[b])) ++b;
    while (e > b && is_punct(text[e - 1])) --e;
    if (e > b) tokens.push_back(lower(text.substr(b, e - b)));
    i = j;
  }
  return tokens;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  std::size_t start = 0;
  const std::size_t n = text.size();
  auto emit = [&](std::size_t end) {
    std::string_view piece = trim(text.substr(start, end - start));
    if (!piece.empty()) sentences.emplace_back(piece);
    start = end;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_delimiter(text[i])) continue;
    std::size_t k = i + 1;
    while (k < n && (is_delimiter(text[k]) || is_closer(text[k]))) ++k;
    if (k < n && !is_space(text[k])) {
      i = k - 1;
      continue;
    }
    // A lone period closing an abbreviation does not end the sentence.
    if (text[i] == '.' && k == i + 1 && k < n && ends_with_abbreviation(text, i)) continue;
    emit(k);
    i = k - 1;
  }
  emit(n);
  return sentences;
}

bool is_numeric_token(std::string_view token) {
  bool digit = false;
  for (char c : token) {
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if (c != '.' && c != ',' && c != ':' && c != '/' && c != '%' && c != '-') {
      return false;
    }
  }
  return digit;
}

}  // namespace coursecue
