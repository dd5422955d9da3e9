// SPDX-License-Identifier: Apache-2.0
#include "coursecue/lexicon.hpp"

#include <algorithm>
#include <fstream>

#include "coursecue/error.hpp"
#include "coursecue/text.hpp"

namespace coursecue {
namespace {

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

}  // namespace

std::string Lexicon::join(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back('\x1f');
    out += tokens[i];
  }
  return out;
}

Lexicon::Lexicon(std::string name, const std::vector<std::string>& entries) : name_(std::move(name)) {
  for (const auto& entry : entries) {
    auto tokens = tokenize(entry);
    if (tokens.empty()) continue;
    if (tokens.size() == 1) {
      unigrams_.insert(tokens.front());
    } else {
      phrases_.insert(join(tokens));
      phrase_starts_.insert(tokens.front());
    }
    max_length_ = std::max(max_length_, tokens.size());
  }
}

Lexicon Lexicon::load(const std::filesystem::path& path, std::string name) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open lexicon file '" + path.string() + "'");
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) entries.push_back(strip_comment(line));
  if (name.empty()) name = path.stem().string();
  return Lexicon(std::move(name), entries);
}

bool Lexicon::contains(std::span<const std::string> tokens) const {
  if (tokens.empty()) return false;
  if (tokens.size() == 1) return unigrams_.count(tokens.front()) > 0;
  return phrases_.count(join(tokens)) > 0;
}

std::vector<LexiconMatch> Lexicon::find_matches(std::span<const std::string> tokens) const {
  std::vector<LexiconMatch> matches;
  const std::size_t n = tokens.size();
  std::size_t i = 0;
  while (i < n) {
    std::size_t matched = 0;
    if (max_length_ >= 2 && phrase_starts_.count(tokens[i])) {
      for (std::size_t len = std::min(max_length_, n - i); len >= 2; --len) {
        if (phrases_.count(join(tokens.subspan(i, len)))) {
          matched = len;
          break;
        }
      }
    }
    if (matched == 0 && unigrams_.count(tokens[i])) matched = 1;
    if (matched) {
      matches.push_back({i, matched});
      i += matched;
    } else {
      ++i;
    }
  }
  return matches;
}

std::vector<std::vector<std::string>> Lexicon::entries() const {
  std::vector<std::vector<std::string>> out;
  for (const auto& u : unigrams_) out.push_back({u});
  for (const auto& p : phrases_) {
    std::vector<std::string> tokens;
    std::size_t start = 0;
    for (;;) {
      auto pos = p.find('\x1f', start);
      tokens.push_back(p.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    out.push_back(std::move(tokens));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Emotion parse_emotion(std::string_view name) {
  for (std::size_t i = 0; i < kEmotionCount; ++i) {
    if (kEmotionNames[i] == name) return static_cast<Emotion>(i);
  }
  throw ValidationError("unknown emotion '" + std::string(name) + "'");
}

void EmotionLexicon::add(const std::string& token, Emotion emotion) {
  entries_[token] |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(emotion));
}

std::uint8_t EmotionLexicon::emotions_of(const std::string& token) const {
  auto it = entries_.find(token);
  return it == entries_.end() ? 0 : it->second;
}

EmotionLexicon EmotionLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open emotion lexicon '" + path.string() + "'");
  EmotionLexicon lex;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = strip_comment(line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (tokenize(line).empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ValidationError(path.string() + ":" + std::to_string(number) + ": expected token<TAB>emotion");
    }
    auto token = tokenize(line.substr(0, tab));
    if (token.size() != 1) {
      throw ValidationError(path.string() + ":" + std::to_string(number) + ": emotion entries must be single tokens");
    }
    auto emotion = tokenize(line.substr(tab + 1));
    if (emotion.size() != 1) {
      throw ValidationError(path.string() + ":" + std::to_string(number) + ": expected one emotion name");
    }
    try {
      lex.add(token.front(), parse_emotion(emotion.front()));
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return lex;
}

std::vector<std::string> EmotionLexicon::tokens_with(Emotion emotion) const {
  std::vector<std::string> out;
  const auto bit = static_cast<std::uint8_t>(1u << static_cast<unsigned>(emotion));
  for (const auto& [token, mask] : entries_) {
    if (mask & bit) out.push_back(token);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<std::string, Emotion>> EmotionLexicon::single_emotion_tokens() const {
  std::vector<std::pair<std::string, Emotion>> out;
  for (const auto& [token, mask] : entries_) {
    if (mask != 0 && (mask & (mask - 1)) == 0) {
      unsigned bit = 0;
      while (!((mask >> bit) & 1u)) ++bit;
      out.emplace_back(token, static_cast<Emotion>(bit));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace coursecue
