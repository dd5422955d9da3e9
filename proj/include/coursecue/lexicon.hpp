// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace coursecue {

/// A half-open token range [start, start + length) matched by a lexicon.
struct LexiconMatch {
  std::size_t start;
  std::size_t length;
};

/// Set of single-word and multi-word entries. Entries are normalized with
/// the corpus tokenizer, so they are lowercase and punctuation-stripped.
class Lexicon {
 public:
  Lexicon() = default;
  Lexicon(std::string name, const std::vector<std::string>& entries);

  /// One entry per line, '#' starts a comment, blank lines ignored.
  static Lexicon load(const std::filesystem::path& path, std::string name = {});

  const std::string& name() const { return name_; }
  std::size_t size() const { return unigrams_.size() + phrases_.size(); }
  bool empty() const { return size() == 0; }
  std::size_t max_phrase_length() const { return max_length_; }

  bool contains(std::span<const std::string> tokens) const;
  bool contains(std::string_view token) const { return unigrams_.count(std::string(token)) > 0; }

  /// Greedy left-to-right, longest entry first, no overlaps. Tokens consumed
  /// by a phrase are not re-counted as unigrams.
  std::vector<LexiconMatch> find_matches(std::span<const std::string> tokens) const;
  std::size_t count_matches(std::span<const std::string> tokens) const { return find_matches(tokens).size(); }

  /// All entries as token sequences, sorted.
  std::vector<std::vector<std::string>> entries() const;

 private:
  static std::string join(std::span<const std::string> tokens);

  std::string name_;
  std::unordered_set<std::string> unigrams_;
  std::unordered_set<std::string> phrases_;        // tokens joined by '\x1f'
  std::unordered_set<std::string> phrase_starts_;
  std::size_t max_length_ = 0;
};

enum class Emotion : std::uint8_t { Anticipation, Joy, Surprise, Trust, Anger, Disgust, Fear, Sadness };

inline constexpr std::size_t kEmotionCount = 8;
inline constexpr std::array<std::string_view, kEmotionCount> kEmotionNames = {
    "anticipation", "joy", "surprise", "trust", "anger", "disgust", "fear", "sadness"};

/// Token -> subset of the eight emotion dimensions (bit i = Emotion i).
class EmotionLexicon {
 public:
  EmotionLexicon() = default;

  /// TSV `token<TAB>emotion`; a token may appear on several lines.
  static EmotionLexicon load(const std::filesystem::path& path);

  void add(const std::string& token, Emotion emotion);
  std::uint8_t emotions_of(const std::string& token) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Tokens carrying the given emotion, sorted.
  std::vector<std::string> tokens_with(Emotion emotion) const;
  /// Tokens carrying exactly one emotion, which one, sorted by token.
  std::vector<std::pair<std::string, Emotion>> single_emotion_tokens() const;

 private:
  std::unordered_map<std::string, std::uint8_t> entries_;
};

Emotion parse_emotion(std::string_view name);

}  // namespace coursecue
