// SPDX-License-Identifier: Apache-2.0
#include "coursecue/verbal_cues.hpp"

#include <algorithm>
#include <cmath>

#include "coursecue/error.hpp"
#include "coursecue/log.hpp"
#include "coursecue/text.hpp"

namespace coursecue {

std::array<double, kFeatureCount> FeatureVector::to_array() const {
  return {concreteness, questions, emotion_entropy, hedging, strong_modal, weak_modal, course_length,
          structure_quality};
}

FeatureVector FeatureVector::from_array(const std::array<double, kFeatureCount>& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
}

std::size_t GazetteerRecognizer::count_entities(std::span<const std::string> tokens) const {
  auto matches = gazetteer_->find_matches(tokens);
  std::size_t count = matches.size();
  std::size_t next_match = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    while (next_match < matches.size() && matches[next_match].start + matches[next_match].length <= i) ++next_match;
    bool covered = next_match < matches.size() && matches[next_match].start <= i;
    if (!covered && is_numeric_token(tokens[i])) ++count;
  }
  return count;
}

LexiconBundle LexiconBundle::load_directory(const std::filesystem::path& dir) {
  for (auto name : kFileNames) {
    if (!std::filesystem::is_regular_file(dir / name)) {
      throw ValidationError("missing lexicon file '" + (dir / name).string() + "'");
    }
  }
  LexiconBundle bundle;
  bundle.hedges = Lexicon::load(dir / "hedges.txt", "hedges");
  bundle.strong_modal = Lexicon::load(dir / "strong_modal.txt", "strong_modal");
  bundle.weak_modal = Lexicon::load(dir / "weak_modal.txt", "weak_modal");
  bundle.emotions = EmotionLexicon::load(dir / "emotions.tsv");
  bundle.gazetteer = Lexicon::load(dir / "gazetteer.txt", "gazetteer");
  return bundle;
}

double concreteness_ratio(const Course& course, const EntityRecognizer& recognizer) {
  std::size_t entities = 0, tokens = 0;
  for (const Lecture* lecture : course.lectures()) {
    const auto& t = lecture->tokens();
    entities += recognizer.count_entities(t);
    tokens += t.size();
  }
  return tokens == 0 ? 0.0 : static_cast<double>(entities) / static_cast<double>(tokens);
}

double concreteness_ratio(const Course& course, const Lexicon& gazetteer) {
  return concreteness_ratio(course, GazetteerRecognizer(gazetteer));
}

const std::array<std::string_view, 9>& wh_words() {
  static const std::array<std::string_view, 9> words = {"what", "which", "who",  "whom", "whose",
                                                        "where", "when", "why", "how"};
  return words;
}

const std::array<std::string_view, 19>& auxiliary_words() {
  static const std::array<std::string_view, 19> words = {
      "is",    "are",    "was", "were", "do",   "does",  "did", "can",  "could", "will",
      "would", "should", "shall", "may", "might", "must", "have", "has", "had"};
  return words;
}

namespace {

template <std::size_t N>
bool in_list(const std::array<std::string_view, N>& list, std::string_view token) {
  return std::find(list.begin(), list.end(), token) != list.end();
}

}  // namespace

bool is_question(std::string_view sentence) {
  std::size_t end = sentence.size();
  while (end > 0 && (std::isspace(static_cast<unsigned char>(sentence[end - 1])) || sentence[end - 1] == '"' ||
                     sentence[end - 1] == '\'' || sentence[end - 1] == ')')) {
    --end;
  }
  if (end > 0 && sentence[end - 1] == '?') return true;

  auto tokens = tokenize(sentence);
  if (tokens.empty()) return false;
  if (in_list(wh_words(), tokens[0])) {
    for (std::size_t i = 1; i < tokens.size() && i <= 3; ++i) {
      if (in_list(auxiliary_words(), tokens[i])) return true;
    }
  }
  return in_list(auxiliary_words(), tokens[0]);
}

double question_ratio(const Course& course) {
  std::size_t questions = 0, sentences = 0;
  for (const Lecture* lecture : course.lectures()) {
    for (const auto& s : lecture->sentences()) {
      ++sentences;
      if (is_question(s)) ++questions;
    }
  }
  if (sentences == 0) {
    log_warning("course '" + course.id + "' has no sentences; question ratio set to 0");
    return 0.0;
  }
  return static_cast<double>(questions) / static_cast<double>(sentences);
}

double emotion_entropy(const Course& course, const EmotionLexicon& lexicon) {
  std::array<std::size_t, kEmotionCount> counts{};
  std::size_t tokens = 0;
  for (const Lecture* lecture : course.lectures()) {
    for (const auto& token : lecture->tokens()) {
      ++tokens;
      std::uint8_t mask = lexicon.emotions_of(token);
      for (std::size_t e = 0; e < kEmotionCount && mask; ++e) {
        if (mask & (1u << e)) ++counts[e];
      }
    }
  }
  if (tokens == 0) return 0.0;
  double entropy = 0.0;
  for (std::size_t count : counts) {
    if (count == 0) continue;
    double r = static_cast<double>(count) / static_cast<double>(tokens);
    entropy -= r * std::log(r);
  }
  return entropy;
}

double lexicon_ratio(const Course& course, const Lexicon& lexicon) {
  std::size_t matches = 0, tokens = 0;
  for (const Lecture* lecture : course.lectures()) {
    const auto& t = lecture->tokens();
    matches += lexicon.count_matches(t);
    tokens += t.size();
  }
  return tokens == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(tokens);
}

std::size_t course_length(const Course& course) {
  std::size_t n = 0;
  for (const Lecture* lecture : course.lectures()) n += lecture->tokens().size();
  return n;
}

FeatureVector extract_features(const Course& course, const LexiconBundle& lexicons, double structure_quality) {
  FeatureVector f;
  f.concreteness = concreteness_ratio(course, GazetteerRecognizer(lexicons.gazetteer));
  f.questions = question_ratio(course);
  f.emotion_entropy = emotion_entropy(course, lexicons.emotions);
  f.hedging = lexicon_ratio(course, lexicons.hedges);
  f.strong_modal = lexicon_ratio(course, lexicons.strong_modal);
  f.weak_modal = lexicon_ratio(course, lexicons.weak_modal);
  f.course_length = static_cast<double>(course_length(course));
  f.structure_quality = structure_quality;
  return f;
}

}  // namespace coursecue
