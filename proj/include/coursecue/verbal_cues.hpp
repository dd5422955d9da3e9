// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "coursecue/corpus.hpp"
#include "coursecue/lexicon.hpp"

namespace coursecue {

inline constexpr std::size_t kFeatureCount = 8;

/// Column names, in correlation-table order.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "concreteness", "questions",    "emotion_entropy", "hedging",
    "strong_modal", "weak_modal",   "course_length",   "structure_quality"};

/// Human-readable row labels matching the column names above.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureLabels = {
    "Concreteness", "Questions",  "Emotion appealing", "Hedging",
    "Strong modal", "Weak modal", "Course length",     "Course structure"};

/// The eight extracted course features.
struct FeatureVector {
  double concreteness = 0.0;
  double questions = 0.0;
  double emotion_entropy = 0.0;
  double hedging = 0.0;
  double strong_modal = 0.0;
  double weak_modal = 0.0;
  double course_length = 0.0;
  double structure_quality = 0.0;

  std::array<double, kFeatureCount> to_array() const;
  static FeatureVector from_array(const std::array<double, kFeatureCount>& values);

  bool operator==(const FeatureVector&) const = default;
};

/// Counts named-entity mentions in a token stream. Swap in a different
/// recognizer to replace the gazetteer.
class EntityRecognizer {
 public:
  virtual ~EntityRecognizer() = default;
  virtual std::size_t count_entities(std::span<const std::string> tokens) const = 0;
};

/// Gazetteer surface forms (multi-word forms count once) plus numeric tokens
/// not already covered by a gazetteer match. Holds a reference; the lexicon
/// must outlive the recognizer.
class GazetteerRecognizer final : public EntityRecognizer {
 public:
  explicit GazetteerRecognizer(const Lexicon& gazetteer) : gazetteer_(&gazetteer) {}
  std::size_t count_entities(std::span<const std::string> tokens) const override;
  const Lexicon& gazetteer() const { return *gazetteer_; }

 private:
  const Lexicon* gazetteer_;
};

/// Every lexicon the feature extractor needs.
struct LexiconBundle {
  Lexicon hedges;
  Lexicon strong_modal;
  Lexicon weak_modal;
  Lexicon gazetteer;
  EmotionLexicon emotions;

  static constexpr std::array<std::string_view, 5> kFileNames = {
      "hedges.txt", "strong_modal.txt", "weak_modal.txt", "emotions.tsv", "gazetteer.txt"};

  /// Loads the five files above; a missing file raises ValidationError
  /// naming it.
  static LexiconBundle load_directory(const std::filesystem::path& dir);
};

double concreteness_ratio(const Course& course, const EntityRecognizer& recognizer);
double concreteness_ratio(const Course& course, const Lexicon& gazetteer);

/// Rule-based detector standing in for SBARQ/SQ clause tags:
/// (a) ends with '?'; (b) starts with a wh-word followed within three tokens
/// by an auxiliary; (c) starts with an auxiliary (inverted yes/no question).
bool is_question(std::string_view sentence);

const std::array<std::string_view, 9>& wh_words();
const std::array<std::string_view, 19>& auxiliary_words();

/// Questions / sentences over all lectures. Zero sentences gives 0 and a
/// warning.
double question_ratio(const Course& course);

/// -sum_i r_i ln r_i over the eight emotion dimensions, r_i = tokens carrying
/// emotion i / word tokens. 0 ln 0 := 0.
double emotion_entropy(const Course& course, const EmotionLexicon& lexicon);

/// Lexicon matches / word tokens.
double lexicon_ratio(const Course& course, const Lexicon& lexicon);

std::size_t course_length(const Course& course);

/// All eight features. structure_quality comes from the structure module and
/// is passed through unchanged.
FeatureVector extract_features(const Course& course, const LexiconBundle& lexicons, double structure_quality);

}  // namespace coursecue
