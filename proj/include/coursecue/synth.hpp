// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "coursecue/corpus.hpp"
#include "coursecue/random.hpp"
#include "coursecue/verbal_cues.hpp"
#include "json.hpp"

namespace coursecue {

/// Integer count distribution: a draw is rounded and raised to `min`.
/// Gamma draws are parameterized by mean and sd.
struct CountDistribution {
  enum class Kind { Normal, Gamma };
  Kind kind = Kind::Normal;
  double mean = 1;
  double sd = 0;
  std::size_t min = 1;

  std::size_t sample(Rng& rng) const;
};

/// Per-course latent rate ~ max(0, Normal(mean, sd)), optionally capped.
struct RateDistribution {
  double mean = 0;
  double sd = 0;

  double sample(Rng& rng, double cap = 1.0) const;
};

struct GeneratorSpec {
  std::size_t n_courses = 1085;
  std::uint64_t seed = 0;

  CountDistribution sections{CountDistribution::Kind::Normal, 4.95, 1.81, 1};
  CountDistribution lectures_per_section{CountDistribution::Kind::Gamma, 8.13, 5.24, 1};
  CountDistribution tokens_per_lecture{CountDistribution::Kind::Gamma, 1158.87, 855.50, 20};
  std::size_t sentence_min = 6;
  std::size_t sentence_max = 16;

  /// Fraction of sentences that are questions.
  RateDistribution question_rate{0.08, 0.04};
  /// Per-slot injection probabilities.
  RateDistribution hedge_rate{0.012, 0.006};
  RateDistribution strong_modal_rate{0.006, 0.003};
  RateDistribution weak_modal_rate{0.006, 0.003};
  RateDistribution emotion_rate{0.04, 0.015};
  RateDistribution entity_rate{0.03, 0.015};
  /// Share of entity slots filled with a number instead of a gazetteer form.
  double number_fraction = 0.3;
  /// Probability that a content word comes from its section's topic words
  /// rather than the course-wide pool; drives structure_quality. Capped at 1.
  RateDistribution structure_strength{0.5, 0.25};
  /// Per-slot probability of a marker word carrying the text-only latent.
  RateDistribution marker_rate{0.0, 0.0};

  std::size_t topic_pool_size = 3000;
  std::size_t topic_words_per_section = 20;
  std::size_t general_pool_size = 400;
  std::size_t general_words_per_course = 60;
  std::size_t marker_words = 8;

  double rating_mean = 3.5;
  /// Coefficients on corpus-standardized extracted features, keyed by
  /// feature name.
  std::map<std::string, double> coefficients;
  /// Coefficient on the per-course text-only latent u ~ N(0, 1), realized
  /// through marker words.
  double semantic_coefficient = 0;
  double noise_sd = 0.1;

  /// Throws ValidationError for infeasible settings.
  void validate() const;
  nlohmann::json to_json() const;
  /// Missing keys keep their (Table 1) defaults; unknown keys are rejected.
  static GeneratorSpec from_json(const nlohmann::json& j);
  static GeneratorSpec load(const std::filesystem::path& path);
};

/// Section sizes and lecture token counts of one course.
struct CourseLayout {
  std::vector<std::vector<std::size_t>> lecture_tokens;  // [section][lecture]
};

/// Hidden per-course quantities the ratings were generated from.
struct CourseLatents {
  double question_rate = 0;
  double hedge_rate = 0;
  double strong_modal_rate = 0;
  double weak_modal_rate = 0;
  double emotion_rate = 0;
  double entity_rate = 0;
  double structure_strength = 0;
  double marker_rate = 0;
  double semantic = 0;
  FeatureVector realized;
};

struct SyntheticCorpus {
  std::vector<Course> courses;
  std::vector<CourseLatents> latents;
};

/// Layouts only; identical to the ones generate() produces for the same spec.
std::vector<CourseLayout> sample_layouts(const GeneratorSpec& spec);

/// Deterministic under spec.seed. Ratings are
/// clip(rating_mean + sum_f beta_f z_f + semantic_coefficient u + noise, 0, 5)
/// with z_f the corpus-standardized realized feature; instructor and course
/// ratings draw independent noise.
SyntheticCorpus generate_corpus(const GeneratorSpec& spec, const LexiconBundle& lexicons);
std::vector<Course> generate(const GeneratorSpec& spec, const LexiconBundle& lexicons);

/// Permutes lecture texts across the whole course while keeping section
/// sizes, destroying the section/vocabulary alignment.
Course shuffle_lectures(const Course& course, std::uint64_t seed);

/// Deterministic pronounceable nonsense word for index i; distinct indices
/// give distinct words.
std::string pseudoword(std::size_t index);

}  // namespace coursecue
