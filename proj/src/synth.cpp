// SPDX-License-Identifier: Apache-2.0
#include "coursecue/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_set>

#include "coursecue/error.hpp"
#include "coursecue/feature_table.hpp"
#include "coursecue/structure.hpp"
#include "coursecue/text.hpp"

namespace coursecue {

std::size_t CountDistribution::sample(Rng& rng) const {
  double x = 0;
  if (kind == Kind::Normal) {
    x = rng.normal(mean, sd);
  } else {
    // Gamma with the requested mean and sd: shape = (mean/sd)^2, scale = sd^2/mean.
    x = sd == 0 ? mean : rng.gamma((mean / sd) * (mean / sd), sd * sd / mean);
  }
  const double r = std::round(x);
  if (!(r >= static_cast<double>(min))) return min;
  return static_cast<std::size_t>(r);
}

double RateDistribution::sample(Rng& rng, double cap) const {
  const double x = sd == 0 ? mean : rng.normal(mean, sd);
  return std::clamp(x, 0.0, cap);
}

namespace {

using nlohmann::json;

[[noreturn]] void spec_error(const std::string& what) { throw ValidationError("generator spec: " + what); }

const char* kind_name(CountDistribution::Kind k) { return k == CountDistribution::Kind::Normal ? "normal" : "gamma"; }

json count_to_json(const CountDistribution& d) {
  return {{"distribution", kind_name(d.kind)}, {"mean", d.mean}, {"sd", d.sd}, {"min", d.min}};
}

json rate_to_json(const RateDistribution& d) { return {{"mean", d.mean}, {"sd", d.sd}}; }

double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) spec_error("'" + key + "' must be a number");
  return v.get<double>();
}

std::size_t get_count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) spec_error("'" + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

CountDistribution count_from_json(const json& j, const std::string& key, CountDistribution d) {
  if (!j.is_object()) spec_error("'" + key + "' must be an object");
  for (const auto& [k, v] : j.items()) {
    if (k == "distribution") {
      if (v == "normal") d.kind = CountDistribution::Kind::Normal;
      else if (v == "gamma") d.kind = CountDistribution::Kind::Gamma;
      else spec_error("'" + key + ".distribution' must be \"normal\" or \"gamma\"");
    } else if (k == "mean") d.mean = get_number(v, key + ".mean");
    else if (k == "sd") d.sd = get_number(v, key + ".sd");
    else if (k == "min") d.min = get_count(v, key + ".min");
    else spec_error("unknown key '" + key + "." + k + "'");
  }
  return d;
}

RateDistribution rate_from_json(const json& j, const std::string& key, RateDistribution d) {
  if (!j.is_object()) spec_error("'" + key + "' must be an object");
  for (const auto& [k, v] : j.items()) {
    if (k == "mean") d.mean = get_number(v, key + ".mean");
    else if (k == "sd") d.sd = get_number(v, key + ".sd");
    else spec_error("unknown key '" + key + "." + k + "'");
  }
  return d;
}

void check_count(const CountDistribution& d, const std::string& key) {
  if (!(d.mean > 0) || !(d.sd >= 0) || !std::isfinite(d.mean) || !std::isfinite(d.sd)) {
    spec_error("'" + key + "' needs mean > 0 and sd >= 0");
  }
  if (d.min < 1) spec_error("'" + key + ".min' must be >= 1");
}

void check_rate(const RateDistribution& d, const std::string& key) {
  if (!(d.mean >= 0) || !(d.sd >= 0) || !std::isfinite(d.mean) || !std::isfinite(d.sd)) {
    spec_error("'" + key + "' rates must have mean >= 0 and sd >= 0");
  }
}

}  // namespace

void GeneratorSpec::validate() const {
  if (n_courses == 0) spec_error("n_courses must be >= 1");
  check_count(sections, "sections");
  check_count(lectures_per_section, "lectures_per_section");
  check_count(tokens_per_lecture, "tokens_per_lecture");
  if (sentence_min < 2 || sentence_max < sentence_min) spec_error("need 2 <= sentence_min <= sentence_max");
  if (tokens_per_lecture.min < sentence_min) spec_error("tokens_per_lecture.min must be >= sentence_min");
  check_rate(question_rate, "question_rate");
  check_rate(hedge_rate, "hedge_rate");
  check_rate(strong_modal_rate, "strong_modal_rate");
  check_rate(weak_modal_rate, "weak_modal_rate");
  check_rate(emotion_rate, "emotion_rate");
  check_rate(entity_rate, "entity_rate");
  check_rate(structure_strength, "structure_strength");
  check_rate(marker_rate, "marker_rate");
  if (question_rate.mean > 1) spec_error("question_rate.mean must be <= 1");
  if (structure_strength.mean > 1) spec_error("structure_strength.mean must be <= 1");
  const double slots = hedge_rate.mean + strong_modal_rate.mean + weak_modal_rate.mean + emotion_rate.mean +
                       entity_rate.mean + marker_rate.mean;
  if (slots >= 1) spec_error("injection rate means must sum to < 1");
  if (!(number_fraction >= 0 && number_fraction <= 1)) spec_error("number_fraction must lie in [0, 1]");
  if (topic_pool_size == 0 || topic_words_per_section == 0 || topic_words_per_section > topic_pool_size) {
    spec_error("need 1 <= topic_words_per_section <= topic_pool_size");
  }
  if (general_pool_size == 0 || general_words_per_course == 0) spec_error("general vocabulary sizes must be >= 1");
  if (marker_rate.mean > 0 && marker_words == 0) spec_error("marker_words must be >= 1 when markers are used");
  if (!(rating_mean >= 0 && rating_mean <= 5)) spec_error("rating_mean must lie in [0, 5]");
  if (!(noise_sd >= 0) || !std::isfinite(noise_sd)) spec_error("noise_sd must be >= 0");
  if (!std::isfinite(semantic_coefficient)) spec_error("semantic_coefficient must be finite");
  for (const auto& [name, beta] : coefficients) {
    if (std::find(kFeatureNames.begin(), kFeatureNames.end(), name) == kFeatureNames.end()) {
      spec_error("unknown feature '" + name + "' in coefficients");
    }
    if (!std::isfinite(beta)) spec_error("coefficient for '" + name + "' must be finite");
  }
}

nlohmann::json GeneratorSpec::to_json() const {
  return {{"n_courses", n_courses},
          {"seed", seed},
          {"sections", count_to_json(sections)},
          {"lectures_per_section", count_to_json(lectures_per_section)},
          {"tokens_per_lecture", count_to_json(tokens_per_lecture)},
          {"sentence_min", sentence_min},
          {"sentence_max", sentence_max},
          {"question_rate", rate_to_json(question_rate)},
          {"hedge_rate", rate_to_json(hedge_rate)},
          {"strong_modal_rate", rate_to_json(strong_modal_rate)},
          {"weak_modal_rate", rate_to_json(weak_modal_rate)},
          {"emotion_rate", rate_to_json(emotion_rate)},
          {"entity_rate", rate_to_json(entity_rate)},
          {"number_fraction", number_fraction},
          {"structure_strength", rate_to_json(structure_strength)},
          {"marker_rate", rate_to_json(marker_rate)},
          {"topic_pool_size", topic_pool_size},
          {"topic_words_per_section", topic_words_per_section},
          {"general_pool_size", general_pool_size},
          {"general_words_per_course", general_words_per_course},
          {"marker_words", marker_words},
          {"rating_mean", rating_mean},
          {"coefficients", coefficients},
          {"semantic_coefficient", semantic_coefficient},
          {"noise_sd", noise_sd}};
}

GeneratorSpec GeneratorSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object()) spec_error("must be a JSON object");
  GeneratorSpec s;
  for (const auto& [k, v] : j.items()) {
    if (k == "n_courses") s.n_courses = get_count(v, k);
    else if (k == "seed") s.seed = get_count(v, k);
    else if (k == "sections") s.sections = count_from_json(v, k, s.sections);
    else if (k == "lectures_per_section") s.lectures_per_section = count_from_json(v, k, s.lectures_per_section);
    else if (k == "tokens_per_lecture") s.tokens_per_lecture = count_from_json(v, k, s.tokens_per_lecture);
    else if (k == "sentence_min") s.sentence_min = get_count(v, k);
    else if (k == "sentence_max") s.sentence_max = get_count(v, k);
    else if (k == "question_rate") s.question_rate = rate_from_json(v, k, s.question_rate);
    else if (k == "hedge_rate") s.hedge_rate = rate_from_json(v, k, s.hedge_rate);
    else if (k == "strong_modal_rate") s.strong_modal_rate = rate_from_json(v, k, s.strong_modal_rate);
    else if (k == "weak_modal_rate") s.weak_modal_rate = rate_from_json(v, k, s.weak_modal_rate);
    else if (k == "emotion_rate") s.emotion_rate = rate_from_json(v, k, s.emotion_rate);
    else if (k == "entity_rate") s.entity_rate = rate_from_json(v, k, s.entity_rate);
    else if (k == "number_fraction") s.number_fraction = get_number(v, k);
    else if (k == "structure_strength") s.structure_strength = rate_from_json(v, k, s.structure_strength);
    else if (k == "marker_rate") s.marker_rate = rate_from_json(v, k, s.marker_rate);
    else if (k == "topic_pool_size") s.topic_pool_size = get_count(v, k);
    else if (k == "topic_words_per_section") s.topic_words_per_section = get_count(v, k);
    else if (k == "general_pool_size") s.general_pool_size = get_count(v, k);
    else if (k == "general_words_per_course") s.general_words_per_course = get_count(v, k);
    else if (k == "marker_words") s.marker_words = get_count(v, k);
    else if (k == "rating_mean") s.rating_mean = get_number(v, k);
    else if (k == "semantic_coefficient") s.semantic_coefficient = get_number(v, k);
    else if (k == "noise_sd") s.noise_sd = get_number(v, k);
    else if (k == "coefficients") {
      if (!v.is_object()) spec_error("'coefficients' must be an object of feature -> number");
      for (const auto& [name, beta] : v.items()) s.coefficients[name] = get_number(beta, "coefficients." + name);
    } else {
      spec_error("unknown key '" + k + "'");
    }
  }
  s.validate();
  return s;
}

GeneratorSpec GeneratorSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open generator spec " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("generator spec " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

std::string pseudoword(std::size_t index) {
  static constexpr std::array<std::string_view, 20> kSyllables = {"ba", "ke", "di", "fo", "gu", "la", "me", "ni",
                                                                  "po", "ru", "sa", "te", "vi", "zo", "ku", "ra",
                                                                  "lo", "mi", "ne", "tu"};
  // Offset so every word has at least three syllables; CV syllables make the
  // spelling uniquely decodable.
  std::size_t n = index + kSyllables.size() * kSyllables.size();
  std::string word;
  while (n > 0) {
    word += kSyllables[n % kSyllables.size()];
    n /= kSyllables.size();
  }
  return word;
}

namespace {

struct InjectionTables {
  std::vector<std::vector<std::string>> hedges, strong, weak, entities;
  std::array<std::vector<std::string>, kEmotionCount> emotions;
  std::vector<std::string> topic_pool, general_pool, positive_markers, negative_markers;
  std::vector<std::string> wh_openers, aux_openers;
};

bool plain_word(const std::string& w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](unsigned char c) { return std::isalpha(c) || c == '\'' || c == '-'; });
}

InjectionTables build_tables(const GeneratorSpec& spec, const LexiconBundle& lex) {
  // Token sets per lexicon; an entry is injectable only if none of its
  // tokens belongs to another lexicon, so each injection moves one feature.
  const std::array<const Lexicon*, 4> word_lexicons = {&lex.hedges, &lex.strong_modal, &lex.weak_modal, &lex.gazetteer};
  std::array<std::unordered_set<std::string>, 5> tokens_of;
  for (std::size_t i = 0; i < word_lexicons.size(); ++i) {
    for (const auto& entry : word_lexicons[i]->entries()) tokens_of[i].insert(entry.begin(), entry.end());
  }
  for (std::size_t e = 0; e < kEmotionCount; ++e) {
    for (auto& t : lex.emotions.tokens_with(static_cast<Emotion>(e))) tokens_of[4].insert(t);
  }
  std::unordered_set<std::string> reserved;
  for (auto w : wh_words()) reserved.emplace(w);
  for (auto w : auxiliary_words()) reserved.emplace(w);

  auto exclusive = [&](const std::vector<std::string>& entry, std::size_t own) {
    for (const auto& t : entry) {
      if (!plain_word(t) || reserved.count(t)) return false;
      for (std::size_t i = 0; i < tokens_of.size(); ++i) {
        if (i != own && tokens_of[i].count(t)) return false;
      }
    }
    return true;
  };

  InjectionTables tables;
  std::array<std::vector<std::vector<std::string>>*, 4> outs = {&tables.hedges, &tables.strong, &tables.weak,
                                                                 &tables.entities};
  for (std::size_t i = 0; i < word_lexicons.size(); ++i) {
    for (auto& entry : word_lexicons[i]->entries()) {
      if (exclusive(entry, i)) outs[i]->push_back(entry);
    }
  }
  for (const auto& [token, emotion] : lex.emotions.single_emotion_tokens()) {
    if (exclusive({token}, 4)) tables.emotions[static_cast<std::size_t>(emotion)].push_back(token);
  }

  auto in_any = [&](const std::string& w) {
    return std::any_of(tokens_of.begin(), tokens_of.end(), [&](const auto& s) { return s.count(w) > 0; }) ||
           reserved.count(w) > 0;
  };
  std::size_t next = 0;
  auto fill = [&](std::vector<std::string>& pool, std::size_t n) {
    while (pool.size() < n) {
      std::string w = pseudoword(next++);
      if (!in_any(w)) pool.push_back(std::move(w));
    }
  };
  fill(tables.topic_pool, spec.topic_pool_size);
  fill(tables.general_pool, spec.general_pool_size);
  fill(tables.positive_markers, spec.marker_words);
  fill(tables.negative_markers, spec.marker_words);

  for (auto w : wh_words()) tables.wh_openers.emplace_back(w);
  // Modal auxiliaries would also move the modal features; only the others
  // open yes/no questions.
  for (auto w : auxiliary_words()) {
    const std::string s(w);
    bool lexical = false;
    for (const auto& set : tokens_of) lexical = lexical || set.count(s) > 0;
    if (!lexical) tables.aux_openers.push_back(s);
  }

  auto active = [](const RateDistribution& r) { return r.mean > 0 || r.sd > 0; };
  auto need = [](bool needed, bool have, const char* what) {
    if (needed && !have) throw ValidationError(std::string("generator: lexicons provide no injectable ") + what);
  };
  need(active(spec.hedge_rate), !tables.hedges.empty(), "hedges");
  need(active(spec.strong_modal_rate), !tables.strong.empty(), "strong modals");
  need(active(spec.weak_modal_rate), !tables.weak.empty(), "weak modals");
  need(active(spec.entity_rate) && spec.number_fraction < 1, !tables.entities.empty(), "gazetteer entries");
  const bool any_emotion = std::any_of(tables.emotions.begin(), tables.emotions.end(), [](const auto& v) { return !v.empty(); });
  need(active(spec.emotion_rate), any_emotion, "emotion tokens");
  need(active(spec.question_rate), !tables.aux_openers.empty() || !tables.wh_openers.empty(), "question openers");
  return tables;
}

class CourseWriter {
 public:
  CourseWriter(const GeneratorSpec& spec, const InjectionTables& tables, Rng& rng, CourseLatents& latents,
               std::size_t sections)
      : spec_(spec), t_(tables), rng_(rng), lat_(latents) {
    for (std::size_t i = 0; i < spec.general_words_per_course; ++i) {
      general_.push_back(&t_.general_pool[rng_.index(t_.general_pool.size())]);
    }
    topics_.resize(sections);
    for (auto& topic : topics_) {
      for (std::size_t i = 0; i < spec.topic_words_per_section; ++i) {
        topic.push_back(&t_.topic_pool[rng_.index(t_.topic_pool.size())]);
      }
    }
    double total = 0;
    for (std::size_t e = 0; e < kEmotionCount; ++e) {
      emotion_weights_[e] = t_.emotions[e].empty() ? 0.0 : rng_.gamma(0.5, 1.0);
      total += emotion_weights_[e];
    }
    if (total == 0) {
      for (std::size_t e = 0; e < kEmotionCount; ++e) {
        emotion_weights_[e] = t_.emotions[e].empty() ? 0.0 : 1.0;
        total += emotion_weights_[e];
      }
    }
    emotion_total_ = total;
    positive_share_ = 1.0 / (1.0 + std::exp(-2.0 * lat_.semantic));
  }

  std::string lecture(std::size_t section, std::size_t n_tokens) {
    std::string text;
    std::size_t remaining = n_tokens;
    while (remaining > 0) {
      std::size_t len = spec_.sentence_min + rng_.index(spec_.sentence_max - spec_.sentence_min + 1);
      len = std::min(len, remaining);
      if (remaining - len < spec_.sentence_min) len = remaining;
      if (!text.empty()) text += ' ';
      text += sentence(section, len);
      remaining -= len;
    }
    return text;
  }

 private:
  const std::string& content(std::size_t section) {
    if (rng_.bernoulli(lat_.structure_strength)) {
      const auto& topic = topics_[section];
      return *topic[rng_.index(topic.size())];
    }
    return *general_[rng_.index(general_.size())];
  }

  template <typename T>
  static const T& pick(Rng& rng, const std::vector<T>& v) {
    return v[rng.index(v.size())];
  }

  // Appends the words of one injected slot; the budget counts words still
  // available before the closing content word.
  void slot(std::vector<std::string>& words, std::size_t section, std::size_t budget) {
    double u = rng_.uniform();
    auto entry = [&](const std::vector<std::vector<std::string>>& entries) {
      const auto& e = pick(rng_, entries);
      if (e.size() > budget) return false;
      words.insert(words.end(), e.begin(), e.end());
      return true;
    };
    if ((u -= lat_.hedge_rate) < 0) {
      if (entry(t_.hedges)) return;
    } else if ((u -= lat_.strong_modal_rate) < 0) {
      if (entry(t_.strong)) return;
    } else if ((u -= lat_.weak_modal_rate) < 0) {
      if (entry(t_.weak)) return;
    } else if ((u -= lat_.emotion_rate) < 0) {
      double w = rng_.uniform() * emotion_total_;
      std::size_t chosen = kEmotionCount;
      for (std::size_t e = 0; e < kEmotionCount; ++e) {
        if (emotion_weights_[e] == 0) continue;
        chosen = e;
        if ((w -= emotion_weights_[e]) < 0) break;
      }
      words.push_back(pick(rng_, t_.emotions[chosen]));
      return;
    } else if ((u -= lat_.entity_rate) < 0) {
      if (t_.entities.empty() || rng_.bernoulli(spec_.number_fraction)) {
        words.push_back(std::to_string(1 + rng_.index(2024)));
        return;
      }
      if (entry(t_.entities)) return;
    } else if ((u -= lat_.marker_rate) < 0) {
      words.push_back(rng_.bernoulli(positive_share_) ? pick(rng_, t_.positive_markers)
                                                      : pick(rng_, t_.negative_markers));
      return;
    }
    words.push_back(content(section));
  }

  std::string sentence(std::size_t section, std::size_t len) {
    std::vector<std::string> words;
    const bool question = rng_.bernoulli(lat_.question_rate);
    if (question) {
      const bool use_wh = t_.aux_openers.empty() || (!t_.wh_openers.empty() && rng_.bernoulli(0.5));
      words.push_back(use_wh ? pick(rng_, t_.wh_openers) : pick(rng_, t_.aux_openers));
    } else {
      words.push_back(content(section));
    }
    while (words.size() + 1 < len) slot(words, section, len - 1 - words.size());
    words.push_back(content(section));
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) out += ' ';
      out += words[i];
    }
    out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    out += question ? '?' : '.';
    return out;
  }

  const GeneratorSpec& spec_;
  const InjectionTables& t_;
  Rng& rng_;
  CourseLatents& lat_;
  std::vector<const std::string*> general_;
  std::vector<std::vector<const std::string*>> topics_;
  std::array<double, kEmotionCount> emotion_weights_{};
  double emotion_total_ = 0;
  double positive_share_ = 0.5;
};

CourseLayout sample_layout(const GeneratorSpec& spec, std::size_t course) {
  Rng rng(derive_seed(derive_seed(spec.seed, "layout"), course));
  CourseLayout layout;
  layout.lecture_tokens.resize(spec.sections.sample(rng));
  for (auto& section : layout.lecture_tokens) {
    section.resize(spec.lectures_per_section.sample(rng));
    for (auto& n : section) n = spec.tokens_per_lecture.sample(rng);
  }
  return layout;
}

std::string course_id(std::size_t i) {
  std::string digits = std::to_string(i + 1);
  return "course-" + std::string(digits.size() < 4 ? 4 - digits.size() : 0, '0') + digits;
}

}  // namespace

std::vector<CourseLayout> sample_layouts(const GeneratorSpec& spec) {
  spec.validate();
  std::vector<CourseLayout> layouts;
  layouts.reserve(spec.n_courses);
  for (std::size_t i = 0; i < spec.n_courses; ++i) layouts.push_back(sample_layout(spec, i));
  return layouts;
}

SyntheticCorpus generate_corpus(const GeneratorSpec& spec, const LexiconBundle& lexicons) {
  spec.validate();
  const InjectionTables tables = build_tables(spec, lexicons);
  SyntheticCorpus corpus;
  corpus.courses.reserve(spec.n_courses);
  corpus.latents.resize(spec.n_courses);
  const std::uint64_t text_seed = derive_seed(spec.seed, "text");

  for (std::size_t i = 0; i < spec.n_courses; ++i) {
    const CourseLayout layout = sample_layout(spec, i);
    Rng rng(derive_seed(text_seed, i));
    CourseLatents& lat = corpus.latents[i];
    lat.question_rate = spec.question_rate.sample(rng);
    lat.hedge_rate = spec.hedge_rate.sample(rng, 0.5);
    lat.strong_modal_rate = spec.strong_modal_rate.sample(rng, 0.5);
    lat.weak_modal_rate = spec.weak_modal_rate.sample(rng, 0.5);
    lat.emotion_rate = spec.emotion_rate.sample(rng, 0.5);
    lat.entity_rate = spec.entity_rate.sample(rng, 0.5);
    lat.structure_strength = spec.structure_strength.sample(rng);
    lat.marker_rate = spec.marker_rate.sample(rng, 0.5);
    lat.semantic = rng.normal();

    CourseWriter writer(spec, tables, rng, lat, layout.lecture_tokens.size());
    const std::string id = course_id(i);
    std::vector<SectionDraft> drafts;
    for (std::size_t s = 0; s < layout.lecture_tokens.size(); ++s) {
      SectionDraft draft;
      draft.title = "Section " + std::to_string(s + 1);
      for (std::size_t l = 0; l < layout.lecture_tokens[s].size(); ++l) {
        draft.lectures.emplace_back(id + "-s" + std::to_string(s + 1) + "-l" + std::to_string(l + 1),
                                    writer.lecture(s, layout.lecture_tokens[s][l]));
      }
      drafts.push_back(std::move(draft));
    }
    corpus.courses.push_back(make_course(id, "Synthetic course " + std::to_string(i + 1), std::move(drafts)));
  }

  const bool needs_features = std::any_of(spec.coefficients.begin(), spec.coefficients.end(),
                                          [](const auto& kv) { return kv.second != 0; });
  std::array<std::vector<double>, kFeatureCount> z;
  if (needs_features) {
    TfidfEmbedder embedder;
    const auto records = compute_feature_table(corpus.courses, lexicons, embedder);
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      std::vector<double> column;
      for (std::size_t i = 0; i < records.size(); ++i) column.push_back(records[i].features.to_array()[j]);
      double mean = 0, var = 0;
      for (double v : column) mean += v;
      mean /= static_cast<double>(column.size());
      for (double v : column) var += (v - mean) * (v - mean);
      const double sd = std::sqrt(var / static_cast<double>(column.size()));
      for (double& v : column) v = sd > 0 ? (v - mean) / sd : 0.0;
      z[j] = std::move(column);
    }
    for (std::size_t i = 0; i < records.size(); ++i) corpus.latents[i].realized = records[i].features;
  }

  Rng noise(derive_seed(spec.seed, "rating"));
  for (std::size_t i = 0; i < corpus.courses.size(); ++i) {
    double signal = spec.rating_mean + spec.semantic_coefficient * corpus.latents[i].semantic;
    if (needs_features) {
      for (std::size_t j = 0; j < kFeatureCount; ++j) {
        auto it = spec.coefficients.find(std::string(kFeatureNames[j]));
        if (it != spec.coefficients.end()) signal += it->second * z[j][i];
      }
    }
    const double instructor = signal + (spec.noise_sd > 0 ? noise.normal(0, spec.noise_sd) : 0.0);
    const double course = signal + (spec.noise_sd > 0 ? noise.normal(0, spec.noise_sd) : 0.0);
    corpus.courses[i].instructor_rating = std::clamp(instructor, 0.0, 5.0);
    corpus.courses[i].course_rating = std::clamp(course, 0.0, 5.0);
  }
  return corpus;
}

std::vector<Course> generate(const GeneratorSpec& spec, const LexiconBundle& lexicons) {
  return generate_corpus(spec, lexicons).courses;
}

Course shuffle_lectures(const Course& course, std::uint64_t seed) {
  std::vector<std::string> texts;
  for (const Lecture* l : course.lectures()) texts.push_back(l->text());
  Rng rng(seed);
  rng.shuffle(texts);
  std::vector<SectionDraft> drafts;
  std::size_t k = 0;
  for (const auto& section : course.sections) {
    SectionDraft draft;
    draft.title = section.title;
    for (const auto& lecture : section.lectures) draft.lectures.emplace_back(lecture.id(), texts[k++]);
    drafts.push_back(std::move(draft));
  }
  return make_course(course.id, course.title, std::move(drafts), course.instructor_rating, course.course_rating);
}

}  // namespace coursecue
