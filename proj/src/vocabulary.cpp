// SPDX-License-Identifier: Apache-2.0
#include "coursecue/vocabulary.hpp"

#include <algorithm>
#include <map>

#include "coursecue/error.hpp"

namespace coursecue {

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  tokens_ = {"[PAD]", "[UNK]", "[CLS]"};
  for (auto& t : tokens) {
    if (t.empty()) throw ValidationError("vocabulary contains an empty token");
    if (index_.count(t)) throw ValidationError("vocabulary contains duplicate token '" + t + "'");
    index_.emplace(t, static_cast<std::int32_t>(tokens_.size()));
    tokens_.push_back(std::move(t));
  }
}

Vocabulary Vocabulary::build(std::span<const Course* const> courses, std::size_t max_tokens, std::size_t min_count,
                             std::size_t max_size) {
  std::map<std::string, std::size_t> counts;
  for (const Course* course : courses) {
    for (const Lecture* lecture : course->lectures()) {
      const auto& tokens = lecture->tokens();
      const std::size_t n = std::min(max_tokens, tokens.size());
      for (std::size_t i = 0; i < n; ++i) ++counts[tokens[i]];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> kept;
  for (auto& [token, count] : ranked) {
    if (count < min_count) break;
    if (max_size != 0 && kept.size() + kReserved >= max_size) break;
    kept.push_back(token);
  }
  return Vocabulary(std::move(kept));
}

std::int32_t Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

nlohmann::json Vocabulary::to_json() const {
  return nlohmann::json(std::vector<std::string>(tokens_.begin() + kReserved, tokens_.end()));
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ValidationError("vocabulary must be a JSON array of strings");
  std::vector<std::string> tokens;
  for (const auto& t : j) {
    if (!t.is_string()) throw ValidationError("vocabulary must be a JSON array of strings");
    tokens.push_back(t.get<std::string>());
  }
  return Vocabulary(std::move(tokens));
}

}  // namespace coursecue
