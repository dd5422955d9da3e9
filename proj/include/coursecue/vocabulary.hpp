// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "coursecue/corpus.hpp"
#include "json.hpp"

namespace coursecue {

/// Token-id table for the lecture encoder. Ids 0..2 are reserved.
class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;
  static constexpr std::int32_t kCls = 2;
  static constexpr std::size_t kReserved = 3;

  Vocabulary();
  explicit Vocabulary(std::vector<std::string> tokens);

  /// Collects tokens from the first `max_tokens` tokens of every lecture,
  /// ordered by descending count then lexicographically; keeps tokens seen
  /// at least `min_count` times, at most `max_size` entries in total
  /// (0 = unlimited, reserved ids included).
  static Vocabulary build(std::span<const Course* const> courses, std::size_t max_tokens, std::size_t min_count = 1,
                          std::size_t max_size = 0);

  std::int32_t id(std::string_view token) const;
  /// Reserved entries render as "[PAD]", "[UNK]", "[CLS]".
  const std::string& token(std::int32_t id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }

  /// Regular tokens only, in id order.
  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

}  // namespace coursecue
