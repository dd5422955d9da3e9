// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace coursecue {

/// Lowercased word tokens. Splits on whitespace, strips leading and trailing
/// ASCII punctuation from each piece and drops pieces that were punctuation
/// only. Interior characters (apostrophes, hyphens, decimal points) are kept.
std::vector<std::string> tokenize(std::string_view text);

/// Splits after '.', '?' or '!' when followed by whitespace or end of text
/// (closing quotes/brackets may sit in between). The delimiter stays with its
/// sentence; sentences are trimmed and never empty. A period ending a word in
/// the abbreviation list ("e.g.", "i.e.", "dr.", "etc.", ...) does not split.
std::vector<std::string> split_sentences(std::string_view text);

/// True for tokens made of digits and numeric punctuation (".,:/%-") with at
/// least one digit: "1995", "3.5", "10%", "2020-21".
bool is_numeric_token(std::string_view token);

const std::vector<std::string>& sentence_abbreviations();

}  // namespace coursecue
