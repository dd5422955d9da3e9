// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace coursecue::csv {

/// Quotes a field when it contains a comma, quote or line break.
std::string escape(std::string_view field);

/// Splits one CSV line (RFC 4180 quoting, no embedded line breaks).
std::vector<std::string> split_line(std::string_view line);

/// Shortest-exact formatting ("%.17g") so values round-trip.
std::string format_double(double value);

}  // namespace coursecue::csv
