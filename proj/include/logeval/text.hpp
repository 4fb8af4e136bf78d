#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace logeval::text {

// Collapses every run of whitespace into one space and trims both ends.
std::string collapse_whitespace(std::string_view s);

std::string_view trim(std::string_view s);

std::string to_lower(std::string_view s);

// Lowercased maximal runs of [A-Za-z0-9_].
std::vector<std::string> word_tokens(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

}  // namespace logeval::text
