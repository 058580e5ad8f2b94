#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace advsp::text {

std::string_view trim(std::string_view s);
std::string_view trim_right(std::string_view s);

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);

bool iequals(std::string_view a, std::string_view b);

// Splits on runs of ASCII whitespace; no empty pieces.
std::vector<std::string> split_whitespace(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Replaces CR/LF with single spaces.
std::string single_line(std::string_view s);

bool contains_whitespace(std::string_view s);
bool contains_alnum(std::string_view s);

// Number of non-overlapping occurrences of `needle` (non-empty) in `hay`.
size_t count_occurrences(std::string_view hay, std::string_view needle);

}  // namespace advsp::text
