#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mathcrawl::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);
bool iequals(std::string_view a, std::string_view b);

// Collapse every run of ASCII whitespace to a single space.
std::string collapse_whitespace(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

// Split on blank lines; each piece keeps its internal newlines.
std::vector<std::string> split_paragraphs(std::string_view s);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

}  // namespace mathcrawl::text
