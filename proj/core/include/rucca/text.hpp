#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rucca::text {

/// Decodes UTF-8 into code points; invalid bytes map to U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

/// Simple case mapping for ASCII, Latin-1 and Latin Extended-A.
char32_t to_lower(char32_t c);
char32_t to_upper(char32_t c);
bool is_alpha(char32_t c);

std::string lowercase(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

}  // namespace rucca::text
