#pragma once

// UTF-8 helpers. All character offsets used across the library are Unicode
// code point offsets into UTF-8 strings.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace clpd::unicode {

/// Decode UTF-8; malformed sequences decode to U+FFFD.
std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view cps);
void append_utf8(std::string& out, char32_t cp);

/// Simple (1:1) lowercase mapping applied per code point.
std::string fold_case(std::string_view utf8);
char32_t to_lower(char32_t cp);

bool is_space(char32_t cp);
bool is_upper(char32_t cp);
bool is_digit(char32_t cp);
/// Punctuation and symbol categories.
bool is_punct(char32_t cp);
bool is_alpha(char32_t cp);

std::size_t length(std::string_view utf8);

/// Substring by code point range [start, end).
std::string substr(std::string_view utf8, std::size_t start, std::size_t end);

/// Byte offset of each code point, plus a final entry equal to utf8.size().
std::vector<std::size_t> codepoint_byte_offsets(std::string_view utf8);

}  // namespace clpd::unicode
