#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cartograf::text {

/// Decode the UTF-8 sequence starting at s[i]; advances i past it.
/// Invalid bytes are consumed one at a time and returned as their byte value.
uint32_t decode_utf8(std::string_view s, size_t& i);

/// Number of Unicode scalar values in s (invalid bytes count as one each).
size_t codepoint_count(std::string_view s);

/// True for characters that belong inside a token: ASCII letters, ASCII
/// digits, the apostrophe, and non-ASCII codepoints outside the common
/// punctuation blocks (approximation of "Unicode letter").
bool is_word_char(uint32_t cp);

/// ASCII + Latin-1 lowercasing; other codepoints pass through.
void append_lowered(std::string& out, uint32_t cp);

} // namespace cartograf::text
