#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ctkit::text {

using Codepoint = char32_t;

inline constexpr Codepoint kReplacement = 0xFFFD;
inline constexpr Codepoint kZwj = 0x200D;

// Decodes UTF-8 into Unicode scalars. Invalid byte sequences decode to one
// U+FFFD per offending byte so any byte stream is total-function safe.
std::vector<Codepoint> decode_utf8(std::string_view s);

void append_utf8(std::string& out, Codepoint cp);
std::string encode_utf8(const std::vector<Codepoint>& cps);

std::size_t scalar_count(std::string_view s);

bool is_ascii_digit(Codepoint c);
// Letter/uppercase/lowercase classification over the major script blocks
// (Latin, Greek, Cyrillic, Hebrew, Arabic, CJK, Kana, Hangul); see the range
// tables in text.cpp. Intentionally compact rather than an exhaustive
// Unicode property table.
bool is_letter(Codepoint c);
bool is_upper(Codepoint c);
bool is_space(Codepoint c);
Codepoint to_lower(Codepoint c);
std::string lowercase(std::string_view s);

bool is_emoji_scalar(Codepoint c);
bool is_variation_selector(Codepoint c);

// Emoji are detected by scalar range; a ZWJ-joined run counts as a single
// emoji and variation selectors are ignored. Each returned cluster is the
// UTF-8 text of the joined sequence with variation selectors dropped.
std::vector<std::string> emoji_clusters(std::string_view s);

// Removes emoji clusters (including their ZWJs and variation selectors).
std::string strip_emoji(std::string_view s);

// Maximal runs of letters/digits, computed after emoji removal.
std::vector<std::string> words(std::string_view s);

// Whitespace-delimited tokens of the raw text.
std::vector<std::string> whitespace_tokens(std::string_view s);

}  // namespace ctkit::text
