#include "ctkit/text.hpp"

#include <algorithm>
#include <array>

namespace ctkit::text {

namespace {

struct Range {
  Codepoint lo;
  Codepoint hi;  // inclusive
};

bool in_ranges(Codepoint c, const Range* ranges, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (c < ranges[i].lo) return false;
    if (c <= ranges[i].hi) return true;
  }
  return false;
}

// Coarse letter blocks, sorted. Covers the scripts that show up in profile
// names and comments; anything outside is treated as non-letter.
constexpr Range kLetterRanges[] = {
    {0x0041, 0x005A}, {0x0061, 0x007A}, {0x00AA, 0x00AA}, {0x00B5, 0x00B5},
    {0x00BA, 0x00BA}, {0x00C0, 0x00D6}, {0x00D8, 0x00F6}, {0x00F8, 0x02AF},
    {0x0370, 0x0373}, {0x0376, 0x0377}, {0x037B, 0x037D}, {0x037F, 0x037F},
    {0x0386, 0x0386}, {0x0388, 0x03FF}, {0x0400, 0x0481}, {0x048A, 0x052F},
    {0x0531, 0x0556}, {0x0561, 0x0587}, {0x05D0, 0x05EA}, {0x0620, 0x064A},
    {0x066E, 0x06D3}, {0x0900, 0x097F}, {0x0E01, 0x0E3A},
    {0x0E40, 0x0E5B}, {0x10A0, 0x10FA}, {0x1E00, 0x1FFC}, {0x3041, 0x3096},
    {0x30A1, 0x30FA}, {0x4E00, 0x9FFF}, {0xAC00, 0xD7A3},
};

constexpr Range kUpperRanges[] = {
    {0x0041, 0x005A}, {0x00C0, 0x00D6}, {0x00D8, 0x00DE}, {0x0386, 0x0386},
    {0x0388, 0x038F}, {0x0391, 0x03A9}, {0x0400, 0x042F}, {0x0531, 0x0556},
    {0x10A0, 0x10C5},
};

constexpr Range kEmojiRanges[] = {
    {0x2600, 0x27BF},   {0x1F300, 0x1F5FF}, {0x1F600, 0x1F64F},
    {0x1F680, 0x1F6FF}, {0x1F900, 0x1F9FF}, {0x1FA70, 0x1FAFF},
};

}  // namespace

std::vector<Codepoint> decode_utf8(std::string_view s) {
  std::vector<Codepoint> out;
  out.reserve(s.size());
  std::size_t i = 0;
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  while (i < s.size()) {
    const unsigned char b0 = byte(i);
    std::size_t len = 0;
    Codepoint cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    if (i + len > s.size()) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char bk = byte(i + k);
      if ((bk & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (bk & 0x3F);
    }
    // Reject overlong encodings, surrogates, and out-of-range values.
    if (ok) {
      if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
          (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
          (cp >= 0xD800 && cp <= 0xDFFF)) {
        ok = false;
      }
    }
    if (!ok) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

void append_utf8(std::string& out, Codepoint cp) {
  if (cp <= 0x7F) {
    out.push_back(static_cast<char>(cp));
  } else if (cp <= 0x7FF) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp <= 0xFFFF) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode_utf8(const std::vector<Codepoint>& cps) {
  std::string out;
  out.reserve(cps.size());
  for (Codepoint cp : cps) append_utf8(out, cp);
  return out;
}

std::size_t scalar_count(std::string_view s) { return decode_utf8(s).size(); }

bool is_ascii_digit(Codepoint c) { return c >= '0' && c <= '9'; }

bool is_letter(Codepoint c) {
  return in_ranges(c, kLetterRanges, std::size(kLetterRanges));
}

bool is_upper(Codepoint c) {
  return in_ranges(c, kUpperRanges, std::size(kUpperRanges));
}

bool is_space(Codepoint c) {
  switch (c) {
    case 0x09:
    case 0x0A:
    case 0x0B:
    case 0x0C:
    case 0x0D:
    case 0x20:
    case 0xA0:
    case 0x2028:
    case 0x2029:
    case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

Codepoint to_lower(Codepoint c) {
  if (c >= 'A' && c <= 'Z') return c + 0x20;
  if ((c >= 0x00C0 && c <= 0x00D6) || (c >= 0x00D8 && c <= 0x00DE)) return c + 0x20;
  if (c >= 0x0391 && c <= 0x03A9 && c != 0x03A2) return c + 0x20;
  if (c >= 0x0410 && c <= 0x042F) return c + 0x20;
  if (c >= 0x0400 && c <= 0x040F) return c + 0x50;
  return c;
}

std::string lowercase(std::string_view s) {
  auto cps = decode_utf8(s);
  for (auto& cp : cps) cp = to_lower(cp);
  return encode_utf8(cps);
}

bool is_emoji_scalar(Codepoint c) {
  return in_ranges(c, kEmojiRanges, std::size(kEmojiRanges));
}

bool is_variation_selector(Codepoint c) {
  return (c >= 0xFE00 && c <= 0xFE0F) || (c >= 0xE0100 && c <= 0xE01EF);
}

namespace {

// Shared cluster scan: calls on_emoji(cluster scalars) for each emoji
// cluster and on_other(cp) for every scalar outside clusters.
template <typename OnEmoji, typename OnOther>
void scan_clusters(std::string_view s, OnEmoji on_emoji, OnOther on_other) {
  const auto cps = decode_utf8(s);
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!is_emoji_scalar(cps[i])) {
      on_other(cps[i]);
      ++i;
      continue;
    }
    std::vector<Codepoint> cluster{cps[i]};
    ++i;
    for (;;) {
      // Variation selectors attached to the cluster are dropped.
      while (i < cps.size() && is_variation_selector(cps[i])) ++i;
      if (i + 1 < cps.size() && cps[i] == kZwj && is_emoji_scalar(cps[i + 1])) {
        cluster.push_back(kZwj);
        cluster.push_back(cps[i + 1]);
        i += 2;
      } else {
        break;
      }
    }
    on_emoji(cluster);
  }
}

}  // namespace

std::vector<std::string> emoji_clusters(std::string_view s) {
  std::vector<std::string> out;
  scan_clusters(
      s, [&](const std::vector<Codepoint>& cluster) { out.push_back(encode_utf8(cluster)); },
      [](Codepoint) {});
  return out;
}

std::string strip_emoji(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  scan_clusters(
      s, [](const std::vector<Codepoint>&) {},
      [&](Codepoint cp) { append_utf8(out, cp); });
  return out;
}

std::vector<std::string> words(std::string_view s) {
  const auto cps = decode_utf8(strip_emoji(s));
  std::vector<std::string> out;
  std::vector<Codepoint> run;
  const auto flush = [&] {
    if (!run.empty()) {
      out.push_back(encode_utf8(run));
      run.clear();
    }
  };
  for (Codepoint cp : cps) {
    if (is_letter(cp) || is_ascii_digit(cp)) {
      run.push_back(cp);
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::vector<std::string> whitespace_tokens(std::string_view s) {
  const auto cps = decode_utf8(s);
  std::vector<std::string> out;
  std::vector<Codepoint> run;
  const auto flush = [&] {
    if (!run.empty()) {
      out.push_back(encode_utf8(run));
      run.clear();
    }
  };
  for (Codepoint cp : cps) {
    if (is_space(cp)) {
      flush();
    } else {
      run.push_back(cp);
    }
  }
  flush();
  return out;
}

}  // namespace ctkit::text
