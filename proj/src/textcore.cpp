#include "tokrot/textcore.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace tokrot {

namespace {
constexpr char32_t kReplacement = 0xFFFD;

bool is_ascii_alnum(char32_t c) {
  return (c >= U'0' && c <= U'9') || (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
}

bool is_space_scalar(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' ||
         c == 0xA0 || c == 0x2028 || c == 0x2029;
}
}  // namespace

bool is_word_char(char32_t c) { return is_ascii_alnum(c) || c > 0x7F; }

std::u32string decode_utf8(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  std::size_t i = 0;
  const std::size_t n = utf8.size();
  while (i < n) {
    const unsigned char b0 = static_cast<unsigned char>(utf8[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    int len;
    char32_t cp;
    if ((b0 & 0xE0) == 0xC0) {
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
    if (i + len > n) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const unsigned char bk = static_cast<unsigned char>(utf8[i + k]);
      if ((bk & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (bk & 0x3F);
    }
    if (!ok || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(std::u32string_view scalars) {
  std::string out;
  out.reserve(scalars.size());
  for (char32_t cp : scalars) {
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = kReplacement;
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
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
  return out;
}

std::vector<WordSpan> segment_words(std::u32string_view text) {
  std::vector<WordSpan> spans;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (!is_word_char(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < n && is_word_char(text[j])) ++j;
    spans.push_back({i, j});
    i = j;
  }
  return spans;
}

std::vector<WordSpan> segment_words_utf8(std::string_view utf8) {
  return segment_words(decode_utf8(utf8));
}

Alphabet Alphabet::from_utf8(std::string_view utf8) {
  Alphabet a;
  std::unordered_set<char32_t> seen;
  for (char32_t c : decode_utf8(utf8)) {
    if (is_space_scalar(c)) throw std::invalid_argument("Alphabet: whitespace not allowed");
    if (seen.insert(c).second) a.chars.push_back(c);
  }
  return a;
}

Alphabet Alphabet::for_text(std::u32string_view text) {
  Alphabet a;
  std::unordered_set<char32_t> seen;
  for (char32_t c = U'a'; c <= U'z'; ++c) {
    seen.insert(c);
    a.chars.push_back(c);
  }
  for (char32_t c : text) {
    if (!is_word_char(c)) continue;
    if (seen.insert(c).second) a.chars.push_back(c);
  }
  return a;
}

char32_t Alphabet::pick(RandomStream& rng) const {
  if (chars.empty()) throw std::logic_error("Alphabet::pick: empty alphabet");
  return chars[static_cast<std::size_t>(rng.below(chars.size()))];
}

}  // namespace tokrot
