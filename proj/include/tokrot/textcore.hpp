#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tokrot/random.hpp"

namespace tokrot {

// One benchmark item flowing through corruption and scoring.
struct TextRecord {
  std::string id;
  std::string prompt;
  std::vector<std::string> gold;
  std::string task;
  std::map<std::string, std::string> meta;
};

// Maximal alphanumeric run, indexed by Unicode scalar position.
struct WordSpan {
  std::size_t begin = 0;  // inclusive
  std::size_t end = 0;    // exclusive

  bool operator==(const WordSpan&) const = default;
};

// Characters eligible as noise insertions/substitutions. Ordered,
// deduplicated, never contains whitespace.
struct Alphabet {
  std::u32string chars;

  static Alphabet from_utf8(std::string_view utf8);
  // Lowercase a-z plus every word character observed in `text`.
  static Alphabet for_text(std::u32string_view text);

  bool empty() const { return chars.empty(); }
  char32_t pick(RandomStream& rng) const;
};

// UTF-8 <-> scalar conversion. Invalid bytes decode as U+FFFD.
std::u32string decode_utf8(std::string_view utf8);
std::string encode_utf8(std::u32string_view scalars);

// Word character = ASCII alphanumeric, or any scalar above U+007F.
// ASCII punctuation (apostrophes, hyphens included) is a boundary.
bool is_word_char(char32_t c);

std::vector<WordSpan> segment_words(std::u32string_view text);
// Convenience overload; spans index Unicode scalars, not bytes.
std::vector<WordSpan> segment_words_utf8(std::string_view utf8);

}  // namespace tokrot
