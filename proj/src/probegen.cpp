#include "tokrot/probegen.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace tokrot::probegen {

namespace {

const std::map<std::string, std::string>& default_templates() {
  static const std::map<std::string, std::string> t = {
      {"CL", "What is the original word whose cycled letters form '{scrambled}'?"},
      {"WU", "Unscramble the letters '{scrambled}' to form a word."},
      {"CC", "Which character appears {count} times in the word '{word}'?"},
      {"NC", "What is the {k_ordinal} character of the word '{word}'?"},
      {"NCR", "What is the {k_ordinal} character from the end of the word '{word}'?"},
      {"CCV", "Convert the word '{word}' to {mode} case."},
      {"CS", "What are the common substrings of '{word_a}' and '{word_b}'?"},
      {"LCS", "What are the longest common substrings of '{word_a}' and '{word_b}'?"},
      {"LCSeq", "What are the longest common subsequences of '{word_a}' and '{word_b}'?"},
  };
  return t;
}

std::string ordinal(int k) {
  const int mod100 = k % 100;
  const int mod10 = k % 10;
  std::string suffix = "th";
  if (mod100 < 11 || mod100 > 13) {
    if (mod10 == 1) suffix = "st";
    else if (mod10 == 2) suffix = "nd";
    else if (mod10 == 3) suffix = "rd";
  }
  return std::to_string(k) + suffix;
}

const char* mode_name(CaseMode m) {
  switch (m) {
    case CaseMode::upper: return "upper";
    case CaseMode::lower: return "lower";
    case CaseMode::title: return "title";
  }
  return "lower";
}

}  // namespace

std::string kind_name(ProbeKind k) {
  switch (k) {
    case ProbeKind::CL: return "CL";
    case ProbeKind::WU: return "WU";
    case ProbeKind::CC: return "CC";
    case ProbeKind::NC: return "NC";
    case ProbeKind::NCR: return "NCR";
    case ProbeKind::CCV: return "CCV";
    case ProbeKind::CS: return "CS";
    case ProbeKind::LCS: return "LCS";
    case ProbeKind::LCSeq: return "LCSeq";
  }
  return "?";
}

const std::vector<ProbeKind>& all_kinds() {
  static const std::vector<ProbeKind> kinds = {
      ProbeKind::CL, ProbeKind::WU, ProbeKind::CC,  ProbeKind::NC, ProbeKind::NCR,
      ProbeKind::CCV, ProbeKind::CS, ProbeKind::LCS, ProbeKind::LCSeq};
  return kinds;
}

ProbeKind kind_from_name(const std::string& name) {
  for (ProbeKind k : all_kinds()) {
    if (kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown probe kind '" + name + "'");
}

TextRecord ProbeItem::to_record(const std::string& id, const std::string& split) const {
  TextRecord rec;
  rec.id = id;
  rec.prompt = prompt;
  rec.gold = gold;
  rec.task = kind_name(kind);
  rec.meta["split"] = split;
  rec.meta["word_a"] = word_a;
  if (!word_b.empty()) rec.meta["word_b"] = word_b;
  if (kind == ProbeKind::CC || kind == ProbeKind::NC || kind == ProbeKind::NCR ||
      kind == ProbeKind::CL) {
    rec.meta["k"] = std::to_string(k);
  }
  if (kind == ProbeKind::CCV) rec.meta["mode"] = mode_name(mode);
  if (!rendered.empty()) rec.meta["rendered"] = rendered;
  return rec;
}

TemplateSet TemplateSet::defaults() {
  TemplateSet t;
  t.by_kind_ = default_templates();
  return t;
}

TemplateSet TemplateSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read template file: " + path);
  nlohmann::json j;
  in >> j;
  TemplateSet t;
  t.version_ = j.at("version").get<int>();
  for (const auto& [key, value] : j.at("templates").items()) {
    kind_from_name(key);  // validates
    t.by_kind_[key] = value.get<std::string>();
  }
  for (ProbeKind k : all_kinds()) {
    if (!t.by_kind_.count(kind_name(k))) {
      throw std::runtime_error("template file missing kind " + kind_name(k));
    }
  }
  return t;
}

std::string TemplateSet::render(ProbeKind kind,
                                const std::map<std::string, std::string>& values) const {
  const std::string& tpl = by_kind_.at(kind_name(kind));
  std::string out;
  out.reserve(tpl.size());
  std::size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] == '{') {
      const std::size_t close = tpl.find('}', i);
      if (close == std::string::npos) throw std::runtime_error("unterminated placeholder in template");
      const std::string name = tpl.substr(i + 1, close - i - 1);
      auto it = values.find(name);
      if (it == values.end()) throw std::runtime_error("missing template value '" + name + "'");
      out += it->second;
      i = close + 1;
    } else {
      out.push_back(tpl[i]);
      ++i;
    }
  }
  return out;
}

// ---- oracles -------------------------------------------------------------

char32_t oracle_char_count(std::string_view word, int count) {
  if (count <= 0) throw std::invalid_argument("count must be positive");
  const std::u32string w = decode_utf8(word);
  std::map<char32_t, int> freq;
  for (char32_t c : w) freq[c] += 1;
  char32_t found = 0;
  int matches = 0;
  for (const auto& [c, f] : freq) {
    if (f == count) {
      found = c;
      ++matches;
    }
  }
  if (matches != 1) throw std::runtime_error("ambiguous");
  return found;
}

char32_t oracle_nth_char(std::string_view word, int k) {
  const std::u32string w = decode_utf8(word);
  if (k < 1 || static_cast<std::size_t>(k) > w.size()) {
    throw std::out_of_range("position out of range");
  }
  return w[static_cast<std::size_t>(k - 1)];
}

char32_t oracle_nth_char_rev(std::string_view word, int k) {
  const std::u32string w = decode_utf8(word);
  if (k < 1 || static_cast<std::size_t>(k) > w.size()) {
    throw std::out_of_range("position out of range");
  }
  return w[w.size() - static_cast<std::size_t>(k)];
}

std::string convert_case(std::string_view word, CaseMode mode) {
  std::u32string w = decode_utf8(word);
  auto up = [](char32_t c) { return (c >= U'a' && c <= U'z') ? c - 32 : c; };
  auto low = [](char32_t c) { return (c >= U'A' && c <= U'Z') ? c + 32 : c; };
  switch (mode) {
    case CaseMode::upper:
      for (auto& c : w) c = up(c);
      break;
    case CaseMode::lower:
      for (auto& c : w) c = low(c);
      break;
    case CaseMode::title:
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = i == 0 ? up(w[i]) : low(w[i]);
      break;
  }
  return encode_utf8(w);
}

namespace {

// Suffix-match DP table: dp[i][j] = length of the common suffix of a[..i) and
// b[..j). Shared by the substring oracles.
std::vector<std::vector<int>> suffix_match_table(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<int>> dp(a.size() + 1, std::vector<int>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) dp[i][j] = dp[i - 1][j - 1] + 1;
    }
  }
  return dp;
}

}  // namespace

std::set<std::string> common_substrings(std::string_view a_in, std::string_view b_in) {
  const std::u32string a = decode_utf8(a_in);
  const std::u32string b = decode_utf8(b_in);
  if (a.empty() || b.empty()) throw std::invalid_argument("words must be non-empty");
  const auto dp = suffix_match_table(a, b);
  std::set<std::u32string> all;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      for (int len = dp[i][j]; len > 0; --len) {
        all.insert(a.substr(i - static_cast<std::size_t>(len), static_cast<std::size_t>(len)));
      }
    }
  }
  // Keep only substrings not properly contained in a longer common substring.
  std::set<std::string> maximal;
  for (const auto& s : all) {
    bool contained = false;
    for (const auto& t : all) {
      if (t.size() > s.size() && t.find(s) != std::u32string::npos) {
        contained = true;
        break;
      }
    }
    if (!contained) maximal.insert(encode_utf8(s));
  }
  return maximal;
}

std::set<std::string> longest_common_substring(std::string_view a_in, std::string_view b_in) {
  const std::u32string a = decode_utf8(a_in);
  const std::u32string b = decode_utf8(b_in);
  if (a.empty() || b.empty()) throw std::invalid_argument("words must be non-empty");
  const auto dp = suffix_match_table(a, b);
  int best = 0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) best = std::max(best, dp[i][j]);
  }
  std::set<std::string> out;
  if (best == 0) return out;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (dp[i][j] == best) {
        out.insert(encode_utf8(
            a.substr(i - static_cast<std::size_t>(best), static_cast<std::size_t>(best))));
      }
    }
  }
  return out;
}

namespace {

struct LcseqEnumerator {
  const std::u32string& a;
  const std::u32string& b;
  const std::vector<std::vector<int>>& len;
  std::size_t cap;
  bool truncated = false;
  std::size_t stored = 0;
  std::map<std::pair<std::size_t, std::size_t>, std::set<std::u32string>> memo;

  const std::set<std::u32string>& collect(std::size_t i, std::size_t j) {
    auto it = memo.find({i, j});
    if (it != memo.end()) return it->second;
    std::set<std::u32string> result;
    if (i == 0 || j == 0) {
      result.insert(U"");
    } else if (a[i - 1] == b[j - 1]) {
      for (const auto& s : collect(i - 1, j - 1)) {
        if (stored >= cap) {
          truncated = true;
          break;
        }
        result.insert(s + a[i - 1]);
        ++stored;
      }
    } else {
      if (len[i - 1][j] >= len[i][j - 1]) {
        for (const auto& s : collect(i - 1, j)) {
          if (stored >= cap) {
            truncated = true;
            break;
          }
          if (result.insert(s).second) ++stored;
        }
      }
      if (len[i][j - 1] >= len[i - 1][j]) {
        for (const auto& s : collect(i, j - 1)) {
          if (stored >= cap) {
            truncated = true;
            break;
          }
          if (result.insert(s).second) ++stored;
        }
      }
    }
    return memo.emplace(std::make_pair(i, j), std::move(result)).first->second;
  }
};

}  // namespace

SubsequenceResult longest_common_subsequence(std::string_view a_in, std::string_view b_in,
                                             std::size_t cap) {
  const std::u32string a = decode_utf8(a_in);
  const std::u32string b = decode_utf8(b_in);
  if (a.empty() || b.empty()) throw std::invalid_argument("words must be non-empty");
  std::vector<std::vector<int>> len(a.size() + 1, std::vector<int>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) {
        len[i][j] = len[i - 1][j - 1] + 1;
      } else {
        len[i][j] = std::max(len[i - 1][j], len[i][j - 1]);
      }
    }
  }
  SubsequenceResult result;
  if (len[a.size()][b.size()] == 0) return result;
  LcseqEnumerator e{a, b, len, cap};
  for (const auto& s : e.collect(a.size(), b.size())) result.sequences.insert(encode_utf8(s));
  result.truncated = e.truncated;
  return result;
}

// ---- generators ----------------------------------------------------------

std::string rotate_left(std::string_view word, int rotation) {
  const std::u32string w = decode_utf8(word);
  if (w.empty()) return std::string(word);
  const std::size_t r = static_cast<std::size_t>(rotation) % w.size();
  return encode_utf8(w.substr(r) + w.substr(0, r));
}

ProbeItem gen_cycled(const std::string& word, int rotation, RandomStream& rng,
                     const TemplateSet& templates) {
  const std::u32string w = decode_utf8(word);
  if (w.size() < 2) throw std::invalid_argument("word too short");
  std::vector<int> valid;
  for (int r = 1; r < static_cast<int>(w.size()); ++r) {
    if (rotate_left(word, r) != word) valid.push_back(r);
  }
  if (valid.empty()) throw std::invalid_argument("word has no distinct rotation");
  if (rotation == 0) {
    rotation = valid[static_cast<std::size_t>(rng.below(valid.size()))];
  } else if (rotation < 1 || rotation >= static_cast<int>(w.size())) {
    throw std::invalid_argument("rotation out of range");
  } else if (rotate_left(word, rotation) == word) {
    throw std::invalid_argument("rotation leaves word unchanged");
  }
  ProbeItem item;
  item.kind = ProbeKind::CL;
  item.word_a = word;
  item.k = rotation;
  item.rendered = rotate_left(word, rotation);
  item.gold = {word};
  item.prompt = templates.render(ProbeKind::CL, {{"scrambled", item.rendered}});
  return item;
}

ProbeItem gen_unscramble(const std::string& word, RandomStream& rng, const TemplateSet& templates) {
  std::u32string w = decode_utf8(word);
  if (w.size() < 2) throw std::invalid_argument("word too short");
  const std::set<char32_t> distinct(w.begin(), w.end());
  if (distinct.size() < 2) throw std::invalid_argument("unscramblable");
  std::u32string scrambled = w;
  for (int attempt = 0; attempt < 1000 && scrambled == w; ++attempt) {
    scrambled = w;
    shuffle_in_place(scrambled, rng);
  }
  if (scrambled == w) {
    // Pathologically unlucky; force a visible change.
    for (std::size_t i = 1; i < scrambled.size(); ++i) {
      if (scrambled[i] != scrambled[0]) {
        std::swap(scrambled[0], scrambled[i]);
        break;
      }
    }
  }
  ProbeItem item;
  item.kind = ProbeKind::WU;
  item.word_a = word;
  item.rendered = encode_utf8(scrambled);
  item.gold = {word};
  item.prompt = templates.render(ProbeKind::WU, {{"scrambled", item.rendered}});
  return item;
}

SplitSpec SplitSpec::desk_scale() {
  SplitSpec s;
  s.counts[ProbeKind::CC] = {207, 2};
  s.counts[ProbeKind::NC] = {312, 2};
  s.counts[ProbeKind::NCR] = {313, 2};
  s.counts[ProbeKind::CCV] = {277, 2};
  s.counts[ProbeKind::CS] = {48, 2};
  s.counts[ProbeKind::LCS] = {48, 2};
  s.counts[ProbeKind::LCSeq] = {48, 2};
  s.counts[ProbeKind::CL] = {48, 2};
  s.counts[ProbeKind::WU] = {48, 2};
  return s;
}

namespace {

struct KindGenerator {
  ProbeKind kind;
  const std::vector<std::string>& pool;
  const TemplateSet& templates;
  RandomStream& rng;

  const std::string& pick_word() {
    return pool[static_cast<std::size_t>(rng.below(pool.size()))];
  }

  // One candidate item, or nothing when the drawn inputs are invalid for
  // this kind (rejection sampling).
  std::optional<ProbeItem> try_generate() {
    switch (kind) {
      case ProbeKind::CL: return try_cl();
      case ProbeKind::WU: return try_wu();
      case ProbeKind::CC: return try_cc();
      case ProbeKind::NC: return try_nth(false);
      case ProbeKind::NCR: return try_nth(true);
      case ProbeKind::CCV: return try_ccv();
      case ProbeKind::CS:
      case ProbeKind::LCS:
      case ProbeKind::LCSeq: return try_pairwise();
    }
    return std::nullopt;
  }

  std::optional<ProbeItem> try_cl() {
    const std::string& w = pick_word();
    try {
      return gen_cycled(w, 0, rng, templates);
    } catch (const std::invalid_argument&) {
      return std::nullopt;
    }
  }

  std::optional<ProbeItem> try_wu() {
    const std::string& w = pick_word();
    try {
      return gen_unscramble(w, rng, templates);
    } catch (const std::invalid_argument&) {
      return std::nullopt;
    }
  }

  std::optional<ProbeItem> try_cc() {
    const std::string& w = pick_word();
    std::map<char32_t, int> freq;
    for (char32_t c : decode_utf8(w)) freq[c] += 1;
    std::map<int, int> chars_with_count;
    for (const auto& [c, f] : freq) chars_with_count[f] += 1;
    std::vector<int> unambiguous;
    for (const auto& [count, chars] : chars_with_count) {
      if (chars == 1) unambiguous.push_back(count);
    }
    if (unambiguous.empty()) return std::nullopt;
    const int count = unambiguous[static_cast<std::size_t>(rng.below(unambiguous.size()))];
    ProbeItem item;
    item.kind = ProbeKind::CC;
    item.word_a = w;
    item.k = count;
    item.gold = {encode_utf8(std::u32string(1, oracle_char_count(w, count)))};
    item.prompt = templates.render(ProbeKind::CC, {{"count", std::to_string(count)}, {"word", w}});
    return item;
  }

  std::optional<ProbeItem> try_nth(bool reverse) {
    const std::string& w = pick_word();
    const std::size_t len = decode_utf8(w).size();
    if (len == 0) return std::nullopt;
    const int k = 1 + static_cast<int>(rng.below(len));
    ProbeItem item;
    item.kind = reverse ? ProbeKind::NCR : ProbeKind::NC;
    item.word_a = w;
    item.k = k;
    const char32_t c = reverse ? oracle_nth_char_rev(w, k) : oracle_nth_char(w, k);
    item.gold = {encode_utf8(std::u32string(1, c))};
    item.prompt = templates.render(
        item.kind, {{"k", std::to_string(k)}, {"k_ordinal", ordinal(k)}, {"word", w}});
    return item;
  }

  std::optional<ProbeItem> try_ccv() {
    std::u32string w = decode_utf8(pick_word());
    // Randomize the input casing so lowercase conversion is non-trivial.
    for (auto& c : w) {
      if (c >= U'a' && c <= U'z' && rng.bernoulli(0.5)) c -= 32;
    }
    const std::string cased = encode_utf8(w);
    const CaseMode modes[] = {CaseMode::upper, CaseMode::lower, CaseMode::title};
    const CaseMode mode = modes[rng.below(3)];
    ProbeItem item;
    item.kind = ProbeKind::CCV;
    item.word_a = cased;
    item.mode = mode;
    item.gold = {convert_case(cased, mode)};
    item.prompt = templates.render(ProbeKind::CCV, {{"word", cased}, {"mode", mode_name(mode)}});
    return item;
  }

  std::optional<ProbeItem> try_pairwise() {
    if (pool.size() < 2) return std::nullopt;
    const std::string& a = pick_word();
    const std::string& b = pick_word();
    if (a == b) return std::nullopt;
    std::set<std::string> gold;
    if (kind == ProbeKind::CS) {
      gold = common_substrings(a, b);
    } else if (kind == ProbeKind::LCS) {
      gold = longest_common_substring(a, b);
    } else {
      const auto res = longest_common_subsequence(a, b);
      if (res.truncated) return std::nullopt;
      gold = res.sequences;
    }
    if (gold.empty()) return std::nullopt;
    ProbeItem item;
    item.kind = kind;
    item.word_a = a;
    item.word_b = b;
    item.gold.assign(gold.begin(), gold.end());
    item.prompt = templates.render(kind, {{"word_a", a}, {"word_b", b}});
    return item;
  }
};

std::string dedup_key(const ProbeItem& item) {
  return kind_name(item.kind) + '|' + item.word_a + '|' + item.word_b + '|' +
         std::to_string(item.k) + '|' + mode_name(item.mode) + '|' + item.rendered;
}

std::vector<ProbeItem> generate_kind(ProbeKind kind, const std::vector<std::string>& pool,
                                     int count, const TemplateSet& templates, RandomStream& rng) {
  std::vector<ProbeItem> items;
  if (count == 0) return items;
  if (pool.empty()) {
    throw std::runtime_error("unsatisfiable split for kind " + kind_name(kind) +
                             ": empty word pool");
  }
  KindGenerator gen{kind, pool, templates, rng};
  std::unordered_set<std::string> seen;
  long long attempts = 0;
  const long long max_attempts = 500LL * count + 2000;
  while (static_cast<int>(items.size()) < count) {
    if (++attempts > max_attempts) {
      throw std::runtime_error("unsatisfiable split for kind " + kind_name(kind));
    }
    auto item = gen.try_generate();
    if (!item) continue;
    if (!seen.insert(dedup_key(*item)).second) continue;
    items.push_back(std::move(*item));
  }
  return items;
}

}  // namespace

ProbeStreams synthesize(const std::vector<std::string>& words, const SplitSpec& split,
                        const TemplateSet& templates, RandomStream& rng) {
  if (words.empty()) throw std::invalid_argument("word list is empty");
  std::vector<std::string> pool(words);
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  shuffle_in_place(pool, rng);

  // Disjoint word pools; the test pool gets ~10% of the words.
  const std::size_t test_size = std::max<std::size_t>(std::min<std::size_t>(pool.size() / 2, 10),
                                                      pool.size() / 10);
  const std::vector<std::string> test_pool(pool.end() - static_cast<std::ptrdiff_t>(test_size),
                                           pool.end());
  const std::vector<std::string> train_pool(pool.begin(),
                                            pool.end() - static_cast<std::ptrdiff_t>(test_size));

  ProbeStreams out;
  const std::uint64_t base = rng.next_u64();
  std::uint64_t kind_index = 0;
  for (ProbeKind kind : all_kinds()) {
    const auto it = split.counts.find(kind);
    const int n_train = it == split.counts.end() ? 0 : it->second.first;
    const int n_test = it == split.counts.end() ? 0 : it->second.second;
    RandomStream train_rng = derive_substream(base, 2 * kind_index);
    RandomStream test_rng = derive_substream(base, 2 * kind_index + 1);
    for (auto& item : generate_kind(kind, train_pool, n_train, templates, train_rng)) {
      out.train.push_back(std::move(item));
    }
    for (auto& item : generate_kind(kind, test_pool, n_test, templates, test_rng)) {
      out.test.push_back(std::move(item));
    }
    ++kind_index;
  }
  return out;
}

}  // namespace tokrot::probegen
