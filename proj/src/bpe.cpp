#include "tokrot/bpe.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "tokrot/textcore.hpp"

namespace tokrot::bpe {

namespace {

std::vector<std::string> whitespace_split(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) {
        words.push_back(std::move(cur));
        cur.clear();
      }
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

// Word -> initial symbol sequence: one token per scalar, then the marker.
std::vector<std::string> base_symbols(const std::string& word) {
  std::vector<std::string> syms;
  for (char32_t c : decode_utf8(word)) {
    syms.push_back(encode_utf8(std::u32string(1, c)));
  }
  syms.emplace_back(MergeTable::kEndOfWord);
  return syms;
}

std::string pair_key(std::string_view left, std::string_view right) {
  std::string key(left);
  key.push_back('\x1f');
  key.append(right);
  return key;
}

}  // namespace

void MergeTable::index_rules() {
  pair_rank_.clear();
  for (const MergeRule& r : rules_) {
    pair_rank_.emplace(pair_key(r.left, r.right), r.rank);
    vocab_.insert(r.left);
    vocab_.insert(r.right);
    vocab_.insert(r.merged);
  }
  vocab_.insert(std::string(kEndOfWord));
}

std::optional<int> MergeTable::rank_of(std::string_view left, std::string_view right) const {
  auto it = pair_rank_.find(pair_key(left, right));
  if (it == pair_rank_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> MergeTable::vocab_list() const {
  std::vector<std::string> out(vocab_.begin(), vocab_.end());
  std::sort(out.begin(), out.end());
  return out;
}

MergeTable MergeTable::train(const std::vector<std::string>& corpus, std::size_t num_merges) {
  if (corpus.empty()) throw std::invalid_argument("empty corpus");

  // Distinct words with frequencies; ordered map keeps iteration stable.
  std::map<std::string, long long> word_freq;
  for (const std::string& text : corpus) {
    for (std::string& w : whitespace_split(text)) word_freq[w] += 1;
  }

  MergeTable table;
  std::vector<std::pair<std::vector<std::string>, long long>> words;
  words.reserve(word_freq.size());
  for (const auto& [w, f] : word_freq) {
    auto syms = base_symbols(w);
    for (const auto& s : syms) table.vocab_.insert(s);
    words.emplace_back(std::move(syms), f);
  }

  for (std::size_t round = 0; round < num_merges; ++round) {
    std::map<std::pair<std::string, std::string>, long long> pair_count;
    for (const auto& [syms, freq] : words) {
      for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
        pair_count[{syms[i], syms[i + 1]}] += freq;
      }
    }
    // Most frequent pair; lexicographic (left, right) on ties.
    const std::pair<std::string, std::string>* best = nullptr;
    long long best_count = 1;  // require count >= 2
    for (const auto& [pr, cnt] : pair_count) {
      if (cnt > best_count) {
        best_count = cnt;
        best = &pr;
      }
    }
    if (!best) break;
    MergeRule rule{best->first, best->second, best->first + best->second,
                   static_cast<int>(table.rules_.size())};
    if (rule.merged == kEndOfWord) break;  // marker must stay reserved
    for (auto& [syms, freq] : words) {
      for (std::size_t i = 0; i + 1 < syms.size();) {
        if (syms[i] == rule.left && syms[i + 1] == rule.right) {
          syms[i] = rule.merged;
          syms.erase(syms.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        } else {
          ++i;
        }
      }
    }
    table.rules_.push_back(std::move(rule));
  }
  table.index_rules();
  return table;
}

void MergeTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write merge table: " + path);
  out << "bpe-merges v1\n";
  for (const MergeRule& r : rules_) out << r.left << ' ' << r.right << '\n';
}

MergeTable MergeTable::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read merge table: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "bpe-merges v1") {
    throw std::runtime_error("bad merge table header in " + path);
  }
  MergeTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t sp = line.find(' ');
    if (sp == std::string::npos || sp == 0 || sp + 1 == line.size()) {
      throw std::runtime_error("malformed merge rule: " + line);
    }
    MergeRule r;
    r.left = line.substr(0, sp);
    r.right = line.substr(sp + 1);
    r.merged = r.left + r.right;
    r.rank = static_cast<int>(table.rules_.size());
    table.rules_.push_back(std::move(r));
  }
  table.index_rules();
  return table;
}

namespace {

void encode_word(const std::string& word, const MergeTable& table, DropoutConfig dropout,
                 RandomStream& rng, TokenSequence& out) {
  std::vector<std::string> syms = base_symbols(word);
  // Dropped merge applications, identified by (rank, position); once dropped
  // an application stays ineligible for the rest of this word.
  std::set<std::pair<int, std::size_t>> dropped;
  for (;;) {
    int best_rank = -1;
    std::size_t best_pos = syms.size();
    for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
      const auto r = table.rank_of(syms[i], syms[i + 1]);
      if (!r || dropped.count({*r, i})) continue;
      if (best_rank < 0 || *r < best_rank) {
        best_rank = *r;
        best_pos = i;
      }
    }
    if (best_rank < 0) break;
    if (dropout.p > 0.0 && rng.bernoulli(dropout.p)) {
      dropped.insert({best_rank, best_pos});
      continue;
    }
    syms[best_pos] += syms[best_pos + 1];
    syms.erase(syms.begin() + static_cast<std::ptrdiff_t>(best_pos) + 1);
    // Remap surviving drop marks; marks on the merged positions refer to
    // pairs that no longer exist.
    std::set<std::pair<int, std::size_t>> remapped;
    for (const auto& [rank, pos] : dropped) {
      if (pos == best_pos || pos == best_pos + 1) continue;
      remapped.insert({rank, pos > best_pos ? pos - 1 : pos});
    }
    dropped.swap(remapped);
  }
  out.insert(out.end(), syms.begin(), syms.end());
}

}  // namespace

TokenSequence encode(std::string_view text, const MergeTable& table, DropoutConfig dropout,
                     RandomStream& rng) {
  if (dropout.p < 0.0 || dropout.p > 1.0) {
    throw std::invalid_argument("dropout probability must be in [0,1]");
  }
  TokenSequence out;
  for (const std::string& word : whitespace_split(text)) {
    encode_word(word, table, dropout, rng, out);
  }
  return out;
}

std::string decode(const TokenSequence& tokens) {
  std::string joined;
  for (const std::string& t : tokens) joined += t;
  std::string out;
  out.reserve(joined.size());
  std::size_t i = 0;
  const std::string marker(MergeTable::kEndOfWord);
  while (i < joined.size()) {
    if (joined.compare(i, marker.size(), marker) == 0) {
      out.push_back(' ');
      i += marker.size();
    } else {
      out.push_back(joined[i]);
      ++i;
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace tokrot::bpe
