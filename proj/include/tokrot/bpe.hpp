#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tokrot/random.hpp"

namespace tokrot::bpe {

using TokenSequence = std::vector<std::string>;

struct MergeRule {
  std::string left;
  std::string right;
  std::string merged;  // always left + right
  int rank = 0;        // 0 = learned first
};

struct DropoutConfig {
  double p = 0.0;  // probability of skipping an individual merge application
};

// Rank-ordered merge rules plus the vocabulary they induce. Immutable after
// training/loading; safe to share across threads.
class MergeTable {
 public:
  static constexpr std::string_view kEndOfWord = "</w>";

  // Classic BPE training: whitespace pre-tokenization, end-of-word marker,
  // greedy most-frequent-pair merging. Ties break lexicographically on
  // (left, right); stops when no pair occurs at least twice.
  static MergeTable train(const std::vector<std::string>& corpus, std::size_t num_merges);

  static MergeTable load(const std::string& path);
  void save(const std::string& path) const;

  const std::vector<MergeRule>& rules() const { return rules_; }
  std::optional<int> rank_of(std::string_view left, std::string_view right) const;
  bool in_vocab(const std::string& token) const { return vocab_.count(token) > 0; }
  // Sorted, for deterministic uniform sampling in token-level noise.
  std::vector<std::string> vocab_list() const;

 private:
  std::vector<MergeRule> rules_;
  std::unordered_map<std::string, int> pair_rank_;  // key: left + '\x1f' + right
  std::unordered_set<std::string> vocab_;

  void index_rules();
};

// Each whitespace-delimited word is encoded independently. With p = 0 this is
// canonical greedy BPE (no randomness consumed); each merge application is
// skipped with probability p and stays ineligible for the rest of that word.
// Unknown characters pass through as singleton tokens.
TokenSequence encode(std::string_view text, const MergeTable& table, DropoutConfig dropout,
                     RandomStream& rng);

inline TokenSequence encode(std::string_view text, const MergeTable& table) {
  RandomStream rng(0);
  return encode(text, table, DropoutConfig{0.0}, rng);
}

// Inverse of encode for single-space-separated input, at any dropout rate.
std::string decode(const TokenSequence& tokens);

}  // namespace tokrot::bpe
