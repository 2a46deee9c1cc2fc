#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tokrot/random.hpp"
#include "tokrot/textcore.hpp"

namespace tokrot::probegen {

enum class ProbeKind { CL, WU, CC, NC, NCR, CCV, CS, LCS, LCSeq };

std::string kind_name(ProbeKind k);
ProbeKind kind_from_name(const std::string& name);
const std::vector<ProbeKind>& all_kinds();

enum class CaseMode { upper, lower, title };

// A synthesized probing task with its exact gold answer set.
struct ProbeItem {
  ProbeKind kind = ProbeKind::CC;
  std::string word_a;       // primary input word
  std::string word_b;       // second word, inter-token kinds only
  int k = 0;                // position (NC/NCR), count (CC), rotation (CL)
  CaseMode mode = CaseMode::lower;  // CCV only
  std::string rendered;     // scrambled/cycled form shown in the prompt
  std::string prompt;
  std::vector<std::string> gold;

  TextRecord to_record(const std::string& id, const std::string& split) const;
};

// Prompt templates, one per kind, with {placeholder} substitution.
class TemplateSet {
 public:
  static TemplateSet defaults();
  static TemplateSet load(const std::string& path);

  std::string render(ProbeKind kind, const std::map<std::string, std::string>& values) const;
  int version() const { return version_; }

 private:
  int version_ = 1;
  std::map<std::string, std::string> by_kind_;
};

// ---- string-algorithm oracles -------------------------------------------

// The unique character occurring exactly `count` times; throws "ambiguous"
// when zero or several characters tie.
char32_t oracle_char_count(std::string_view word, int count);
// 1-indexed.
char32_t oracle_nth_char(std::string_view word, int k);
char32_t oracle_nth_char_rev(std::string_view word, int k);
std::string convert_case(std::string_view word, CaseMode mode);

// All maximal common substrings (not properly contained in a longer common
// substring).
std::set<std::string> common_substrings(std::string_view a, std::string_view b);
// All distinct common substrings of maximal length.
std::set<std::string> longest_common_substring(std::string_view a, std::string_view b);

struct SubsequenceResult {
  std::set<std::string> sequences;  // all distinct maximal-length ones
  bool truncated = false;           // enumeration hit the cap
};
SubsequenceResult longest_common_subsequence(std::string_view a, std::string_view b,
                                             std::size_t cap = 100000);

// ---- generators ----------------------------------------------------------

std::string rotate_left(std::string_view word, int rotation);

// rotation = 0 draws uniformly from the valid rotations. Throws when the
// word is shorter than 2 characters or no rotation changes it.
ProbeItem gen_cycled(const std::string& word, int rotation, RandomStream& rng,
                     const TemplateSet& templates);
ProbeItem gen_unscramble(const std::string& word, RandomStream& rng, const TemplateSet& templates);

struct SplitSpec {
  std::map<ProbeKind, std::pair<int, int>> counts;  // kind -> (train, test)

  // Reference benchmark sizes scaled by 1/100.
  static SplitSpec desk_scale();
};

struct ProbeStreams {
  std::vector<ProbeItem> train;
  std::vector<ProbeItem> test;
};

// Deterministic given rng seed; train/test word pools are disjoint, per-kind
// counts match the split exactly. Throws naming the kind when a split is
// unsatisfiable.
ProbeStreams synthesize(const std::vector<std::string>& words, const SplitSpec& split,
                        const TemplateSet& templates, RandomStream& rng);

}  // namespace tokrot::probegen
