#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tokrot::evalkit {

struct Prediction {
  std::string id;
  std::string text;  // raw model output
};

// Trim whitespace, strip one trailing period, strip one matching pair of
// surrounding quotes or backticks. Case is preserved.
std::string normalize_answer(std::string_view raw);

bool exact_match(std::string_view pred, const std::vector<std::string>& gold);

// Levenshtein distance, unit costs.
int edit_distance(std::string_view a, std::string_view b);

// Any-valid-substring rule: the normalized prediction is accepted iff it is
// non-empty and a contiguous substring of both words.
bool score_common_substring(std::string_view pred, std::string_view word_a,
                            std::string_view word_b);

// Index of the minimal mean NLL (equivalently minimal perplexity); ties go
// to the lowest index.
std::size_t choose_by_perplexity(const std::vector<double>& mean_nlls);

// word -> embedding vector, fixed dimension. Text format: "d n" header then
// one "word v1 .. vd" line per word.
class EmbeddingTable {
 public:
  static EmbeddingTable load(const std::string& path);

  void insert(const std::string& word, std::vector<double> vec);
  const std::vector<double>& at(const std::string& word) const;  // throws naming the word
  std::size_t dimension() const { return dim_; }

 private:
  std::size_t dim_ = 0;
  std::map<std::string, std::vector<double>> vectors_;
};

struct Composition {
  double cosine = 0.0;
  double angle_degrees = 0.0;
};

// Cosine and angle between v(word) and the sum of v(part) over parts.
Composition embedding_composition(const EmbeddingTable& table, const std::string& word,
                                  const std::vector<std::string>& parts);

struct LengthStats {
  double pearson_r = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
};

// Pearson correlation and least-squares line over (original, corrupted)
// length pairs. Throws on fewer than 2 pairs or constant x.
LengthStats length_stats(const std::vector<std::pair<double, double>>& pairs);

struct ScoredRow {
  std::string task;
  std::string shot;
  std::string perturbation;
  double em = 0.0;
  double ed = 0.0;
  bool has_ed = false;
};

struct ReportCell {
  std::string task;
  std::string shot;
  std::string perturbation;
  std::size_t count = 0;
  double em_mean = 0.0;
  double ed_mean = 0.0;
  bool has_ed = false;
};

struct Report {
  std::vector<ReportCell> cells;  // sorted by (task, shot, perturbation)

  std::string to_csv() const;
};

Report aggregate(const std::vector<ScoredRow>& rows);

}  // namespace tokrot::evalkit
