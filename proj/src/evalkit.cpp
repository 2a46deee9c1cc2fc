#include "tokrot/evalkit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace tokrot::evalkit {

std::string normalize_answer(std::string_view raw) {
  std::size_t begin = 0;
  std::size_t end = raw.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(raw[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(raw[end - 1]))) --end;
  std::string s(raw.substr(begin, end - begin));
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s.size() >= 2) {
    const char f = s.front();
    if ((f == '\'' || f == '"' || f == '`') && s.back() == f) {
      s = s.substr(1, s.size() - 2);
    }
  }
  return s;
}

bool exact_match(std::string_view pred, const std::vector<std::string>& gold) {
  if (gold.empty()) throw std::invalid_argument("exact_match: empty gold set");
  const std::string p = normalize_answer(pred);
  for (const std::string& g : gold) {
    if (p == normalize_answer(g)) return true;
  }
  return false;
}

int edit_distance(std::string_view a, std::string_view b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

bool score_common_substring(std::string_view pred, std::string_view word_a,
                            std::string_view word_b) {
  const std::string p = normalize_answer(pred);
  if (p.empty()) return false;
  return word_a.find(p) != std::string_view::npos && word_b.find(p) != std::string_view::npos;
}

std::size_t choose_by_perplexity(const std::vector<double>& mean_nlls) {
  if (mean_nlls.empty()) throw std::invalid_argument("choose_by_perplexity: empty scores");
  for (double v : mean_nlls) {
    if (!std::isfinite(v)) throw std::invalid_argument("choose_by_perplexity: non-finite score");
  }
  return static_cast<std::size_t>(
      std::min_element(mean_nlls.begin(), mean_nlls.end()) - mean_nlls.begin());
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read embedding table: " + path);
  std::size_t d = 0, n = 0;
  if (!(in >> d >> n) || d == 0) throw std::runtime_error("bad embedding table header in " + path);
  EmbeddingTable table;
  for (std::size_t i = 0; i < n; ++i) {
    std::string word;
    if (!(in >> word)) throw std::runtime_error("truncated embedding table: " + path);
    std::vector<double> vec(d);
    for (std::size_t k = 0; k < d; ++k) {
      if (!(in >> vec[k])) throw std::runtime_error("truncated embedding vector for " + word);
    }
    table.insert(word, std::move(vec));
  }
  return table;
}

void EmbeddingTable::insert(const std::string& word, std::vector<double> vec) {
  if (dim_ == 0) dim_ = vec.size();
  if (vec.size() != dim_) {
    throw std::invalid_argument("embedding dimension mismatch for '" + word + "'");
  }
  vectors_[word] = std::move(vec);
}

const std::vector<double>& EmbeddingTable::at(const std::string& word) const {
  auto it = vectors_.find(word);
  if (it == vectors_.end()) throw std::runtime_error("missing embedding for '" + word + "'");
  return it->second;
}

Composition embedding_composition(const EmbeddingTable& table, const std::string& word,
                                  const std::vector<std::string>& parts) {
  if (parts.empty()) throw std::invalid_argument("embedding_composition: no parts");
  const std::vector<double>& w = table.at(word);
  std::vector<double> sum(table.dimension(), 0.0);
  for (const std::string& part : parts) {
    const std::vector<double>& v = table.at(part);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
  }
  double dot = 0.0, nw = 0.0, ns = 0.0;
  for (std::size_t i = 0; i < sum.size(); ++i) {
    dot += w[i] * sum[i];
    nw += w[i] * w[i];
    ns += sum[i] * sum[i];
  }
  if (nw == 0.0 || ns == 0.0) {
    throw std::invalid_argument("embedding_composition: zero vector");
  }
  double cosine = dot / (std::sqrt(nw) * std::sqrt(ns));
  cosine = std::clamp(cosine, -1.0, 1.0);
  // Exact endpoints for the exact-alignment cases.
  if (dot * dot == nw * ns) cosine = dot > 0 ? 1.0 : -1.0;
  Composition c;
  c.cosine = cosine;
  c.angle_degrees = std::acos(cosine) * 180.0 / 3.14159265358979323846;
  return c;
}

LengthStats length_stats(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 2) throw std::invalid_argument("length_stats: need at least 2 pairs");
  const double n = static_cast<double>(pairs.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pairs) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pairs) {
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("degenerate regression");
  LengthStats s;
  if (syy == 0.0) {
    s.pearson_r = 0.0;  // constant y; correlation undefined, report 0
  } else if (sxy * sxy == sxx * syy) {
    s.pearson_r = sxy > 0 ? 1.0 : -1.0;
  } else {
    s.pearson_r = sxy / std::sqrt(sxx * syy);
  }
  s.slope = sxy / sxx;
  s.intercept = my - s.slope * mx;
  return s;
}

Report aggregate(const std::vector<ScoredRow>& rows) {
  struct Acc {
    std::size_t count = 0;
    double em_sum = 0.0;
    double ed_sum = 0.0;
    std::size_t ed_count = 0;
  };
  std::map<std::tuple<std::string, std::string, std::string>, Acc> groups;
  for (const ScoredRow& r : rows) {
    Acc& a = groups[{r.task, r.shot, r.perturbation}];
    a.count += 1;
    a.em_sum += r.em;
    if (r.has_ed) {
      a.ed_sum += r.ed;
      a.ed_count += 1;
    }
  }
  Report report;
  for (const auto& [key, a] : groups) {
    ReportCell cell;
    cell.task = std::get<0>(key);
    cell.shot = std::get<1>(key);
    cell.perturbation = std::get<2>(key);
    cell.count = a.count;
    cell.em_mean = a.count ? a.em_sum / static_cast<double>(a.count) : 0.0;
    cell.has_ed = a.ed_count > 0;
    cell.ed_mean = a.ed_count ? a.ed_sum / static_cast<double>(a.ed_count) : 0.0;
    report.cells.push_back(std::move(cell));
  }
  return report;
}

std::string Report::to_csv() const {
  std::ostringstream out;
  out << "task,shot,perturbation,count,em_mean,ed_mean\n";
  for (const ReportCell& c : cells) {
    out << c.task << ',' << c.shot << ',' << c.perturbation << ',' << c.count << ',';
    out << c.em_mean << ',';
    if (c.has_ed) out << c.ed_mean;
    out << '\n';
  }
  return out.str();
}

}  // namespace tokrot::evalkit
