// Acceptance suite. Exercises the library and the CLI end to end and prints
// one pass/fail line per criterion. Usage: acceptance <tokrot-binary> <data-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>
#include <unistd.h>

#include "tokrot/pipeline.hpp"

using namespace tokrot;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool ok, const std::string& detail = "") {
  std::cout << (ok ? "PASS" : "FAIL") << " " << index << ": " << name;
  if (!ok && !detail.empty()) std::cout << " (" << detail << ")";
  std::cout << std::endl;
  if (!ok) ++g_failures;
}

struct Check {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string g_tokrot;
fs::path g_data;
fs::path g_work;

int run_cli(const std::string& args) {
  const std::string cmd = g_tokrot + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

std::string random_word(RandomStream& rng, std::size_t max_len, int alphabet_size) {
  const std::size_t len = 1 + static_cast<std::size_t>(rng.below(max_len));
  std::string w;
  for (std::size_t i = 0; i < len; ++i) {
    w += static_cast<char>('a' + rng.below(static_cast<std::uint64_t>(alphabet_size)));
  }
  return w;
}

std::multiset<char32_t> scalar_multiset(const std::string& s) {
  const std::u32string u = decode_utf8(s);
  return std::multiset<char32_t>(u.begin(), u.end());
}

// ---- independent brute-force oracles (criterion 2) ------------------------

std::set<std::string> brute_common(const std::string& a, const std::string& b) {
  std::set<std::string> subs, common;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t l = 1; l + i <= a.size(); ++l) subs.insert(a.substr(i, l));
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t l = 1; l + i <= b.size(); ++l) {
      if (subs.count(b.substr(i, l))) common.insert(b.substr(i, l));
    }
  }
  return common;
}

std::set<std::string> brute_maximal(const std::string& a, const std::string& b) {
  const auto common = brute_common(a, b);
  std::set<std::string> out;
  for (const auto& s : common) {
    bool contained = false;
    for (const auto& t : common) {
      if (t.size() > s.size() && t.find(s) != std::string::npos) contained = true;
    }
    if (!contained) out.insert(s);
  }
  return out;
}

std::set<std::string> brute_longest_sub(const std::string& a, const std::string& b) {
  const auto common = brute_common(a, b);
  std::size_t best = 0;
  for (const auto& s : common) best = std::max(best, s.size());
  std::set<std::string> out;
  for (const auto& s : common) {
    if (s.size() == best) out.insert(s);
  }
  return out;
}

std::set<std::string> brute_lcseq(const std::string& a, const std::string& b) {
  std::set<std::string> out;
  std::size_t best = 0;
  for (std::size_t mask = 1; mask < (1u << a.size()); ++mask) {
    std::string s;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (mask & (1u << i)) s += a[i];
    }
    if (s.size() < best) continue;
    std::size_t j = 0;
    for (char c : b) {
      if (j < s.size() && c == s[j]) ++j;
    }
    if (j != s.size()) continue;
    if (s.size() > best) {
      best = s.size();
      out.clear();
    }
    out.insert(s);
  }
  return out;
}

int brute_edit(const std::string& a, const std::string& b,
               std::map<std::pair<std::size_t, std::size_t>, int>& memo, std::size_t i,
               std::size_t j) {
  if (i == a.size()) return static_cast<int>(b.size() - j);
  if (j == b.size()) return static_cast<int>(a.size() - i);
  const auto key = std::make_pair(i, j);
  const auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  int best = brute_edit(a, b, memo, i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
  best = std::min(best, brute_edit(a, b, memo, i + 1, j) + 1);
  best = std::min(best, brute_edit(a, b, memo, i, j + 1) + 1);
  memo[key] = best;
  return best;
}

// ---- criteria -------------------------------------------------------------

void criterion_1_golden() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto tpl = probegen::TemplateSet::defaults();
    RandomStream rng(1);

    c.require(probegen::rotate_left("more", 2) == "remo", "rotation of 'more'");
    const auto cycled = probegen::gen_cycled("more", 2, rng, tpl);
    c.require(cycled.rendered == "remo" && cycled.gold == std::vector<std::string>{"more"},
              "cycled remo->more");

    // scrambled forms: valid anagram, not the word itself, gold is the word
    for (const auto& [scrambled, word] :
         std::vector<std::pair<std::string, std::string>>{{"nad", "and"}, {"moeh", "home"}}) {
      c.require(scrambled != word && scalar_multiset(scrambled) == scalar_multiset(word),
                "scramble " + scrambled);
      const auto item = probegen::gen_unscramble(word, rng, tpl);
      c.require(item.gold == std::vector<std::string>{word}, "unscramble gold " + word);
    }

    c.require(probegen::oracle_char_count("messrs", 3) == U's', "count messrs");
    c.require(probegen::oracle_char_count("undertake", 2) == U'e', "count undertake");
    c.require(probegen::oracle_nth_char("dual", 4) == U'l', "nth dual");
    c.require(probegen::oracle_nth_char("myron", 4) == U'o', "nth myron");
    c.require(probegen::oracle_nth_char_rev("dual", 2) == U'a', "nth-rev dual");
    c.require(probegen::oracle_nth_char_rev("pensioner", 2) == U'e', "nth-rev pensioner");
    c.require(probegen::common_substrings("critical", "conscious") ==
                  std::set<std::string>{"c", "i"},
              "common substrings");
    c.require(probegen::longest_common_substring("cow", "condition") ==
                  std::set<std::string>{"co"},
              "longest common substring");
    c.require(probegen::longest_common_subsequence("illustrate", "critical").sequences.count(
                  "ita") == 1,
              "longest common subsequence");
  } catch (const std::exception& e) {
    c.require(false, e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.require(secs < 1.0, "too slow");
  report(1, "golden example pairs", c.ok, c.detail);
}

void criterion_2_oracle_equivalence() {
  Check c;
  try {
    RandomStream rng(20202);
    for (int i = 0; i < 1000; ++i) {
      const std::string a = random_word(rng, 10, 6);
      const std::string b = random_word(rng, 10, 6);
      c.require(probegen::common_substrings(a, b) == brute_maximal(a, b), "CS " + a + "/" + b);
      c.require(probegen::longest_common_substring(a, b) == brute_longest_sub(a, b),
                "LCS " + a + "/" + b);
      std::map<std::pair<std::size_t, std::size_t>, int> memo;
      c.require(evalkit::edit_distance(a, b) == brute_edit(a, b, memo, 0, 0),
                "ED " + a + "/" + b);
    }
    for (int i = 0; i < 1000; ++i) {
      const std::string a = random_word(rng, 8, 4);
      const std::string b = random_word(rng, 8, 4);
      const auto got = probegen::longest_common_subsequence(a, b);
      c.require(!got.truncated && got.sequences == brute_lcseq(a, b), "LCSeq " + a + "/" + b);
    }
  } catch (const std::exception& e) {
    c.require(false, e.what());
  }
  report(2, "oracles match brute force on 1000 random pairs", c.ok, c.detail);
}

void criterion_3_dropout_limits() {
  Check c;
  try {
    const auto table = bpe::MergeTable::train({"ab ab ab ab ab"}, 10);
    c.require(table.rules().size() == 2 && table.rules()[0].merged == "ab" &&
                  table.rules()[1].merged == "ab</w>",
              "toy table rules");
    c.require(bpe::encode("ab ab", table) == bpe::TokenSequence{"ab</w>", "ab</w>"},
              "canonical greedy");
    RandomStream r1(5), r2(77);
    c.require(bpe::encode("ab ab", table, {0.0}, r1) == bpe::encode("ab ab", table, {0.0}, r2),
              "p=0 determinism");

    const auto big = bpe::MergeTable::train({"the them they these then the them"}, 50);
    RandomStream r3(9);
    c.require(bpe::encode("the them", big, {1.0}, r3) ==
                  bpe::TokenSequence{"t", "h", "e", "</w>", "t", "h", "e", "m", "</w>"},
              "p=1 character tokens");

    const auto rt = bpe::MergeTable::train(
        {"believe believes believed belief the then there these words are here"}, 80);
    RandomStream wordgen(515);
    const double rates[] = {0.0, 0.2, 0.8, 1.0};
    for (int i = 0; i < 1000; ++i) {
      std::string text;
      const int n_words = 1 + static_cast<int>(wordgen.below(4));
      for (int w = 0; w < n_words; ++w) {
        if (w) text += ' ';
        text += random_word(wordgen, 8, 26);
      }
      RandomStream rng(static_cast<std::uint64_t>(i) + 1);
      const double p = rates[wordgen.below(4)];
      if (bpe::decode(bpe::encode(text, rt, {p}, rng)) != text) {
        c.require(false, "round trip failed on '" + text + "'");
        break;
      }
    }
  } catch (const std::exception& e) {
    c.require(false, e.what());
  }
  report(3, "dropout limits and 1000 round trips", c.ok, c.detail);
}

std::vector<std::string> build_corpus(std::size_t n) {
  std::vector<std::string> corpus;
  RandomStream rng(808);
  const char* punct = ".,;!?";
  for (std::size_t i = 0; i < n; ++i) {
    std::string sent;
    const int words = 3 + static_cast<int>(rng.below(8));
    for (int w = 0; w < words; ++w) {
      if (w) sent += ' ';
      sent += random_word(rng, 9, 26);
      if (rng.below(4) == 0) sent += punct[rng.below(5)];
    }
    corpus.push_back(sent);
  }
  return corpus;
}

void criterion_4_perturbation_invariants() {
  Check c;
  try {
    const auto corpus = build_corpus(1000);
    perturb::PerturbationSpec spec;
    spec.level = perturb::Level::character;
    spec.kind = perturb::Kind::permute;
    spec.p_permute = 1.0;
    spec.n = 3;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      RandomStream rng = derive_substream(4040, i);
      const std::string out = perturb::char_permute(corpus[i], spec, rng);
      const std::u32string in_u = decode_utf8(corpus[i]);
      const std::u32string out_u = decode_utf8(out);
      if (in_u.size() != out_u.size()) {
        c.require(false, "length changed at record " + std::to_string(i));
        break;
      }
      const auto spans = segment_words(in_u);
      std::size_t cursor = 0;
      bool ok = true;
      for (const auto& span : spans) {
        for (std::size_t p = cursor; p < span.begin; ++p) ok = ok && in_u[p] == out_u[p];
        std::multiset<char32_t> a(in_u.begin() + span.begin, in_u.begin() + span.end);
        std::multiset<char32_t> b(out_u.begin() + span.begin, out_u.begin() + span.end);
        ok = ok && a == b;
        cursor = span.end;
      }
      for (std::size_t p = cursor; p < in_u.size(); ++p) ok = ok && in_u[p] == out_u[p];
      if (!ok) {
        c.require(false, "char invariant broken at record " + std::to_string(i));
        break;
      }
    }

    perturb::PerturbationSpec tok;
    tok.level = perturb::Level::token;
    tok.kind = perturb::Kind::permute;
    tok.p_permute = 1.0;
    tok.n = 3;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      std::istringstream in(corpus[i]);
      std::vector<std::string> tokens;
      std::string t;
      while (in >> t) tokens.push_back(t);
      RandomStream rng = derive_substream(5050, i);
      const auto out = perturb::token_permute(tokens, tok, rng);
      if (std::multiset<std::string>(tokens.begin(), tokens.end()) !=
          std::multiset<std::string>(out.begin(), out.end())) {
        c.require(false, "token multiset broken at record " + std::to_string(i));
        break;
      }
    }
  } catch (const std::exception& e) {
    c.require(false, e.what());
  }
  report(4, "permutation invariants over 1000-sentence corpus", c.ok, c.detail);
}

void criterion_5_noise_rates() {
  Check c;
  try {
    const std::string word = "abcde";  // one chunk at n = 5
    const int trials = 20000;
    auto measure = [&](double ins, double del, double sub) {
      perturb::PerturbationSpec spec;
      spec.level = perturb::Level::character;
      spec.kind = perturb::Kind::noise;
      spec.n = 5;
      spec.rate_insert = ins;
      spec.rate_delete = del;
      spec.rate_substitute = sub;
      spec.alphabet = Alphabet::from_utf8("abcdefghijklmnopqrstuvwxyz");
      int changed = 0;
      long long delta = 0;
      for (int i = 0; i < trials; ++i) {
        RandomStream rng = derive_substream(606, static_cast<std::uint64_t>(i));
        const std::string out = perturb::char_noise(word, spec, rng);
        delta += static_cast<long long>(out.size()) - static_cast<long long>(word.size());
        if (out != word) ++changed;
      }
      return std::make_pair(static_cast<double>(changed) / trials,
                            static_cast<double>(delta) / trials);
    };

    const auto [ins_freq, ins_delta] = measure(0.1, 0.0, 0.0);
    c.require(std::abs(ins_freq - 0.10) <= 0.01,
              "insert freq " + std::to_string(ins_freq));
    c.require(std::abs(ins_delta - 0.1) <= 0.01, "insert delta " + std::to_string(ins_delta));

    const auto [del_freq, del_delta] = measure(0.0, 0.1, 0.0);
    c.require(std::abs(del_freq - 0.10) <= 0.01, "delete freq " + std::to_string(del_freq));
    c.require(std::abs(del_delta - (-0.1)) <= 0.01,
              "delete delta " + std::to_string(del_delta));

    const auto [sub_freq, sub_delta] = measure(0.0, 0.0, 0.1);
    // substitution may redraw the original character (1/26 of rolls)
    c.require(std::abs(sub_freq - 0.10) <= 0.01, "substitute freq " + std::to_string(sub_freq));
    c.require(sub_delta == 0.0, "substitute changed length");

    // combined: expected delta per chunk = rate_insert - rate_delete
    const auto [all_freq, all_delta] = measure(0.12, 0.04, 0.1);
    (void)all_freq;
    c.require(std::abs(all_delta - 0.08) <= 0.008,
              "combined delta " + std::to_string(all_delta));
  } catch (const std::exception& e) {
    c.require(false, e.what());
  }
  report(5, "noise rates over 20000 chunks", c.ok, c.detail);
}

void criterion_6_determinism() {
  Check c;
  try {
    const fs::path dir = g_work / "determinism";
    fs::create_directories(dir);

    // a small corruptible dataset
    std::vector<nlohmann::json> recs;
    RandomStream rng(33);
    for (int i = 0; i < 40; ++i) {
      nlohmann::json j;
      j["id"] = "r" + std::to_string(i);
      std::string prompt;
      for (int w = 0; w < 6; ++w) {
        if (w) prompt += ' ';
        prompt += random_word(rng, 8, 26);
      }
      j["prompt"] = prompt;
      j["gold"] = nlohmann::json::array({"x"});
      j["task"] = "demo";
      j["meta"] = nlohmann::json::object();
      recs.push_back(j);
    }
    pipeline::write_jsonl((dir / "in.jsonl").string(), recs);
    pipeline::write_file((dir / "spec.json").string(),
                         R"({"level": "character", "kind": "noise", "n": 3})");

    std::vector<std::string> outputs;
    for (const int workers : {1, 4, 8, 1}) {
      const std::string out =
          (dir / ("out_w" + std::to_string(outputs.size()) + ".jsonl")).string();
      const int rc = run_cli("corrupt --input " + (dir / "in.jsonl").string() + " --output " +
                             out + " --spec " + (dir / "spec.json").string() +
                             " --adapter probes --seed 97 --workers " + std::to_string(workers));
      c.require(rc == 0, "corrupt exited " + std::to_string(rc));
      outputs.push_back(pipeline::read_file(out));
    }
    for (std::size_t i = 1; i < outputs.size(); ++i) {
      c.require(outputs[i] == outputs[0], "corrupt outputs differ across runs/workers");
    }

    pipeline::write_file((dir / "split.json").string(), R"({"NC": [8, 2], "CC": [6, 2]})");
    std::vector<std::string> gen_out;
    for (int run = 0; run < 2; ++run) {
      const std::string train = (dir / ("train" + std::to_string(run) + ".jsonl")).string();
      const std::string test = (dir / ("test" + std::to_string(run) + ".jsonl")).string();
      const int rc = run_cli("gen-probes --words " + (g_data / "words.txt").string() +
                             " --out-train " + train + " --out-test " + test + " --split " +
                             (dir / "split.json").string() + " --seed 12");
      c.require(rc == 0, "gen-probes exited " + std::to_string(rc));
      gen_out.push_back(pipeline::read_file(train) + "\x1f" + pipeline::read_file(test));
    }
    c.require(gen_out[0] == gen_out[1], "gen-probes outputs differ across runs");
  } catch (const std::exception& e) {
    c.require(false, e.what());
  }
  report(6, "byte-identical reruns at 1, 4, 8 workers", c.ok, c.detail);
}

void criterion_7_humaneval() {
  Check c;
  try {
    const fs::path dir = g_work / "humaneval";
    fs::create_directories(dir);
    std::vector<nlohmann::json> recs;
    RandomStream rng(70);
    for (int i = 0; i < 164; ++i) {
      const std::string name = "func_" + std::to_string(i);
      std::string doc;
      for (int w = 0; w < 8; ++w) {
        if (w) doc += ' ';
        doc += random_word(rng, 7, 26);
      }
      nlohmann::json j;
      j["task_id"] = "Synth/" + std::to_string(i);
      j["entry_point"] = name;
      j["prompt"] = "def " + name + "(x, y):\n    \"\"\"" + doc + "\"\"\"\n    pass\n";
      j["canonical_solution"] = "    return x + y\n";
      j["test"] = "def check(candidate):\n    assert candidate(1, 2) == 3\n";
      recs.push_back(j);
    }
    pipeline::write_jsonl((dir / "in.jsonl").string(), recs);

    pipeline::CorruptConfig cfg;
    cfg.input_path = (dir / "in.jsonl").string();
    cfg.output_path = (dir / "out.jsonl").string();
    cfg.adapter = "humaneval";
    cfg.seed = 4242;
    cfg.spec.level = perturb::Level::character;
    cfg.spec.kind = perturb::Kind::noise;
    const auto res = pipeline::cmd_corrupt(cfg);
    c.require(res.record_count == 164, "record count");

    const auto out = pipeline::read_jsonl(cfg.output_path);
    c.require(out.size() == 164, "output size");
    for (std::size_t i = 0; i < out.size(); ++i) {
      const std::string name = recs[i]["entry_point"].get<std::string>();
      const std::string in_prompt = recs[i]["prompt"].get<std::string>();
      const std::string out_prompt = out[i]["prompt"].get<std::string>();
      if (out_prompt.find("def " + name + "(") == std::string::npos) {
        c.require(false, "entry point lost in record " + std::to_string(i));
        break;
      }
      const auto in_region = pipeline::find_docstring_region(in_prompt, name);
      const auto out_region = pipeline::find_docstring_region(out_prompt, name);
      if (!in_region || !out_region) {
        c.require(false, "docstring lost in record " + std::to_string(i));
        break;
      }
      const std::string in_outside =
          in_prompt.substr(0, in_region->first) + in_prompt.substr(in_region->second);
      const std::string out_outside =
          out_prompt.substr(0, out_region->first) + out_prompt.substr(out_region->second);
      if (in_outside != out_outside) {
        c.require(false, "non-docstring bytes changed in record " + std::to_string(i));
        break;
      }
      if (out[i]["canonical_solution"] != recs[i]["canonical_solution"] ||
          out[i]["test"] != recs[i]["test"]) {
        c.require(false, "code fields changed in record " + std::to_string(i));
        break;
      }
    }
  } catch (const std::exception& e) {
    c.require(false, e.what());
  }
  report(7, "docstring-only corruption on 164-record fixture", c.ok, c.detail);
}

void criterion_8_desk_scale() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    std::istringstream words_in(pipeline::read_file((g_data / "words.txt").string()));
    std::vector<std::string> words;
    std::string line;
    while (std::getline(words_in, line)) {
      if (!line.empty() && line[0] != '#') words.push_back(line);
    }
    const auto split = probegen::SplitSpec::desk_scale();
    RandomStream rng(88);
    const auto streams =
        probegen::synthesize(words, split, probegen::TemplateSet::defaults(), rng);

    std::map<probegen::ProbeKind, std::pair<int, int>> counts;
    for (const auto& item : streams.train) counts[item.kind].first += 1;
    for (const auto& item : streams.test) counts[item.kind].second += 1;
    for (const auto& [kind, want] : split.counts) {
      if (counts[kind] != want) {
        c.require(false, "count mismatch for " + probegen::kind_name(kind));
      }
    }

    std::set<std::string> train_words, test_words;
    for (const auto& item : streams.train) {
      train_words.insert(item.word_a);
      if (!item.word_b.empty()) train_words.insert(item.word_b);
    }
    for (const auto& item : streams.test) {
      test_words.insert(item.word_a);
      if (!item.word_b.empty()) test_words.insert(item.word_b);
    }
    for (const auto& w : test_words) {
      if (train_words.count(w)) c.require(false, "word in both splits: " + w);
    }

    auto verify = [&c](const probegen::ProbeItem& item) {
      using probegen::ProbeKind;
      const std::set<std::string> gold(item.gold.begin(), item.gold.end());
      switch (item.kind) {
        case ProbeKind::CC:
          c.require(gold == std::set<std::string>{encode_utf8(std::u32string(
                                1, probegen::oracle_char_count(item.word_a, item.k)))},
                    "CC gold for " + item.word_a);
          break;
        case ProbeKind::NC:
          c.require(gold == std::set<std::string>{encode_utf8(std::u32string(
                                1, probegen::oracle_nth_char(item.word_a, item.k)))},
                    "NC gold for " + item.word_a);
          break;
        case ProbeKind::NCR:
          c.require(gold == std::set<std::string>{encode_utf8(std::u32string(
                                1, probegen::oracle_nth_char_rev(item.word_a, item.k)))},
                    "NCR gold for " + item.word_a);
          break;
        case ProbeKind::CCV:
          c.require(gold == std::set<std::string>{probegen::convert_case(item.word_a, item.mode)},
                    "CCV gold for " + item.word_a);
          break;
        case ProbeKind::CS:
          c.require(gold == probegen::common_substrings(item.word_a, item.word_b),
                    "CS gold for " + item.word_a);
          break;
        case ProbeKind::LCS:
          c.require(gold == probegen::longest_common_substring(item.word_a, item.word_b),
                    "LCS gold for " + item.word_a);
          break;
        case ProbeKind::LCSeq:
          c.require(gold ==
                        probegen::longest_common_subsequence(item.word_a, item.word_b).sequences,
                    "LCSeq gold for " + item.word_a);
          break;
        case ProbeKind::CL:
          c.require(gold == std::set<std::string>{item.word_a} &&
                        probegen::rotate_left(item.word_a, item.k) == item.rendered,
                    "CL gold for " + item.word_a);
          break;
        case ProbeKind::WU:
          c.require(gold == std::set<std::string>{item.word_a} && item.rendered != item.word_a &&
                        scalar_multiset(item.rendered) == scalar_multiset(item.word_a),
                    "WU gold for " + item.word_a);
          break;
      }
    };
    for (const auto& item : streams.train) verify(item);
    for (const auto& item : streams.test) verify(item);
  } catch (const std::exception& e) {
    c.require(false, e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.require(secs < 10.0, "too slow: " + std::to_string(secs) + "s");
  report(8, "desk-scale synthesis counts, disjointness, re-verification", c.ok, c.detail);
}

void criterion_9_analysis() {
  Check c;
  try {
    // character-level lengths are invariant under char_permute
    const auto corpus = build_corpus(100);
    perturb::PerturbationSpec spec;
    spec.level = perturb::Level::character;
    spec.kind = perturb::Kind::permute;
    spec.p_permute = 1.0;
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      RandomStream rng = derive_substream(909, i);
      const std::string out = perturb::char_permute(corpus[i], spec, rng);
      pairs.emplace_back(static_cast<double>(decode_utf8(corpus[i]).size()),
                         static_cast<double>(decode_utf8(out).size()));
    }
    const auto stats = evalkit::length_stats(pairs);
    c.require(stats.pearson_r == 1.0, "r not exactly 1.0");

    evalkit::EmbeddingTable table;
    table.insert("whole", {3.0, 4.0});
    table.insert("self", {3.0, 4.0});
    const auto self = evalkit::embedding_composition(table, "whole", {"self"});
    c.require(self.cosine == 1.0 && self.angle_degrees == 0.0, "self composition");

    evalkit::EmbeddingTable diag;
    diag.insert("w", {1.0, 0.0});
    diag.insert("p", {1.0, 1.0});
    const auto comp = evalkit::embedding_composition(diag, "w", {"p"});
    c.require(std::abs(comp.cosine - 0.70711) <= 1e-5, "cosine " + std::to_string(comp.cosine));
    c.require(std::abs(comp.angle_degrees - 45.0) <= 1e-5,
              "angle " + std::to_string(comp.angle_degrees));
  } catch (const std::exception& e) {
    c.require(false, e.what());
  }
  report(9, "length correlation and embedding composition sanity", c.ok, c.detail);
}

void criterion_10_scoring_fixture() {
  Check c;
  try {
    const fs::path dir = g_work / "scoring";
    fs::create_directories(dir);

    std::vector<nlohmann::json> recs;
    auto rec = [](const std::string& id, const std::string& task,
                  const std::vector<std::string>& gold, const nlohmann::json& meta) {
      nlohmann::json j;
      j["id"] = id;
      j["prompt"] = "q";
      j["gold"] = gold;
      j["task"] = task;
      j["meta"] = meta;
      return j;
    };
    const nlohmann::json none = nlohmann::json::object();
    nlohmann::json cs_meta;
    cs_meta["word_a"] = "critical";
    cs_meta["word_b"] = "conscious";

    recs.push_back(rec("n1", "NC", {"u"}, none));
    recs.push_back(rec("n2", "NC", {"r"}, none));
    recs.push_back(rec("n3", "NC", {"e"}, none));
    recs.push_back(rec("n4", "NC", {"o"}, none));
    recs.push_back(rec("c1", "CC", {"s"}, none));
    recs.push_back(rec("c2", "CC", {"s"}, none));
    recs.push_back(rec("s1", "CS", {"c", "i"}, cs_meta));
    recs.push_back(rec("s2", "CS", {"c", "i"}, cs_meta));
    recs.push_back(rec("s3", "CS", {"c", "i"}, cs_meta));
    recs.push_back(rec("s4", "CS", {"c", "i"}, cs_meta));
    pipeline::write_jsonl((dir / "recs.jsonl").string(), recs);

    // hand-scored: NC em 2/4, ed (0+0+1+3)/4 = 1.0; CC em 1/2, ed 0.5;
    // CS em 2/4, ed (0+0+1+1)/4 = 0.5
    std::vector<std::pair<std::string, std::string>> preds = {
        {"n1", "u"},     {"n2", "r."}, {"n3", "a"}, {"n4", "xyz"}, {"c1", "'s'"},
        {"c2", "t"},     {"s1", "c"},  {"s2", "i."}, {"s3", "z"},  {"s4", "ci"}};
    std::vector<nlohmann::json> pred_rows;
    for (const auto& [id, text] : preds) {
      nlohmann::json p;
      p["id"] = id;
      p["text"] = text;
      pred_rows.push_back(p);
    }
    pipeline::write_jsonl((dir / "preds.jsonl").string(), pred_rows);

    pipeline::EvaluateConfig cfg;
    cfg.records_path = (dir / "recs.jsonl").string();
    cfg.predictions_path = (dir / "preds.jsonl").string();
    cfg.output_prefix = (dir / "report").string();
    cfg.report_format = "csv";
    pipeline::cmd_evaluate(cfg);

    std::istringstream csv(pipeline::read_file((dir / "report.csv").string()));
    std::string line;
    std::getline(csv, line);
    c.require(line == "task,shot,perturbation,count,em_mean,ed_mean", "csv header: " + line);
    std::map<std::string, double> em_cells, ed_cells;
    std::map<std::string, int> cell_counts;
    while (std::getline(csv, line)) {
      if (line.empty()) continue;
      std::istringstream row(line);
      std::string task, shot, pert, count, em, ed;
      std::getline(row, task, ',');
      std::getline(row, shot, ',');
      std::getline(row, pert, ',');
      std::getline(row, count, ',');
      std::getline(row, em, ',');
      std::getline(row, ed, ',');
      em_cells[task] = std::stod(em);
      if (!ed.empty()) ed_cells[task] = std::stod(ed);
      cell_counts[task] = std::stoi(count);
    }
    c.require(em_cells.size() == 3, "expected 3 cells, got " + std::to_string(em_cells.size()));
    c.require(cell_counts["NC"] == 4 && em_cells["NC"] == 0.5, "NC cell");
    c.require(cell_counts["CC"] == 2 && em_cells["CC"] == 0.5, "CC cell");
    c.require(cell_counts["CS"] == 4 && em_cells["CS"] == 0.5, "CS cell");
    // edit distance applies to the string-comparison tasks only
    c.require(ed_cells.size() == 1 && ed_cells.count("CS") == 1 && ed_cells["CS"] == 0.5,
              "CS edit-distance cell");
  } catch (const std::exception& e) {
    c.require(false, e.what());
  }
  report(10, "hand-scored 10-prediction fixture", c.ok, c.detail);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <tokrot-binary> <data-dir>\n";
    return 2;
  }
  g_tokrot = argv[1];
  g_data = argv[2];
  g_work = fs::temp_directory_path() / ("tokrot_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(g_work);

  criterion_1_golden();
  criterion_2_oracle_equivalence();
  criterion_3_dropout_limits();
  criterion_4_perturbation_invariants();
  criterion_5_noise_rates();
  criterion_6_determinism();
  criterion_7_humaneval();
  criterion_8_desk_scale();
  criterion_9_analysis();
  criterion_10_scoring_fixture();

  std::error_code ec;
  fs::remove_all(g_work, ec);
  if (g_failures) {
    std::cout << g_failures << " criteria failed" << std::endl;
    return 1;
  }
  std::cout << "all criteria passed" << std::endl;
  return 0;
}
