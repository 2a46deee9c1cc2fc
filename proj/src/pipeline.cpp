#include "tokrot/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <memory>
#include <thread>

#include "tokrot/sha256.hpp"

namespace tokrot::pipeline {

namespace {

std::vector<std::string> split_whitespace(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

void write_manifest(const std::string& path, const std::string& command,
                    const nlohmann::json& config_echo, std::uint64_t seed,
                    const std::string& input_sha256, std::size_t record_count,
                    const std::vector<std::string>& warnings) {
  nlohmann::json m;
  m["command"] = command;
  m["config"] = config_echo;
  m["seed"] = seed;
  m["input_sha256"] = input_sha256;
  m["record_count"] = record_count;
  m["warnings"] = warnings;
  write_file(path, m.dump(2) + "\n");
}

}  // namespace

nlohmann::json record_to_json(const TextRecord& rec) {
  nlohmann::json j;
  j["id"] = rec.id;
  j["prompt"] = rec.prompt;
  j["gold"] = rec.gold;
  j["task"] = rec.task;
  j["meta"] = rec.meta;
  return j;
}

TextRecord record_from_json(const nlohmann::json& j) {
  TextRecord rec;
  rec.id = j.at("id").get<std::string>();
  rec.prompt = j.at("prompt").get<std::string>();
  rec.gold = j.at("gold").get<std::vector<std::string>>();
  if (j.contains("task")) rec.task = j.at("task").get<std::string>();
  if (j.contains("meta")) rec.meta = j.at("meta").get<std::map<std::string, std::string>>();
  if (rec.id.empty()) throw DataError("record with empty id");
  return rec;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path);
  std::vector<nlohmann::json> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      records.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": invalid JSON: " + e.what());
    }
  }
  return records;
}

void write_jsonl(const std::string& path, const std::vector<nlohmann::json>& records) {
  std::string out;
  for (const auto& j : records) {
    out += j.dump();
    out += '\n';
  }
  write_file(path, out);
}

// ---- adapters ------------------------------------------------------------

namespace {
const std::vector<Adapter>& adapters() {
  static const std::vector<Adapter> all = {
      {"mmlu", "question", {"question", "choices", "answer"}, "id", false},
      {"truthfulqa-mc1", "question", {"question", "choices", "label"}, "id", false},
      {"gsm8k", "question", {"question", "answer"}, "id", false},
      {"humaneval", "prompt", {"task_id", "prompt", "entry_point", "canonical_solution", "test"},
       "task_id", true},
      {"probes", "prompt", {"id", "prompt", "gold", "task"}, "id", false},
  };
  return all;
}
}  // namespace

std::vector<std::string> adapter_names() {
  std::vector<std::string> names;
  for (const Adapter& a : adapters()) names.push_back(a.name);
  return names;
}

const Adapter& find_adapter(const std::string& name) {
  for (const Adapter& a : adapters()) {
    if (a.name == name) return a;
  }
  std::string msg = "unknown adapter '" + name + "'; available:";
  for (const std::string& n : adapter_names()) msg += " " + n;
  throw UsageError(msg);
}

namespace {

std::string record_id(const Adapter& adapter, const nlohmann::json& rec, std::size_t index) {
  if (!adapter.id_field.empty() && rec.contains(adapter.id_field)) {
    const auto& v = rec.at(adapter.id_field);
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  }
  return "line-" + std::to_string(index + 1);
}

void validate_record(const Adapter& adapter, const nlohmann::json& rec, const std::string& id) {
  if (!rec.is_object()) throw DataError("record " + id + ": not a JSON object");
  for (const std::string& field : adapter.required_fields) {
    if (!rec.contains(field)) throw DataError("record " + id + ": missing field '" + field + "'");
  }
  if (!rec.at(adapter.question_field).is_string()) {
    throw DataError("record " + id + ": field '" + adapter.question_field + "' must be a string");
  }
}

}  // namespace

// ---- corruption ----------------------------------------------------------

std::string corrupt_text(const std::string& text, const perturb::PerturbationSpec& spec,
                         RandomStream& rng, const bpe::MergeTable* table) {
  if (spec.level == perturb::Level::character) {
    return spec.kind == perturb::Kind::permute ? perturb::char_permute(text, spec, rng)
                                               : perturb::char_noise(text, spec, rng);
  }
  if (!table) throw UsageError("token-level corruption requires a merge table (--merges)");
  const bpe::TokenSequence tokens = bpe::encode(text, *table);
  bpe::TokenSequence out;
  if (spec.kind == perturb::Kind::permute) {
    out = perturb::token_permute(tokens, spec, rng);
  } else if (!spec.vocabulary.empty()) {
    out = perturb::token_noise(tokens, spec, rng);
  } else {
    perturb::PerturbationSpec with_vocab = spec;
    with_vocab.vocabulary = table->vocab_list();
    out = perturb::token_noise(tokens, with_vocab, rng);
  }
  return bpe::decode(out);
}

std::optional<std::pair<std::size_t, std::size_t>> find_docstring_region(
    const std::string& prompt, const std::string& entry_point) {
  // Signature line: contains "def" and the entry point name.
  std::size_t sig_end = std::string::npos;
  std::size_t line_start = 0;
  while (line_start <= prompt.size()) {
    std::size_t line_end = prompt.find('\n', line_start);
    if (line_end == std::string::npos) line_end = prompt.size();
    const std::string_view line(prompt.data() + line_start, line_end - line_start);
    if (line.find("def ") != std::string_view::npos &&
        line.find(entry_point) != std::string_view::npos) {
      sig_end = line_end;
      break;
    }
    if (line_end == prompt.size()) break;
    line_start = line_end + 1;
  }
  if (sig_end == std::string::npos) return std::nullopt;

  const std::string dq = "\"\"\"";
  const std::string sq = "'''";
  std::size_t open = prompt.find(dq, sig_end);
  std::string delim = dq;
  const std::size_t open_sq = prompt.find(sq, sig_end);
  if (open == std::string::npos || (open_sq != std::string::npos && open_sq < open)) {
    open = open_sq;
    delim = sq;
  }
  if (open == std::string::npos) return std::nullopt;
  const std::size_t close = prompt.find(delim, open + delim.size());
  if (close == std::string::npos) return std::nullopt;
  return std::make_pair(open + delim.size(), close);
}

HumanEvalCorruption corrupt_humaneval(const nlohmann::json& record,
                                      const perturb::PerturbationSpec& spec, RandomStream& rng,
                                      const bpe::MergeTable* table) {
  HumanEvalCorruption result;
  result.record = record;
  const std::string prompt = record.at("prompt").get<std::string>();
  const std::string entry_point = record.at("entry_point").get<std::string>();
  const auto region = find_docstring_region(prompt, entry_point);
  if (!region) {
    result.warning = "no docstring found in " + record.at("task_id").dump() +
                     "; record passed through unchanged";
    return result;
  }
  const auto [begin, end] = *region;
  const std::string docstring = prompt.substr(begin, end - begin);
  const std::string corrupted = corrupt_text(docstring, spec, rng, table);
  result.record["prompt"] = prompt.substr(0, begin) + corrupted + prompt.substr(end);
  return result;
}

namespace {

// Parallel map over records with per-record substreams; output order follows
// record index, never completion order.
template <typename Fn>
void parallel_for_records(std::size_t count, int workers, Fn&& fn) {
  if (workers <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int n_threads = std::min<int>(workers, static_cast<int>(count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= count) break;
          fn(i);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

CommandResult cmd_corrupt(const CorruptConfig& config) {
  const Adapter& adapter = find_adapter(config.adapter);
  const std::string input_bytes = read_file(config.input_path);
  const std::vector<nlohmann::json> records = read_jsonl(config.input_path);

  std::unique_ptr<bpe::MergeTable> table;
  if (!config.merges_path.empty()) {
    table = std::make_unique<bpe::MergeTable>(bpe::MergeTable::load(config.merges_path));
  }
  if (config.spec.level == perturb::Level::token && !table) {
    throw UsageError("token-level corruption requires --merges");
  }

  std::set<std::string> seen_ids;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string id = record_id(adapter, records[i], i);
    validate_record(adapter, records[i], id);
    if (!seen_ids.insert(id).second) throw DataError("duplicate record id: " + id);
  }

  std::vector<nlohmann::json> out(records.size());
  std::vector<std::optional<std::string>> warnings(records.size());
  parallel_for_records(records.size(), config.workers, [&](std::size_t i) {
    RandomStream rng = derive_substream(config.seed, i);
    if (adapter.humaneval) {
      HumanEvalCorruption r = corrupt_humaneval(records[i], config.spec, rng, table.get());
      out[i] = std::move(r.record);
      warnings[i] = std::move(r.warning);
    } else {
      nlohmann::json rec = records[i];
      const std::string question = rec.at(adapter.question_field).get<std::string>();
      rec[adapter.question_field] = corrupt_text(question, config.spec, rng, table.get());
      if (rec.contains("meta") && rec["meta"].is_object()) {
        const nlohmann::json spec_json = config.spec.to_json();
        rec["meta"]["perturbation"] = spec_json["level"].get<std::string>() + "-" +
                                      spec_json["kind"].get<std::string>();
      }
      out[i] = std::move(rec);
    }
  });

  write_jsonl(config.output_path, out);

  CommandResult result;
  result.record_count = records.size();
  for (const auto& w : warnings) {
    if (w) result.warnings.push_back(*w);
  }
  nlohmann::json config_echo;
  config_echo["input"] = config.input_path;
  config_echo["output"] = config.output_path;
  config_echo["adapter"] = adapter.name;
  config_echo["spec"] = config.spec.to_json();
  config_echo["workers"] = config.workers;
  if (!config.merges_path.empty()) config_echo["merges"] = config.merges_path;
  result.manifest_path = config.output_path + ".manifest.json";
  write_manifest(result.manifest_path, "corrupt", config_echo, config.seed,
                 sha256_hex(input_bytes), records.size(), result.warnings);
  return result;
}

// ---- probes --------------------------------------------------------------

namespace {

probegen::SplitSpec load_split(const std::string& path) {
  if (path.empty()) return probegen::SplitSpec::desk_scale();
  nlohmann::json j = nlohmann::json::parse(read_file(path));
  probegen::SplitSpec split;
  for (const auto& [key, value] : j.items()) {
    const probegen::ProbeKind kind = probegen::kind_from_name(key);
    if (!value.is_array() || value.size() != 2) {
      throw UsageError("split entry for " + key + " must be [train, test]");
    }
    const int train = value[0].get<int>();
    const int test = value[1].get<int>();
    if (train < 0 || test < 0) throw UsageError("split counts must be >= 0");
    split.counts[kind] = {train, test};
  }
  return split;
}

std::vector<std::string> load_words(const std::string& path) {
  std::vector<std::string> words;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty() && line[0] != '#') words.push_back(line);
  }
  return words;
}

}  // namespace

CommandResult cmd_gen_probes(const GenProbesConfig& config) {
  const std::string words_bytes = read_file(config.words_path);
  const std::vector<std::string> words = load_words(config.words_path);
  const probegen::TemplateSet templates = config.templates_path.empty()
                                              ? probegen::TemplateSet::defaults()
                                              : probegen::TemplateSet::load(config.templates_path);
  const probegen::SplitSpec split = load_split(config.split_path);

  RandomStream rng(config.seed);
  probegen::ProbeStreams streams;
  try {
    streams = probegen::synthesize(words, split, templates, rng);
  } catch (const std::runtime_error& e) {
    throw DataError(e.what());
  }

  auto dump = [](const std::vector<probegen::ProbeItem>& items, const std::string& split_name) {
    std::vector<nlohmann::json> out;
    std::size_t i = 0;
    for (const auto& item : items) {
      const std::string id = probegen::kind_name(item.kind) + "-" + split_name + "-" +
                             std::to_string(i++);
      out.push_back(record_to_json(item.to_record(id, split_name)));
    }
    return out;
  };
  write_jsonl(config.train_path, dump(streams.train, "train"));
  write_jsonl(config.test_path, dump(streams.test, "test"));

  CommandResult result;
  result.record_count = streams.train.size() + streams.test.size();
  nlohmann::json config_echo;
  config_echo["words"] = config.words_path;
  config_echo["train"] = config.train_path;
  config_echo["test"] = config.test_path;
  config_echo["templates"] = config.templates_path.empty() ? "<builtin>" : config.templates_path;
  config_echo["split"] = config.split_path.empty() ? "<desk-scale>" : config.split_path;
  result.manifest_path = config.train_path + ".manifest.json";
  write_manifest(result.manifest_path, "gen-probes", config_echo, config.seed,
                 sha256_hex(words_bytes), result.record_count, {});
  return result;
}

// ---- k-shot assembly -----------------------------------------------------

std::string build_kshot_prompt(const std::vector<std::pair<std::string, std::string>>& demos,
                               const std::string& question, int shots) {
  if (shots < 0) throw UsageError("shots must be >= 0");
  if (static_cast<std::size_t>(shots) > demos.size()) {
    throw UsageError("insufficient demos: need " + std::to_string(shots) + ", have " +
                     std::to_string(demos.size()));
  }
  std::string out;
  for (int i = 0; i < shots; ++i) {
    out += "Question: " + demos[static_cast<std::size_t>(i)].first + "\n";
    out += "Answer: " + demos[static_cast<std::size_t>(i)].second + "\n\n";
  }
  out += "Question: " + question + "\nAnswer:";
  return out;
}

CommandResult cmd_assemble(const AssembleConfig& config) {
  std::vector<TextRecord> train, test;
  for (const auto& j : read_jsonl(config.train_path)) train.push_back(record_from_json(j));
  for (const auto& j : read_jsonl(config.input_path)) test.push_back(record_from_json(j));
  if (static_cast<int>(train.size()) < config.shots) {
    throw UsageError("insufficient demos in train split");
  }

  std::set<std::string> test_ids;
  for (const auto& r : test) test_ids.insert(r.id);

  // Fixed demo set for the whole run, chosen by seed from the train split.
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  RandomStream rng(config.seed);
  shuffle_in_place(order, rng);
  std::vector<std::pair<std::string, std::string>> demos;
  for (std::size_t idx : order) {
    if (static_cast<int>(demos.size()) >= config.shots) break;
    const TextRecord& d = train[idx];
    if (test_ids.count(d.id)) throw DataError("demo id appears in test split: " + d.id);
    if (d.gold.empty()) throw DataError("demo record without gold: " + d.id);
    demos.emplace_back(d.prompt, d.gold.front());
  }

  std::vector<nlohmann::json> out;
  for (const TextRecord& r : test) {
    TextRecord assembled = r;
    assembled.prompt = build_kshot_prompt(demos, r.prompt, config.shots);
    assembled.meta["shots"] = std::to_string(config.shots);
    out.push_back(record_to_json(assembled));
  }
  write_jsonl(config.output_path, out);

  CommandResult result;
  result.record_count = test.size();
  nlohmann::json config_echo;
  config_echo["train"] = config.train_path;
  config_echo["input"] = config.input_path;
  config_echo["output"] = config.output_path;
  config_echo["shots"] = config.shots;
  result.manifest_path = config.output_path + ".manifest.json";
  write_manifest(result.manifest_path, "assemble", config_echo, config.seed,
                 sha256_hex(read_file(config.input_path)), test.size(), {});
  return result;
}

// ---- evaluation ----------------------------------------------------------

EvaluateResult evaluate_records(const std::vector<TextRecord>& records,
                                const std::vector<evalkit::Prediction>& predictions) {
  std::map<std::string, const evalkit::Prediction*> by_id;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.id, &p).second) throw DataError("duplicate prediction id: " + p.id);
  }

  EvaluateResult result;
  std::set<std::string> record_ids;
  std::vector<evalkit::ScoredRow> rows;
  for (const TextRecord& rec : records) {
    record_ids.insert(rec.id);
    auto it = by_id.find(rec.id);
    if (it == by_id.end()) {
      result.unscored_records.push_back(rec.id);
      continue;
    }
    const evalkit::Prediction& pred = *it->second;
    if (rec.gold.empty()) throw DataError("record " + rec.id + " has no gold answers");

    evalkit::ScoredRow row;
    row.task = rec.task.empty() ? "unknown" : rec.task;
    auto meta_or = [&rec](const char* key, const char* fallback) {
      auto m = rec.meta.find(key);
      return m == rec.meta.end() ? std::string(fallback) : m->second;
    };
    row.shot = meta_or("shots", "0");
    row.perturbation = meta_or("perturbation", "none");

    if (rec.task == "CS") {
      auto a = rec.meta.find("word_a");
      auto b = rec.meta.find("word_b");
      if (a == rec.meta.end() || b == rec.meta.end()) {
        throw DataError("record " + rec.id + ": CS scoring requires word_a/word_b metadata");
      }
      row.em = evalkit::score_common_substring(pred.text, a->second, b->second) ? 1.0 : 0.0;
    } else {
      row.em = evalkit::exact_match(pred.text, rec.gold) ? 1.0 : 0.0;
    }
    if (rec.task == "CS" || rec.task == "LCS" || rec.task == "LCSeq") {
      const std::string p = evalkit::normalize_answer(pred.text);
      int best = -1;
      for (const std::string& g : rec.gold) {
        const int d = evalkit::edit_distance(p, evalkit::normalize_answer(g));
        if (best < 0 || d < best) best = d;
      }
      row.ed = best;
      row.has_ed = true;
    }
    rows.push_back(std::move(row));
  }
  for (const auto& p : predictions) {
    if (!record_ids.count(p.id)) result.unmatched_predictions.push_back(p.id);
  }
  result.report = evalkit::aggregate(rows);
  return result;
}

CommandResult cmd_evaluate(const EvaluateConfig& config) {
  std::vector<TextRecord> records;
  for (const auto& j : read_jsonl(config.records_path)) records.push_back(record_from_json(j));
  std::vector<evalkit::Prediction> predictions;
  for (const auto& j : read_jsonl(config.predictions_path)) {
    evalkit::Prediction p;
    p.id = j.at("id").get<std::string>();
    p.text = j.at("text").get<std::string>();
    predictions.push_back(std::move(p));
  }

  const EvaluateResult result = evaluate_records(records, predictions);

  if (config.report_format == "csv" || config.report_format == "both") {
    write_file(config.output_prefix + ".csv", result.report.to_csv());
  }
  if (config.report_format == "json" || config.report_format == "both") {
    nlohmann::json j;
    j["cells"] = nlohmann::json::array();
    for (const auto& c : result.report.cells) {
      nlohmann::json cell;
      cell["task"] = c.task;
      cell["shot"] = c.shot;
      cell["perturbation"] = c.perturbation;
      cell["count"] = c.count;
      cell["em_mean"] = c.em_mean;
      if (c.has_ed) cell["ed_mean"] = c.ed_mean;
      j["cells"].push_back(cell);
    }
    j["errors"]["unmatched_predictions"] = result.unmatched_predictions;
    j["errors"]["unscored_records"] = result.unscored_records;
    write_file(config.output_prefix + ".json", j.dump(2) + "\n");
  }

  CommandResult cr;
  cr.record_count = records.size();
  for (const auto& id : result.unmatched_predictions) {
    cr.warnings.push_back("unmatched prediction: " + id);
  }
  for (const auto& id : result.unscored_records) {
    cr.warnings.push_back("record without prediction: " + id);
  }
  return cr;
}

// ---- analysis ------------------------------------------------------------

CommandResult cmd_analyze_length(const AnalyzeLengthConfig& config) {
  std::map<std::string, std::string> original, corrupted;
  for (const auto& j : read_jsonl(config.original_path)) {
    const TextRecord r = record_from_json(j);
    original[r.id] = r.prompt;
  }
  for (const auto& j : read_jsonl(config.corrupted_path)) {
    const TextRecord r = record_from_json(j);
    corrupted[r.id] = r.prompt;
  }

  std::unique_ptr<bpe::MergeTable> table;
  if (!config.merges_path.empty()) {
    table = std::make_unique<bpe::MergeTable>(bpe::MergeTable::load(config.merges_path));
  }
  auto token_length = [&table](const std::string& text) -> double {
    if (table) return static_cast<double>(bpe::encode(text, *table).size());
    return static_cast<double>(decode_utf8(text).size());
  };

  std::vector<std::pair<double, double>> pairs;
  for (const auto& [id, text] : original) {
    auto it = corrupted.find(id);
    if (it == corrupted.end()) throw DataError("corrupted file missing record: " + id);
    pairs.emplace_back(token_length(text), token_length(it->second));
  }
  evalkit::LengthStats stats;
  try {
    stats = evalkit::length_stats(pairs);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }

  std::ostringstream out;
  out << "count,pearson_r,slope,intercept\n";
  out << pairs.size() << ',' << stats.pearson_r << ',' << stats.slope << ',' << stats.intercept
      << '\n';
  write_file(config.output_path, out.str());

  CommandResult cr;
  cr.record_count = pairs.size();
  return cr;
}

CommandResult cmd_analyze_compose(const AnalyzeComposeConfig& config) {
  evalkit::EmbeddingTable table = evalkit::EmbeddingTable::load(config.embeddings_path);
  std::ostringstream out;
  out << "word,parts,cosine,angle_degrees\n";
  std::size_t rows = 0;
  std::istringstream in(read_file(config.pairs_path));
  std::string line;
  while (std::getline(in, line)) {
    const std::vector<std::string> fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (fields.size() < 2) throw DataError("pairs line needs a word and at least one part: " + line);
    const std::string& word = fields.front();
    const std::vector<std::string> parts(fields.begin() + 1, fields.end());
    evalkit::Composition c;
    try {
      c = evalkit::embedding_composition(table, word, parts);
    } catch (const std::runtime_error& e) {
      throw DataError(e.what());
    }
    std::string joined;
    for (const auto& p : parts) {
      if (!joined.empty()) joined += '+';
      joined += p;
    }
    out << word << ',' << joined << ',' << c.cosine << ',' << c.angle_degrees << '\n';
    ++rows;
  }
  write_file(config.output_path, out.str());
  CommandResult cr;
  cr.record_count = rows;
  return cr;
}

}  // namespace tokrot::pipeline
