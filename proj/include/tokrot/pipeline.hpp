#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tokrot/bpe.hpp"
#include "tokrot/evalkit.hpp"
#include "tokrot/perturb.hpp"
#include "tokrot/probegen.hpp"
#include "tokrot/textcore.hpp"

namespace tokrot::pipeline {

// Exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- record I/O ----------------------------------------------------------

nlohmann::json record_to_json(const TextRecord& rec);
TextRecord record_from_json(const nlohmann::json& j);

std::vector<nlohmann::json> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<nlohmann::json>& records);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// ---- dataset adapters ----------------------------------------------------

// Each adapter declares which field is "the question" to corrupt; everything
// else (choices, answers, tests) is preserved byte for byte.
struct Adapter {
  std::string name;
  std::string question_field;
  std::vector<std::string> required_fields;
  std::string id_field;  // empty = synthesize "line-<n>"
  bool humaneval = false;
};

const Adapter& find_adapter(const std::string& name);  // throws UsageError listing adapters
std::vector<std::string> adapter_names();

// ---- corruption ----------------------------------------------------------

// Corrupt one text under the given perturbation. Token-level corruption round-trips the
// text through the merge table at p = 0.
std::string corrupt_text(const std::string& text, const perturb::PerturbationSpec& spec,
                         RandomStream& rng, const bpe::MergeTable* table);

struct HumanEvalCorruption {
  nlohmann::json record;
  std::optional<std::string> warning;  // set when no docstring was found
};

// Perturb only the docstring region of the prompt; signature, entry_point and
// code stay byte-identical.
HumanEvalCorruption corrupt_humaneval(const nlohmann::json& record,
                                      const perturb::PerturbationSpec& spec, RandomStream& rng,
                                      const bpe::MergeTable* table);

// Docstring region of a HumanEval prompt: first triple-quote pair after the
// signature line containing the entry point. Byte offsets (begin, end) of the
// inter-quote text, or nullopt.
std::optional<std::pair<std::size_t, std::size_t>> find_docstring_region(
    const std::string& prompt, const std::string& entry_point);

struct CorruptConfig {
  std::string input_path;
  std::string output_path;
  std::string adapter = "probes";
  perturb::PerturbationSpec spec;
  std::uint64_t seed = 0;
  std::string merges_path;  // required for token-level specs
  int workers = 1;
};

struct CommandResult {
  std::size_t record_count = 0;
  std::vector<std::string> warnings;
  std::string manifest_path;
};

CommandResult cmd_corrupt(const CorruptConfig& config);

// ---- probes --------------------------------------------------------------

struct GenProbesConfig {
  std::string words_path;
  std::string train_path;
  std::string test_path;
  std::string templates_path;  // empty = built-in defaults
  std::string split_path;      // empty = desk-scale default
  std::uint64_t seed = 0;
};

CommandResult cmd_gen_probes(const GenProbesConfig& config);

// ---- k-shot assembly -----------------------------------------------------

std::string build_kshot_prompt(const std::vector<std::pair<std::string, std::string>>& demos,
                               const std::string& question, int shots);

struct AssembleConfig {
  std::string train_path;
  std::string input_path;
  std::string output_path;
  int shots = 0;
  std::uint64_t seed = 0;
};

CommandResult cmd_assemble(const AssembleConfig& config);

// ---- evaluation ----------------------------------------------------------

struct EvaluateResult {
  evalkit::Report report;
  std::vector<std::string> unmatched_predictions;  // prediction ids with no record
  std::vector<std::string> unscored_records;       // record ids with no prediction
};

EvaluateResult evaluate_records(const std::vector<TextRecord>& records,
                                const std::vector<evalkit::Prediction>& predictions);

struct EvaluateConfig {
  std::string records_path;
  std::string predictions_path;
  std::string output_prefix;        // writes <prefix>.csv and <prefix>.json
  std::string report_format = "csv";  // "csv", "json", or "both"
};

CommandResult cmd_evaluate(const EvaluateConfig& config);

// ---- analysis ------------------------------------------------------------

struct AnalyzeLengthConfig {
  std::string original_path;
  std::string corrupted_path;
  std::string merges_path;  // empty = character-level lengths
  std::string output_path;
};

CommandResult cmd_analyze_length(const AnalyzeLengthConfig& config);

struct AnalyzeComposeConfig {
  std::string embeddings_path;
  std::string pairs_path;  // lines: "word part1 part2 ..."
  std::string output_path;
};

CommandResult cmd_analyze_compose(const AnalyzeComposeConfig& config);

}  // namespace tokrot::pipeline
