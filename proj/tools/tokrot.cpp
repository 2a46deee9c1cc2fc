#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tokrot/pipeline.hpp"

namespace {

using tokrot::pipeline::UsageError;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("TOKROT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError("TOKROT_SEED is not a valid integer");
    }
  }
  throw UsageError("a seed is required: pass --seed or set TOKROT_SEED");
}

tokrot::perturb::PerturbationSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read spec file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("invalid spec JSON in " + path + ": " + e.what());
  }
  return tokrot::perturb::PerturbationSpec::from_json(j);
}

void report_result(const tokrot::pipeline::CommandResult& result) {
  std::cout << "records: " << result.record_count << "\n";
  if (!result.manifest_path.empty()) std::cout << "manifest: " << result.manifest_path << "\n";
  for (const auto& w : result.warnings) std::cout << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tokrot: deterministic benchmark corruption, probe synthesis and scoring"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed_flag;

  // corrupt
  auto* corrupt = app.add_subcommand("corrupt", "Corrupt the question field of a JSONL dataset");
  tokrot::pipeline::CorruptConfig corrupt_cfg;
  std::string spec_path;
  corrupt->add_option("--input", corrupt_cfg.input_path, "input JSONL")->required();
  corrupt->add_option("--output", corrupt_cfg.output_path, "output JSONL")->required();
  corrupt->add_option("--spec", spec_path, "PerturbationSpec JSON file")->required();
  corrupt->add_option("--adapter", corrupt_cfg.adapter, "dataset adapter");
  corrupt->add_option("--merges", corrupt_cfg.merges_path, "BPE merge table (token level)");
  corrupt->add_option("--workers", corrupt_cfg.workers, "parallel workers");
  corrupt->add_option("--seed", seed_flag, "random seed (fallback: TOKROT_SEED)");

  // gen-probes
  auto* gen = app.add_subcommand("gen-probes", "Synthesize probing tasks with exact gold answers");
  tokrot::pipeline::GenProbesConfig gen_cfg;
  gen->add_option("--words", gen_cfg.words_path, "word list, one word per line")->required();
  gen->add_option("--out-train", gen_cfg.train_path, "train JSONL output")->required();
  gen->add_option("--out-test", gen_cfg.test_path, "test JSONL output")->required();
  gen->add_option("--templates", gen_cfg.templates_path, "prompt template JSON");
  gen->add_option("--split", gen_cfg.split_path, "per-kind [train, test] counts JSON");
  gen->add_option("--seed", seed_flag, "random seed (fallback: TOKROT_SEED)");

  // assemble
  auto* assemble = app.add_subcommand("assemble", "Build k-shot prompts from a train split");
  tokrot::pipeline::AssembleConfig assemble_cfg;
  assemble->add_option("--train", assemble_cfg.train_path, "train split JSONL")->required();
  assemble->add_option("--input", assemble_cfg.input_path, "test split JSONL")->required();
  assemble->add_option("--output", assemble_cfg.output_path, "output JSONL")->required();
  assemble->add_option("--shots", assemble_cfg.shots, "number of demonstrations")->required();
  assemble->add_option("--seed", seed_flag, "random seed (fallback: TOKROT_SEED)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against records");
  tokrot::pipeline::EvaluateConfig eval_cfg;
  evaluate->add_option("--input", eval_cfg.records_path, "records JSONL")->required();
  evaluate->add_option("--predictions", eval_cfg.predictions_path, "predictions JSONL")->required();
  evaluate->add_option("--output", eval_cfg.output_prefix, "report path prefix")->required();
  evaluate->add_option("--report-format", eval_cfg.report_format, "csv, json, or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));

  // analyze-length
  auto* alen = app.add_subcommand("analyze-length", "Token-length correlation before/after corruption");
  tokrot::pipeline::AnalyzeLengthConfig alen_cfg;
  alen->add_option("--original", alen_cfg.original_path, "original records JSONL")->required();
  alen->add_option("--corrupted", alen_cfg.corrupted_path, "corrupted records JSONL")->required();
  alen->add_option("--merges", alen_cfg.merges_path, "BPE merge table (default: character lengths)");
  alen->add_option("--output", alen_cfg.output_path, "output CSV")->required();

  // analyze-compose
  auto* acomp = app.add_subcommand("analyze-compose", "Embedding composition cosine/angle");
  tokrot::pipeline::AnalyzeComposeConfig acomp_cfg;
  acomp->add_option("--embeddings", acomp_cfg.embeddings_path, "embedding table file")->required();
  acomp->add_option("--pairs", acomp_cfg.pairs_path, "lines: word part1 part2 ...")->required();
  acomp->add_option("--output", acomp_cfg.output_path, "output CSV")->required();

  // train-bpe
  auto* train = app.add_subcommand("train-bpe", "Train a BPE merge table from a text corpus");
  std::string train_input, train_output;
  std::size_t num_merges = 1000;
  train->add_option("--input", train_input, "corpus text file")->required();
  train->add_option("--output", train_output, "merge table output")->required();
  train->add_option("--num-merges", num_merges, "maximum number of merges");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*corrupt) {
      corrupt_cfg.seed = resolve_seed(seed_flag);
      corrupt_cfg.spec = load_spec(spec_path);
      report_result(tokrot::pipeline::cmd_corrupt(corrupt_cfg));
    } else if (*gen) {
      gen_cfg.seed = resolve_seed(seed_flag);
      report_result(tokrot::pipeline::cmd_gen_probes(gen_cfg));
    } else if (*assemble) {
      assemble_cfg.seed = resolve_seed(seed_flag);
      report_result(tokrot::pipeline::cmd_assemble(assemble_cfg));
    } else if (*evaluate) {
      report_result(tokrot::pipeline::cmd_evaluate(eval_cfg));
    } else if (*alen) {
      report_result(tokrot::pipeline::cmd_analyze_length(alen_cfg));
    } else if (*acomp) {
      report_result(tokrot::pipeline::cmd_analyze_compose(acomp_cfg));
    } else if (*train) {
      const auto table = tokrot::bpe::MergeTable::train(
          {tokrot::pipeline::read_file(train_input)}, num_merges);
      table.save(train_output);
      std::cout << "merges: " << table.rules().size() << "\n";
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
