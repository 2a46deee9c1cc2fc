#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tokrot/random.hpp"
#include "tokrot/textcore.hpp"

namespace tokrot::perturb {

enum class Level { character, token };
enum class Kind { permute, noise };

// Full parameterization of a corruption run.
struct PerturbationSpec {
  Level level = Level::character;
  Kind kind = Kind::permute;
  int n = 3;  // n-gram size, >= 2
  double p_permute = 0.5;
  double rate_insert = 0.1;
  double rate_delete = 0.1;
  double rate_substitute = 0.1;
  Alphabet alphabet;                     // character level; empty = derive from input
  std::vector<std::string> vocabulary;   // token level noise source
  std::uint64_t seed = 0;

  // JSON object with exactly these field names; unknown fields rejected.
  static PerturbationSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  void validate() const;
};

// Character-level n-gram shuffle within word boundaries. Non-word characters
// keep their absolute positions; output length equals input length.
std::string char_permute(std::string_view text, const PerturbationSpec& spec, RandomStream& rng);

// Character-level insertion/deletion/substitution, rolled once per n-gram
// chunk. Non-word characters are never touched; their relative order is
// preserved (absolute positions may shift under insert/delete).
std::string char_noise(std::string_view text, const PerturbationSpec& spec, RandomStream& rng);

// Token-level n-gram shuffle over the whole sequence, ignoring word
// boundaries.
std::vector<std::string> token_permute(const std::vector<std::string>& tokens,
                                       const PerturbationSpec& spec, RandomStream& rng);

// Token-level insertion/deletion/substitution per n-gram chunk. Requires a
// vocabulary when insert or substitute rates are nonzero.
std::vector<std::string> token_noise(const std::vector<std::string>& tokens,
                                     const PerturbationSpec& spec, RandomStream& rng);

}  // namespace tokrot::perturb
