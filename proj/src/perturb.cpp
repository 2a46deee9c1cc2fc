#include "tokrot/perturb.hpp"

#include <algorithm>
#include <stdexcept>

namespace tokrot::perturb {

namespace {

const char* level_name(Level l) { return l == Level::character ? "character" : "token"; }
const char* kind_name(Kind k) { return k == Kind::permute ? "permute" : "noise"; }

Level parse_level(const std::string& s) {
  if (s == "character") return Level::character;
  if (s == "token") return Level::token;
  throw std::invalid_argument("PerturbationSpec: unknown level '" + s + "'");
}

Kind parse_kind(const std::string& s) {
  if (s == "permute") return Kind::permute;
  if (s == "noise") return Kind::noise;
  throw std::invalid_argument("PerturbationSpec: unknown kind '" + s + "'");
}

void check_prob(double p, const char* name) {
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument(std::string("PerturbationSpec: ") + name + " must be in [0,1]");
  }
}

// Fisher-Yates over a subrange, consuming draws from rng.
template <typename T>
void shuffle_range(std::vector<T>& v, std::size_t begin, std::size_t end, RandomStream& rng) {
  for (std::size_t len = end - begin; len > 1; --len) {
    const std::size_t j = static_cast<std::size_t>(rng.below(len));
    std::swap(v[begin + len - 1], v[begin + j]);
  }
}

// One chunk of noise: rolls in fixed order (insert, delete, substitute),
// each acting on the evolving chunk.
template <typename Elem, typename PickSource>
void noise_chunk(std::vector<Elem>& chunk, const PerturbationSpec& spec, RandomStream& rng,
                 PickSource pick_from_pool) {
  if (rng.bernoulli(spec.rate_insert)) {
    Elem src;
    if (!chunk.empty() && rng.bernoulli(0.5)) {
      src = chunk[static_cast<std::size_t>(rng.below(chunk.size()))];
    } else {
      src = pick_from_pool(rng);
    }
    const std::size_t pos = static_cast<std::size_t>(rng.below(chunk.size() + 1));
    chunk.insert(chunk.begin() + static_cast<std::ptrdiff_t>(pos), std::move(src));
  }
  if (rng.bernoulli(spec.rate_delete) && !chunk.empty()) {
    const std::size_t pos = static_cast<std::size_t>(rng.below(chunk.size()));
    chunk.erase(chunk.begin() + static_cast<std::ptrdiff_t>(pos));
  }
  if (rng.bernoulli(spec.rate_substitute) && !chunk.empty()) {
    const std::size_t pos = static_cast<std::size_t>(rng.below(chunk.size()));
    chunk[pos] = pick_from_pool(rng);
  }
}

}  // namespace

void PerturbationSpec::validate() const {
  if (n < 2) throw std::invalid_argument("PerturbationSpec: n must be >= 2");
  check_prob(p_permute, "p_permute");
  check_prob(rate_insert, "rate_insert");
  check_prob(rate_delete, "rate_delete");
  check_prob(rate_substitute, "rate_substitute");
}

PerturbationSpec PerturbationSpec::from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known = {
      "level", "kind", "n", "p_permute", "rate_insert", "rate_delete",
      "rate_substitute", "alphabet", "seed"};
  if (!j.is_object()) throw std::invalid_argument("PerturbationSpec: expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument("PerturbationSpec: unknown field '" + key + "'");
    }
  }
  PerturbationSpec spec;
  spec.level = parse_level(j.at("level").get<std::string>());
  spec.kind = parse_kind(j.at("kind").get<std::string>());
  if (j.contains("n")) spec.n = j.at("n").get<int>();
  if (j.contains("p_permute")) spec.p_permute = j.at("p_permute").get<double>();
  if (j.contains("rate_insert")) spec.rate_insert = j.at("rate_insert").get<double>();
  if (j.contains("rate_delete")) spec.rate_delete = j.at("rate_delete").get<double>();
  if (j.contains("rate_substitute")) spec.rate_substitute = j.at("rate_substitute").get<double>();
  if (j.contains("alphabet")) {
    const auto& a = j.at("alphabet");
    if (a.is_string()) {
      spec.alphabet = Alphabet::from_utf8(a.get<std::string>());
    } else if (a.is_array()) {
      spec.vocabulary = a.get<std::vector<std::string>>();
    } else {
      throw std::invalid_argument(
          "PerturbationSpec: alphabet must be a string (character level) or an array of tokens");
    }
  }
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  spec.validate();
  return spec;
}

nlohmann::json PerturbationSpec::to_json() const {
  nlohmann::json j;
  j["level"] = level_name(level);
  j["kind"] = kind_name(kind);
  j["n"] = n;
  j["p_permute"] = p_permute;
  j["rate_insert"] = rate_insert;
  j["rate_delete"] = rate_delete;
  j["rate_substitute"] = rate_substitute;
  if (level == Level::token) {
    j["alphabet"] = vocabulary;
  } else {
    j["alphabet"] = encode_utf8(alphabet.chars);
  }
  j["seed"] = seed;
  return j;
}

std::string char_permute(std::string_view text, const PerturbationSpec& spec, RandomStream& rng) {
  spec.validate();
  std::u32string scalars = decode_utf8(text);
  std::vector<char32_t> buf(scalars.begin(), scalars.end());
  const std::size_t n = static_cast<std::size_t>(spec.n);
  // Chunks strictly left to right; the short final chunk is still eligible.
  for (const WordSpan& span : segment_words(scalars)) {
    for (std::size_t start = span.begin; start < span.end; start += n) {
      const std::size_t stop = std::min(start + n, span.end);
      if (rng.bernoulli(spec.p_permute)) shuffle_range(buf, start, stop, rng);
    }
  }
  return encode_utf8(std::u32string(buf.begin(), buf.end()));
}

std::string char_noise(std::string_view text, const PerturbationSpec& spec, RandomStream& rng) {
  spec.validate();
  const std::u32string scalars = decode_utf8(text);
  const Alphabet alphabet =
      spec.alphabet.empty() ? Alphabet::for_text(scalars) : spec.alphabet;
  auto pick = [&alphabet](RandomStream& r) { return alphabet.pick(r); };

  const std::size_t n = static_cast<std::size_t>(spec.n);
  std::u32string out;
  out.reserve(scalars.size());
  std::size_t cursor = 0;
  for (const WordSpan& span : segment_words(scalars)) {
    out.append(scalars, cursor, span.begin - cursor);  // separators verbatim
    for (std::size_t start = span.begin; start < span.end; start += n) {
      const std::size_t stop = std::min(start + n, span.end);
      std::vector<char32_t> chunk(scalars.begin() + static_cast<std::ptrdiff_t>(start),
                                  scalars.begin() + static_cast<std::ptrdiff_t>(stop));
      noise_chunk(chunk, spec, rng, pick);
      out.append(chunk.begin(), chunk.end());
    }
    cursor = span.end;
  }
  out.append(scalars, cursor, scalars.size() - cursor);
  return encode_utf8(out);
}

std::vector<std::string> token_permute(const std::vector<std::string>& tokens,
                                       const PerturbationSpec& spec, RandomStream& rng) {
  spec.validate();
  std::vector<std::string> out = tokens;
  const std::size_t n = static_cast<std::size_t>(spec.n);
  for (std::size_t start = 0; start < out.size(); start += n) {
    const std::size_t stop = std::min(start + n, out.size());
    if (rng.bernoulli(spec.p_permute)) shuffle_range(out, start, stop, rng);
  }
  return out;
}

std::vector<std::string> token_noise(const std::vector<std::string>& tokens,
                                     const PerturbationSpec& spec, RandomStream& rng) {
  spec.validate();
  if (spec.vocabulary.empty() && (spec.rate_insert > 0.0 || spec.rate_substitute > 0.0)) {
    throw std::invalid_argument("noise vocabulary required");
  }
  auto pick = [&spec](RandomStream& r) {
    return spec.vocabulary[static_cast<std::size_t>(r.below(spec.vocabulary.size()))];
  };
  const std::size_t n = static_cast<std::size_t>(spec.n);
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (std::size_t start = 0; start < tokens.size(); start += n) {
    const std::size_t stop = std::min(start + n, tokens.size());
    std::vector<std::string> chunk(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                                   tokens.begin() + static_cast<std::ptrdiff_t>(stop));
    noise_chunk(chunk, spec, rng, pick);
    out.insert(out.end(), std::make_move_iterator(chunk.begin()),
               std::make_move_iterator(chunk.end()));
  }
  return out;
}

}  // namespace tokrot::perturb
