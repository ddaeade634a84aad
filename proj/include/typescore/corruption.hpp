#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "typescore/corpus.hpp"
#include "typescore/jsonl.hpp"

namespace typescore::corruption {

// Typographic noise model. Rates are per-token Bernoulli probabilities.
struct CorruptionSpec {
  double char_delete = 0;
  double char_duplicate = 0;
  double char_transpose = 0;
  double glyph_substitute = 0;  // replace a character with '@'
  double word_delete = 0;
  double word_duplicate = 0;
  bool word_shuffle = false;
  double truncate_fraction = 0;  // drop this trailing share of characters
  bool blank = false;
  std::uint64_t seed = 0;

  // Throws PreconditionError when a rate lies outside [0, 1].
  void validate() const;

  // The same rate on all four character-level operations, nothing else.
  static CorruptionSpec uniform(double rate, std::uint64_t seed = 0);

  io::Json to_json() const;
  static CorruptionSpec from_json(const io::Json& record, std::size_t line = 0);
};

// Deterministic in (text, spec, item_index). Stages run word-level, then
// character-level, then truncation, then blanking. Draws come from a
// counter-based generator keyed by (seed, item_index, operation).
std::string corrupt_text(std::string_view text, const CorruptionSpec& spec,
                         std::uint64_t item_index = 0);

struct CorruptedPair {
  std::string instruction_id;
  std::string quote;
  std::string corrupted;
  std::size_t spec_index = 0;
};

// Item-major: all specs for corpus[0], then corpus[1], ...
std::vector<CorruptedPair> generate_pairs(const std::vector<corpus::Instruction>& corpus,
                                          const std::vector<CorruptionSpec>& specs);

std::vector<CorruptionSpec> load_specs(const std::filesystem::path& path);
std::string serialize_pairs(const std::vector<CorruptedPair>& pairs);

}  // namespace typescore::corruption
