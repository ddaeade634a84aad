#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "typescore/chat.hpp"
#include "typescore/jsonl.hpp"

namespace typescore::corpus {

// One dataset row. `quote` is the target text and must appear verbatim in
// `instruction` between double quotes.
struct Instruction {
  std::string id;
  std::string instruction;
  std::string quote;
  std::string category;
  std::string style;
  io::Json extra = io::Json::object();  // unknown fields, kept for round trips
};

struct CorpusStats {
  std::size_t n_instructions = 0;
  double avg_words_instruction = 0;
  double avg_words_quote = 0;
  std::map<std::string, std::size_t> category_histogram;
};

// Throws ValidationError when `item` breaks an Instruction invariant that can
// be checked on its own (quote present and enclosed in double quotes).
void validate(const Instruction& item);

std::vector<Instruction> load_dataset(const std::filesystem::path& path);
std::vector<Instruction> parse_dataset(std::string_view text);
std::string serialize_dataset(const std::vector<Instruction>& corpus);
void save_dataset(const std::filesystem::path& path, const std::vector<Instruction>& corpus);

// Longest double-quoted span (first one on ties). Throws MissingQuote.
std::string extract_quote(std::string_view instruction_text);

CorpusStats dataset_stats(const std::vector<Instruction>& corpus);

struct SynthOptions {
  std::string id;
  std::string category;
  std::string style;
  int iterations = 3;
};

// Recaptions `seed_text` through `chat` for `options.iterations` rounds. The
// quote is put back verbatim between double quotes in the final text no
// matter what the backend returned, and every other double quote is dropped
// so it stays the only quoted span.
Instruction synth_instruction(std::string_view seed_text, std::string_view quote,
                              chat::ChatBackend& chat, const SynthOptions& options = {});

}  // namespace typescore::corpus
