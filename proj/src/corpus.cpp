#include "typescore/corpus.hpp"

#include <set>

#include "typescore/errors.hpp"
#include "typescore/prompts.hpp"
#include "typescore/text.hpp"

namespace typescore::corpus {
namespace {

const std::set<std::string> kKnownFields = {"id", "instruction", "quote", "category", "style"};

std::string optional_string(const io::Json& record, const char* field, std::size_t line) {
  const auto it = record.find(field);
  if (it == record.end() || it->is_null()) return {};
  if (!it->is_string()) throw ParseError(std::string("field '") + field + "' must be a string", line);
  return it->get<std::string>();
}

std::string enclosed(std::string_view quote) {
  std::string out;
  out.reserve(quote.size() + 2);
  out += '"';
  out += quote;
  out += '"';
  return out;
}

std::string strip_double_quotes(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c != '"') out += c;
  }
  return out;
}

std::string rtrim(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\n' || s.back() == '\t' || s.back() == '\r')) {
    s.pop_back();
  }
  return s;
}

// Makes `quote` the single double-quoted span of `text`.
std::string embed_quote(std::string_view text, std::string_view quote) {
  const std::string marked = enclosed(quote);
  if (const auto at = text.find(marked); at != std::string_view::npos) {
    return strip_double_quotes(text.substr(0, at)) + marked +
           strip_double_quotes(text.substr(at + marked.size()));
  }
  std::string plain = rtrim(strip_double_quotes(text));
  if (const auto at = plain.find(quote); at != std::string::npos) {
    return plain.substr(0, at) + marked + plain.substr(at + quote.size());
  }
  const bool period = !plain.empty() && plain.back() == '.';
  if (period) plain.pop_back();
  if (!plain.empty()) plain += ' ';
  return plain + "with the text " + marked + (period ? "." : "");
}

std::string fallback_id(std::string_view seed_text, std::string_view quote) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  mix(seed_text);
  mix("\x1f");
  mix(quote);
  static const char* digits = "0123456789abcdef";
  std::string id = "synth-";
  for (int shift = 60; shift >= 0; shift -= 4) id += digits[(h >> shift) & 0xF];
  return id;
}

}  // namespace

void validate(const Instruction& item) {
  if (item.id.empty()) throw ValidationError("instruction has an empty id");
  if (item.quote.empty()) throw ValidationError("instruction '" + item.id + "' has an empty quote");
  if (item.instruction.find(enclosed(item.quote)) == std::string::npos) {
    throw ValidationError("instruction '" + item.id + "': quote \"" + item.quote +
                          "\" does not appear between double quotes in the instruction");
  }
}

std::vector<Instruction> parse_dataset(std::string_view text) {
  std::vector<Instruction> out;
  std::set<std::string> seen;
  io::for_each_record_in(text, [&](const io::Json& record, std::size_t line) {
    Instruction item;
    item.id = io::require_string(record, "id", line);
    item.instruction = io::require_string(record, "instruction", line);
    if (record.contains("quote")) {
      item.quote = io::require_string(record, "quote", line);
    } else {
      try {
        item.quote = extract_quote(item.instruction);
      } catch (const MissingQuote&) {
        throw ValidationError("instruction '" + item.id + "' (line " + std::to_string(line) +
                              ") has no quote field and no quoted span");
      }
    }
    item.category = optional_string(record, "category", line);
    item.style = optional_string(record, "style", line);
    for (const auto& [key, value] : record.items()) {
      if (!kKnownFields.contains(key)) item.extra[key] = value;
    }
    validate(item);
    if (!seen.insert(item.id).second) throw ValidationError("duplicate id '" + item.id + "'");
    out.push_back(std::move(item));
  });
  return out;
}

std::vector<Instruction> load_dataset(const std::filesystem::path& path) {
  return parse_dataset(io::read_file(path));
}

std::string serialize_dataset(const std::vector<Instruction>& corpus) {
  std::vector<io::Json> records;
  records.reserve(corpus.size());
  for (const auto& item : corpus) {
    io::Json r = io::Json::object();
    r["id"] = item.id;
    r["instruction"] = item.instruction;
    r["quote"] = item.quote;
    r["category"] = item.category;
    r["style"] = item.style;
    for (const auto& [key, value] : item.extra.items()) r[key] = value;
    records.push_back(std::move(r));
  }
  return io::to_jsonl(records);
}

void save_dataset(const std::filesystem::path& path, const std::vector<Instruction>& corpus) {
  io::write_file_atomic(path, serialize_dataset(corpus));
}

std::string extract_quote(std::string_view text) {
  std::string_view best;
  bool found = false;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find('"', pos);
    if (open == std::string_view::npos) break;
    const auto close = text.find('"', open + 1);
    if (close == std::string_view::npos) break;
    const auto span = text.substr(open + 1, close - open - 1);
    if (!span.empty() && (!found || span.size() > best.size())) {
      best = span;
      found = true;
    }
    pos = close + 1;
  }
  if (!found) throw MissingQuote("no double-quoted span in: " + std::string(text.substr(0, 80)));
  return std::string(best);
}

CorpusStats dataset_stats(const std::vector<Instruction>& corpus) {
  if (corpus.empty()) throw EmptyCorpus("cannot summarize an empty corpus");
  CorpusStats stats;
  stats.n_instructions = corpus.size();
  double instruction_words = 0;
  double quote_words = 0;
  for (const auto& item : corpus) {
    instruction_words += static_cast<double>(count_words(item.instruction));
    quote_words += static_cast<double>(count_words(item.quote));
    ++stats.category_histogram[item.category];
  }
  const auto n = static_cast<double>(corpus.size());
  stats.avg_words_instruction = instruction_words / n;
  stats.avg_words_quote = quote_words / n;
  return stats;
}

Instruction synth_instruction(std::string_view seed_text, std::string_view quote,
                              chat::ChatBackend& chat, const SynthOptions& options) {
  if (options.iterations < 1) throw PreconditionError("synth_instruction needs iterations >= 1");
  if (quote.empty()) throw PreconditionError("synth_instruction needs a nonempty quote");
  if (quote.find('"') != std::string_view::npos) {
    throw PreconditionError("quote must not contain double-quote characters");
  }

  std::string current = embed_quote(seed_text, quote);
  for (int round = 0; round < options.iterations; ++round) {
    chat::ChatRequest request;
    request.messages.push_back({"system", {chat::ContentPart::text(std::string(prompts::kRecaption))}});
    request.messages.push_back({"user", {chat::ContentPart::text(current)}});
    current = embed_quote(chat.complete(request).content, quote);
  }

  Instruction out;
  out.id = options.id.empty() ? fallback_id(seed_text, quote) : options.id;
  out.instruction = std::move(current);
  out.quote = std::string(quote);
  out.category = options.category;
  out.style = options.style;
  out.extra["recaption_prompt"] = std::string(prompts::kRecaptionVersion);
  out.extra["recaption_iterations"] = options.iterations;
  validate(out);
  return out;
}

}  // namespace typescore::corpus
