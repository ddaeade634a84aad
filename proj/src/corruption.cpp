#include "typescore/corruption.hpp"

#include <utility>

#include "typescore/errors.hpp"
#include "typescore/rng.hpp"
#include "typescore/text.hpp"

namespace typescore::corruption {
namespace {

// Stream ids; part of the reproducibility contract, never renumber.
enum Op : std::uint64_t {
  kWordDelete = 0,
  kWordDuplicate = 1,
  kWordShuffle = 2,
  kCharDelete = 3,
  kCharDuplicate = 4,
  kCharTranspose = 5,
  kGlyphSubstitute = 6,
};

bool is_space(char32_t c) { return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r'; }

std::vector<std::u32string> split_words(const std::u32string& text) {
  std::vector<std::u32string> words;
  std::u32string current;
  for (char32_t c : text) {
    if (is_space(c)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::u32string word_stage(const std::u32string& text, const CorruptionSpec& spec,
                          std::uint64_t item) {
  const CounterRng del(spec.seed, item, kWordDelete);
  const CounterRng dup(spec.seed, item, kWordDuplicate);
  const CounterRng shuffle(spec.seed, item, kWordShuffle);

  const auto words = split_words(text);
  std::vector<std::u32string> kept;
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (del.uniform(w) < spec.word_delete) continue;
    kept.push_back(words[w]);
    if (dup.uniform(w) < spec.word_duplicate) kept.push_back(words[w]);
  }
  if (spec.word_shuffle) {
    for (std::size_t i = kept.size(); i > 1; --i) {
      std::swap(kept[i - 1], kept[shuffle.below(i, i)]);
    }
  }

  std::u32string out;
  for (const auto& w : kept) {
    if (!out.empty()) out.push_back(U' ');
    out += w;
  }
  return out;
}

std::u32string char_stage(const std::u32string& text, const CorruptionSpec& spec,
                          std::uint64_t item) {
  const CounterRng del(spec.seed, item, kCharDelete);
  const CounterRng glyph(spec.seed, item, kGlyphSubstitute);
  const CounterRng dup(spec.seed, item, kCharDuplicate);
  const CounterRng swap(spec.seed, item, kCharTranspose);

  std::u32string out;
  out.reserve(text.size() * 2);
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (del.uniform(i) < spec.char_delete) continue;
    const char32_t c = glyph.uniform(i) < spec.glyph_substitute ? kGlyphPlaceholder : text[i];
    out.push_back(c);
    if (dup.uniform(i) < spec.char_duplicate) out.push_back(c);
  }
  for (std::size_t i = 0; i + 1 < out.size(); ++i) {
    if (swap.uniform(i) < spec.char_transpose) {
      std::swap(out[i], out[i + 1]);
      ++i;
    }
  }
  return out;
}

double rate_field(const io::Json& record, const char* field, std::size_t line) {
  const auto it = record.find(field);
  if (it == record.end() || it->is_null()) return 0.0;
  if (!it->is_number()) throw ParseError(std::string("field '") + field + "' must be a number", line);
  const double v = it->get<double>();
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ValidationError(std::string("field '") + field + "' must lie in [0, 1] (line " +
                          std::to_string(line) + ")");
  }
  return v;
}

bool flag_field(const io::Json& record, const char* field, std::size_t line) {
  const auto it = record.find(field);
  if (it == record.end() || it->is_null()) return false;
  if (!it->is_boolean()) throw ParseError(std::string("field '") + field + "' must be a boolean", line);
  return it->get<bool>();
}

}  // namespace

void CorruptionSpec::validate() const {
  for (double rate : {char_delete, char_duplicate, char_transpose, glyph_substitute, word_delete,
                      word_duplicate, truncate_fraction}) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw PreconditionError("corruption rates must lie in [0, 1]");
  }
}

CorruptionSpec CorruptionSpec::uniform(double rate, std::uint64_t seed) {
  CorruptionSpec spec;
  spec.char_delete = spec.char_duplicate = spec.char_transpose = spec.glyph_substitute = rate;
  spec.seed = seed;
  return spec;
}

io::Json CorruptionSpec::to_json() const {
  io::Json r = io::Json::object();
  r["char_delete"] = char_delete;
  r["char_duplicate"] = char_duplicate;
  r["char_transpose"] = char_transpose;
  r["glyph_substitute"] = glyph_substitute;
  r["word_delete"] = word_delete;
  r["word_duplicate"] = word_duplicate;
  r["word_shuffle"] = word_shuffle;
  r["truncate_fraction"] = truncate_fraction;
  r["blank"] = blank;
  r["seed"] = seed;
  return r;
}

CorruptionSpec CorruptionSpec::from_json(const io::Json& record, std::size_t line) {
  CorruptionSpec spec;
  spec.char_delete = rate_field(record, "char_delete", line);
  spec.char_duplicate = rate_field(record, "char_duplicate", line);
  spec.char_transpose = rate_field(record, "char_transpose", line);
  spec.glyph_substitute = rate_field(record, "glyph_substitute", line);
  spec.word_delete = rate_field(record, "word_delete", line);
  spec.word_duplicate = rate_field(record, "word_duplicate", line);
  spec.truncate_fraction = rate_field(record, "truncate_fraction", line);
  spec.word_shuffle = flag_field(record, "word_shuffle", line);
  spec.blank = flag_field(record, "blank", line);
  if (const auto it = record.find("seed"); it != record.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw ParseError("field 'seed' must be an integer", line);
    spec.seed = it->get<std::uint64_t>();
  }
  return spec;
}

std::string corrupt_text(std::string_view text, const CorruptionSpec& spec,
                         std::uint64_t item_index) {
  spec.validate();
  if (spec.blank) return {};

  std::u32string work = utf8_to_u32(text);
  if (spec.word_delete > 0 || spec.word_duplicate > 0 || spec.word_shuffle) {
    work = word_stage(work, spec, item_index);
  }
  work = char_stage(work, spec, item_index);
  if (spec.truncate_fraction > 0) {
    const auto keep = static_cast<std::size_t>(static_cast<double>(work.size()) *
                                                (1.0 - spec.truncate_fraction));
    work.resize(std::min(keep, work.size()));
  }
  return u32_to_utf8(work);
}

std::vector<CorruptedPair> generate_pairs(const std::vector<corpus::Instruction>& corpus,
                                          const std::vector<CorruptionSpec>& specs) {
  if (corpus.empty()) throw EmptyCorpus("generate_pairs needs a nonempty corpus");
  std::vector<CorruptedPair> pairs;
  pairs.reserve(corpus.size() * specs.size());
  for (std::size_t item = 0; item < corpus.size(); ++item) {
    for (std::size_t s = 0; s < specs.size(); ++s) {
      pairs.push_back({corpus[item].id, corpus[item].quote,
                       corrupt_text(corpus[item].quote, specs[s], item), s});
    }
  }
  return pairs;
}

std::vector<CorruptionSpec> load_specs(const std::filesystem::path& path) {
  std::vector<CorruptionSpec> specs;
  io::for_each_record(path, [&](const io::Json& record, std::size_t line) {
    specs.push_back(CorruptionSpec::from_json(record, line));
  });
  return specs;
}

std::string serialize_pairs(const std::vector<CorruptedPair>& pairs) {
  std::vector<io::Json> records;
  records.reserve(pairs.size());
  for (const auto& p : pairs) {
    io::Json r = io::Json::object();
    r["instruction_id"] = p.instruction_id;
    r["quote"] = p.quote;
    r["corrupted"] = p.corrupted;
    r["spec_index"] = p.spec_index;
    records.push_back(std::move(r));
  }
  return io::to_jsonl(records);
}

}  // namespace typescore::corruption
