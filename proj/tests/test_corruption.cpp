#include <doctest.h>

#include <algorithm>

#include "support/temp_dir.hpp"
#include "typescore/corpus.hpp"
#include "typescore/corruption.hpp"
#include "typescore/errors.hpp"
#include "typescore/metrics.hpp"

using namespace typescore;
using namespace typescore::corruption;

TEST_CASE("zero rates are the identity") {
  CorruptionSpec spec;
  CHECK(corrupt_text("Grand Opening Today", spec) == "Grand Opening Today");
  CHECK(corrupt_text("", CorruptionSpec::uniform(0.5)) == "");
}

TEST_CASE("blank and full deletion give empty text") {
  CorruptionSpec blank;
  blank.blank = true;
  CHECK(corrupt_text("anything", blank) == "");
  CorruptionSpec del;
  del.char_delete = 1.0;
  CHECK(corrupt_text("anything at all", del) == "");
  CHECK(corrupt_text("caf\xc3\xa9", del) == "");
}

TEST_CASE("full glyph substitution replaces every character") {
  CorruptionSpec spec;
  spec.glyph_substitute = 1.0;
  CHECK(corrupt_text("ab\xc3\xa9", spec) == "@@@");
}

TEST_CASE("full duplication doubles each character") {
  CorruptionSpec spec;
  spec.char_duplicate = 1.0;
  CHECK(corrupt_text("abc", spec) == "aabbcc");
}

TEST_CASE("truncation keeps the leading share") {
  CorruptionSpec spec;
  spec.truncate_fraction = 0.5;
  CHECK(corrupt_text("abcdefgh", spec) == "abcd");
}

TEST_CASE("word operations") {
  CorruptionSpec del;
  del.word_delete = 1.0;
  CHECK(corrupt_text("one two three", del) == "");
  CorruptionSpec dup;
  dup.word_duplicate = 1.0;
  CHECK(corrupt_text("one two", dup) == "one one two two");
  CorruptionSpec shuffle;
  shuffle.word_shuffle = true;
  shuffle.seed = 4;
  auto out = corrupt_text("alpha beta gamma delta epsilon", shuffle);
  auto words = [](std::string s) {
    std::vector<std::string> w;
    std::string cur;
    for (char c : s + " ") {
      if (c == ' ') {
        if (!cur.empty()) w.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    std::sort(w.begin(), w.end());
    return w;
  };
  CHECK(words(out) == words("alpha beta gamma delta epsilon"));
}

TEST_CASE("deterministic and seed sensitive") {
  auto spec = CorruptionSpec::uniform(0.2, 99);
  const std::string text = "The quick brown fox jumps over the lazy dog";
  CHECK(corrupt_text(text, spec, 3) == corrupt_text(text, spec, 3));
  auto other = CorruptionSpec::uniform(0.2, 100);
  CHECK(corrupt_text(text, spec, 3) != corrupt_text(text, other, 3));
  CHECK(corrupt_text(text, spec, 3) != corrupt_text(text, spec, 4));
}

TEST_CASE("rates outside [0, 1] are rejected") {
  CorruptionSpec spec;
  spec.char_delete = 1.5;
  CHECK_THROWS_AS(spec.validate(), PreconditionError);
  CHECK_THROWS_AS(corrupt_text("x", spec), PreconditionError);
  spec.char_delete = -0.1;
  CHECK_THROWS_AS(spec.validate(), PreconditionError);
}

TEST_CASE("spec json round trip") {
  CorruptionSpec spec = CorruptionSpec::uniform(0.1, 7);
  spec.word_shuffle = true;
  spec.truncate_fraction = 0.25;
  auto back = CorruptionSpec::from_json(spec.to_json());
  CHECK(back.to_json() == spec.to_json());
}

TEST_CASE("generate_pairs") {
  std::vector<corpus::Instruction> two = {{"a", "say \"hello there\"", "hello there", "", "", {}},
                                          {"b", "say \"good night moon\"", "good night moon", "", "", {}}};
  std::vector<CorruptionSpec> specs = {CorruptionSpec::uniform(0.0, 1), CorruptionSpec::uniform(0.3, 1),
                                       CorruptionSpec::uniform(0.6, 2)};
  auto pairs = generate_pairs(two, specs);
  REQUIRE(pairs.size() == 6);
  CHECK(pairs[0].instruction_id == "a");
  CHECK(pairs[2].spec_index == 2);
  CHECK(pairs[3].instruction_id == "b");
  for (const auto& p : pairs) {
    if (p.spec_index == 0) CHECK(p.corrupted == p.quote);
  }
  CHECK(serialize_pairs(pairs) == serialize_pairs(generate_pairs(two, specs)));

  // adding specs never changes the draws of existing ones
  specs.push_back(CorruptionSpec::uniform(0.9, 3));
  auto more = generate_pairs(two, specs);
  CHECK(more[1].corrupted == pairs[1].corrupted);
  CHECK(more[5].corrupted == pairs[4].corrupted);
}

TEST_CASE("load specs from a file") {
  testutil::TempDir dir;
  auto path = dir.write("s.jsonl", "{\"char_delete\": 0.1, \"seed\": 3}\n\n{\"blank\": true}\n");
  auto specs = load_specs(path);
  REQUIRE(specs.size() == 2);
  CHECK(specs[0].char_delete == 0.1);
  CHECK(specs[0].seed == 3);
  CHECK(specs[1].blank);
  auto bad = dir.write("b.jsonl", "{\"char_delete\": \"lots\"}\n");
  CHECK_THROWS_AS(load_specs(bad), ParseError);
}

TEST_CASE("higher rates lower the mean ensemble on the sample corpus") {
  auto items = corpus::load_dataset(std::string(TYPESCORE_DATA_DIR) + "/typeinst_sample.jsonl");
  double previous = 2.0;
  for (double rate : {0.0, 0.1, 0.3}) {
    auto spec = CorruptionSpec::uniform(rate, 1);
    double sum = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      sum += metrics::ensemble(normalize_text(items[i].quote), normalize_text(corrupt_text(items[i].quote, spec, i)))
                 .value;
    }
    const double mean = sum / static_cast<double>(items.size());
    CHECK(mean < previous);
    previous = mean;
  }
}
