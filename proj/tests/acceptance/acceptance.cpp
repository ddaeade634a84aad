// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <future>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support/mock_chat_server.hpp"
#include "support/oracles.hpp"
#include "typescore/annotation.hpp"
#include "typescore/corpus.hpp"
#include "typescore/corruption.hpp"
#include "typescore/errors.hpp"
#include "typescore/extraction.hpp"
#include "typescore/kernels.hpp"
#include "typescore/meta_eval.hpp"
#include "typescore/metrics.hpp"
#include "typescore/pipeline.hpp"
#include "typescore/stats.hpp"

using namespace typescore;
using Clock = std::chrono::steady_clock;
using metrics::MetricKind;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "; failed: ";
      else detail << ", ";
      detail << what;
      pass = false;
    }
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const std::string kData = TYPESCORE_DATA_DIR;

std::vector<corpus::Instruction> sample_corpus() { return corpus::load_dataset(kData + "/typeinst_sample.jsonl"); }

double mean_ensemble_at(const std::vector<corpus::Instruction>& items, double rate, std::uint64_t seed) {
  const auto spec = corruption::CorruptionSpec::uniform(rate, seed);
  double sum = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    sum += metrics::ensemble(normalize_text(items[i].quote), normalize_text(corruption::corrupt_text(items[i].quote, spec, i)))
               .value;
  }
  return sum / static_cast<double>(items.size());
}

// Serves fixed texts per image id, standing in for a backend.
class MapExtractor final : public extraction::Extractor {
 public:
  explicit MapExtractor(std::map<std::string, std::string> texts) : texts_(std::move(texts)) {}
  extraction::ExtractedText extract(const extraction::ImageInput& image) override {
    extraction::ExtractedText out;
    out.image_id = image.image_id;
    out.backend_id = id_;
    out.raw_response = texts_.at(image.image_id);
    out.text = normalize_text(out.raw_response);
    return out;
  }
  const std::string& backend_id() const override { return id_; }
  int max_concurrency() const override { return 1; }
  bool needs_image_bytes() const override { return false; }

 private:
  std::map<std::string, std::string> texts_;
  std::string id_ = "synthetic";
};

Outcome oracle_equivalence() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> len(0, 12), ch(0, 3);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    std::u32string a(len(rng), U'a'), b(len(rng), U'a');
    for (auto& c : a) c = U'a' + ch(rng);
    for (auto& c : b) c = U'a' + ch(rng);
    const int lev = oracle::levenshtein(a, b);
    const int lcs = oracle::lcs_length(a, b);
    const int sw = oracle::local_alignment(a, b, 2, -1, -1);
    const int sw2 = oracle::local_alignment(a, b, 3, -3, -2);
    for (const kernels::KernelTable* table : {&kernels::scalar_table(), kernels::avx2_table()}) {
      if (table == nullptr) continue;
      mismatches += table->levenshtein(a, b) != lev;
      mismatches += table->lcs_length(a, b) != lcs;
      mismatches += table->local_alignment(a, b, {}) != sw;
      mismatches += table->local_alignment(a, b, {3, -3, -2}) != sw2;
    }
  }
  const double secs = seconds_since(t0);
  o.detail << "1000 pairs, " << mismatches << " mismatches, kernels " << kernels::isa_name(kernels::active_isa())
           << (kernels::avx2_table() ? "+scalar" : "") << ", " << secs << " s";
  o.require(mismatches == 0, "oracle mismatch");
  o.require(secs < 10.0, "time >= 10 s");
  return o;
}

std::string random_unicode(std::mt19937_64& rng) {
  static const char32_t pools[][2] = {{0x21, 0x7E}, {0xC0, 0x24F}, {0x391, 0x3C9}, {0x400, 0x4FF},
                                      {0x4E00, 0x9FFF}, {0x1F300, 0x1F64F}, {0x20, 0x20}};
  std::u32string s(1 + rng() % 40, U'a');
  for (auto& c : s) {
    const auto& p = pools[rng() % 7];
    c = p[0] + static_cast<char32_t>(rng() % (p[1] - p[0] + 1));
  }
  return u32_to_utf8(s);
}

Outcome range_and_identity() {
  Outcome o;
  std::mt19937_64 rng(2);
  std::vector<NormalizedText> strings;
  while (strings.size() < 500) {
    auto t = normalize_text(random_unicode(rng));
    if (!t.empty()) strings.push_back(std::move(t));
  }
  const NormalizedText empty = normalize_text("");
  int range = 0, identity = 0, emptiness = 0;
  double worst_ensemble = 0;
  for (std::size_t i = 0; i < strings.size(); ++i) {
    const auto& a = strings[i];
    const auto& b = strings[(i + 1) % strings.size()];
    auto s = metrics::score_all(a, b);
    for (auto [k, v] : s) range += !(v >= 0.0 && v <= 1.0);
    const double mean = (s[MetricKind::Ned] + s[MetricKind::SmithWaterman] + s[MetricKind::Nlcs]) / 3.0;
    worst_ensemble = std::max(worst_ensemble, std::abs(s[MetricKind::Ensemble] - mean));
    for (auto [k, v] : metrics::score_all(a, a)) identity += v != 1.0;
    for (auto [k, v] : metrics::score_all(a, empty)) emptiness += v != 0.0;
    for (auto [k, v] : metrics::score_all(empty, a)) emptiness += v != 0.0;
  }
  o.detail << "500 strings, range violations " << range << ", identity violations " << identity
           << ", empty-side violations " << emptiness << ", max |ensemble - mean| " << worst_ensemble;
  o.require(range == 0, "range");
  o.require(identity == 0, "identity");
  o.require(emptiness == 0, "empty side");
  o.require(worst_ensemble <= 1e-12, "ensemble decomposition");
  return o;
}

Outcome corruption_monotonicity() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto items = sample_corpus();
  const std::vector<double> rates = {0, 0.05, 0.1, 0.2, 0.4};
  std::vector<double> means;
  for (double r : rates) means.push_back(mean_ensemble_at(items, r, 0));
  bool strict = true;
  for (std::size_t i = 1; i < means.size(); ++i) strict = strict && means[i] < means[i - 1];
  const double rho = stats::spearman(rates, means).r;
  const double secs = seconds_since(t0);
  o.detail << items.size() << " items, means";
  for (double m : means) o.detail << " " << m;
  o.detail << ", spearman " << rho << ", " << secs << " s";
  o.require(items.size() == 118, "corpus size");
  o.require(strict, "not strictly decreasing");
  o.require(rho <= -0.95, "spearman > -0.95");
  o.require(secs < 30.0, "time >= 30 s");
  return o;
}

pipeline::MetricReport synthetic_model(const std::vector<corpus::Instruction>& items, const std::string& model,
                                       double rate, std::uint64_t seed) {
  const auto spec = corruption::CorruptionSpec::uniform(rate, seed);
  std::map<std::string, std::string> texts;
  std::vector<pipeline::GeneratedImage> images;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string image = model + "/" + items[i].id;
    texts[image] = corruption::corrupt_text(items[i].quote, spec, i);
    images.push_back({image, items[i].id, model, ""});
  }
  MapExtractor ex(std::move(texts));
  auto report = pipeline::score_run(items, images, ex);
  report.model_id = model;
  return report;
}

Outcome synthetic_ranking() {
  Outcome o;
  const auto items = sample_corpus();
  const auto good = synthetic_model(items, "rate-0.05", 0.05, 11);
  const auto bad = synthetic_model(items, "rate-0.30", 0.30, 12);
  const auto& g = good.aggregates.at(MetricKind::Ensemble);
  const auto& b = bad.aggregates.at(MetricKind::Ensemble);
  o.detail << "TypeScore " << g.mean << " ± " << g.sem << " vs " << b.mean << " ± " << b.sem;
  o.require(g.mean > b.mean, "wrong order");
  o.require(g.mean - g.sem > b.mean + b.sem, "intervals overlap");
  return o;
}

Outcome synthetic_alignment() {
  Outcome o;
  const auto items = sample_corpus();
  const std::vector<double> levels = {0.0, 0.05, 0.1, 0.2, 0.4};
  std::mt19937_64 rng(3);
  std::vector<meta_eval::PreferencePair> pairs;
  meta_eval::ScoreTable ensemble_scores, constant_scores;
  for (int i = 0; i < 200; ++i) {
    const std::size_t item = static_cast<std::size_t>(i) % items.size();
    std::size_t la = rng() % levels.size(), lb = rng() % levels.size();
    while (lb == la) lb = rng() % levels.size();
    const std::string id = "pair-" + std::to_string(i);
    meta_eval::PreferencePair p;
    p.pair_id = id;
    p.instruction_id = items[item].id;
    p.left = {"level-" + std::to_string(la), id + "-L", ""};
    p.right = {"level-" + std::to_string(lb), id + "-R", ""};
    const auto label = la < lb ? meta_eval::Label::Left : meta_eval::Label::Right;
    for (auto q : meta_eval::kQuestions) p.human_label[q] = label;
    p.status = meta_eval::TaskStatus::Resolved;
    p.judgments = 3;
    pairs.push_back(p);

    const auto quote = normalize_text(items[item].quote);
    auto score_side = [&](std::size_t level, std::uint64_t salt) {
      const auto spec = corruption::CorruptionSpec::uniform(levels[level], 1000 + salt);
      return metrics::ensemble(quote, normalize_text(corruption::corrupt_text(items[item].quote, spec, static_cast<std::uint64_t>(i))))
          .value;
    };
    ensemble_scores[{p.left.model_id, p.left.image_id}] = score_side(la, 2 * static_cast<std::uint64_t>(i));
    ensemble_scores[{p.right.model_id, p.right.image_id}] = score_side(lb, 2 * static_cast<std::uint64_t>(i) + 1);
    constant_scores[{p.left.model_id, p.left.image_id}] = 0.5;
    constant_scores[{p.right.model_id, p.right.image_id}] = 0.5;
  }
  const auto acc = meta_eval::alignment_accuracy(pairs, ensemble_scores, meta_eval::Question::Overall);
  const auto flat = meta_eval::alignment_accuracy(pairs, constant_scores, meta_eval::Question::Overall);
  o.detail << acc.n_pairs << " pairs, ensemble accuracy " << acc.accuracy << " ± " << acc.sem
           << ", constant metric " << flat.accuracy;
  o.require(acc.n_pairs == 200, "pair count");
  o.require(acc.accuracy >= 0.90, "ensemble accuracy < 0.90");
  o.require(flat.accuracy == 0.5, "constant metric != 0.5");
  return o;
}

Outcome length_insensitivity() {
  Outcome o;
  const auto items = corpus::load_dataset(kData + "/length_stratified.jsonl");
  const auto spec = corruption::CorruptionSpec::uniform(0.1, 0);
  std::vector<double> words, scores;
  std::size_t lo = 1000, hi = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto n = count_words(items[i].quote);
    lo = std::min(lo, n);
    hi = std::max(hi, n);
    words.push_back(static_cast<double>(n));
    scores.push_back(metrics::ensemble(normalize_text(items[i].quote),
                                       normalize_text(corruption::corrupt_text(items[i].quote, spec, i)))
                         .value);
  }
  const double r = stats::pearson(words, scores).r;
  // Spread over other seeds, reported only.
  double r_min = r, r_max = r;
  for (std::uint64_t seed = 1; seed < 20; ++seed) {
    const auto other = corruption::CorruptionSpec::uniform(0.1, seed);
    std::vector<double> s;
    for (std::size_t i = 0; i < items.size(); ++i) {
      s.push_back(metrics::ensemble(normalize_text(items[i].quote),
                                    normalize_text(corruption::corrupt_text(items[i].quote, other, i)))
                      .value);
    }
    const double ri = stats::pearson(words, s).r;
    r_min = std::min(r_min, ri);
    r_max = std::max(r_max, ri);
  }
  o.detail << items.size() << " quotes of " << lo << "-" << hi << " words, pearson r " << r
           << " (seeds 0-19: " << r_min << " to " << r_max << ")";
  o.require(lo == 2 && hi == 30, "length range");
  o.require(std::abs(r) < 0.15, "|r| >= 0.15");
  return o;
}

Outcome judgment_fixtures() {
  Outcome o;
  using meta_eval::Answer;
  using meta_eval::Label;
  const Answer L = Answer::Left, R = Answer::Right, T = Answer::Tie;
  struct Case {
    std::vector<Answer> votes;
    Label expected;
    const char* name;
  };
  const std::vector<Case> cases = {{{L, L, R}, Label::Left, "[L,L,R]"},
                                   {{L, R, T, L, L}, Label::Left, "[L,R,TIE,L,L]"},
                                   {{L, R, T, L, R}, Label::Unresolved, "[L,R,TIE,L,R]"}};
  for (const auto& c : cases) {
    const auto got = meta_eval::aggregate_votes(c.votes).label;
    o.require(got == c.expected, std::string(c.name) + " -> " + std::string(meta_eval::label_name(got)));
  }

  // The same sequences through the live store: status after each judgment
  // and the cap on raters served.
  for (const auto& c : cases) {
    annotation::StoreConfig cfg;
    meta_eval::PreferencePair p;
    p.pair_id = "p";
    p.instruction_id = "i";
    p.left = {"A", "a", ""};
    p.right = {"B", "b", ""};
    cfg.pairs = {p};
    cfg.gold = {{"g", L}};
    annotation::AnnotationStore store(std::move(cfg));
    annotation::TaskState last;
    for (std::size_t k = 0; k < c.votes.size(); ++k) {
      const std::string rater = "r" + std::to_string(k);
      store.qualify_rater(rater, {{"g", L}});
      const auto task = store.next_task(rater);
      const bool swapped = task.left_image_url == "/images/b";
      Answer seen = c.votes[k];
      if (swapped && seen != T) seen = seen == L ? R : L;
      last = store.submit_judgment(rater, "p", {{meta_eval::Question::TextFidelity, seen},
                                                {meta_eval::Question::StyleFidelity, seen},
                                                {meta_eval::Question::Overall, seen}});
      if (k + 1 < c.votes.size()) o.require(last.status == meta_eval::TaskStatus::Open, std::string(c.name) + " settled early");
    }
    const auto exported = store.export_annotations().at(0).human_label.at(meta_eval::Question::Overall);
    o.require(exported == c.expected, std::string(c.name) + " via store");
    bool capped = false;
    store.qualify_rater("late", {{"g", L}});
    try {
      store.next_task("late");
    } catch (const NoTasksRemaining&) {
      capped = true;
    }
    o.require(capped, std::string(c.name) + " served after settling");
  }
  o.detail << "3 vote sequences checked directly and through the annotation store";
  return o;
}

Outcome extraction_wire_contract() {
  Outcome o;
  ::setenv("TYPESCORE_ACCEPTANCE_KEY", "sk-acceptance", 1);
  const std::string vlm_prompt =
      "Identify the main text contained in this image, and output it between quotes, without correcting "
      "any typos or issues you may encounter. Do not output anything else.";
  const std::string caption = "BIRTHDY HAPPY 50 | Party at 7";
  const std::string refine_prompt =
      "This image contains a main quote and it might contain additional text. We already extracted both "
      "the main quote and any additional text from the image, and it follows: " +
      caption +
      ". We want to isolate only the main quote. From this text, identify the main quote and extract it in "
      "the right order, without correcting any typos or issues you may encounter, and without adding any "
      "new words. Output the main quote between quotes and do not output anything else.";

  auto config = [](const testutil::MockChatServer& server) {
    extraction::BackendConfig cfg;
    cfg.endpoint = server.url();
    cfg.model_name = "mock";
    cfg.api_key_env = "TYPESCORE_ACCEPTANCE_KEY";
    cfg.backoff_base = std::chrono::milliseconds(25);
    return cfg;
  };
  const extraction::ImageInput image{"img", "img.png", "PNGDATA", "image/png"};

  // prompts, byte for byte
  {
    testutil::MockChatServer server([](std::size_t, const std::string&) {
      return testutil::MockChatServer::Reply{200, testutil::MockChatServer::completion("\"BIRTHDY HAPPY 50\"")};
    });
    auto cfg = config(server);
    extraction::make_extractor(cfg)->extract(image);
    cfg.kind = extraction::BackendKind::OcrRefine;
    const auto refined = extraction::make_extractor(cfg, [&](const extraction::ImageInput&) {
                           return std::vector<std::string>{caption};
                         })->extract(image);
    const auto reqs = server.requests();
    o.require(reqs.size() == 2, "request count");
    if (reqs.size() == 2) {
      const auto vlm = nlohmann::json::parse(reqs[0].body)["messages"][0]["content"];
      const auto ref = nlohmann::json::parse(reqs[1].body)["messages"][0]["content"];
      o.require(vlm[0]["text"].get<std::string>() == vlm_prompt, "VLM prompt bytes");
      o.require(vlm[1]["image_url"]["url"] == "data:image/png;base64,UE5HREFUQQ==", "image data URL");
      o.require(ref.size() == 1 && ref[0]["text"].get<std::string>() == refine_prompt, "refine template bytes");
    }
    o.require(refined.text.normalized == "birthdy happy 50", "refine keeps typos");
  }

  // retry with exponential backoff
  {
    testutil::MockChatServer server([](std::size_t i, const std::string&) {
      if (i < 3) return testutil::MockChatServer::Reply{i == 1 ? 503 : 429, "{}"};
      return testutil::MockChatServer::Reply{200, testutil::MockChatServer::completion("\"OK\"")};
    });
    const auto out = extraction::make_extractor(config(server))->extract(image);
    const auto reqs = server.requests();
    o.require(out.retries_used == 3 && reqs.size() == 4, "retry count");
    for (std::size_t k = 1; k < reqs.size(); ++k) {
      const auto gap = reqs[k].arrived - reqs[k - 1].arrived;
      o.require(gap >= std::chrono::milliseconds(25 << (k - 1)), "backoff gap " + std::to_string(k));
    }
  }
  {
    testutil::MockChatServer server([](std::size_t, const std::string&) { return testutil::MockChatServer::Reply{500, "{}"}; });
    bool transport = false;
    try {
      extraction::make_extractor(config(server))->extract(image);
    } catch (const TransportError&) {
      transport = true;
    }
    o.require(transport && server.requests().size() == 4, "retries exhausted -> TransportError");
  }

  // concurrency bound
  int peak = 0;
  {
    testutil::MockChatServer server([](std::size_t, const std::string&) {
      return testutil::MockChatServer::Reply{200, testutil::MockChatServer::completion("\"x\""), std::chrono::milliseconds(40)};
    });
    auto cfg = config(server);
    cfg.max_concurrency = 3;
    auto ex = extraction::make_extractor(cfg);
    std::vector<std::future<extraction::ExtractedText>> jobs;
    for (int k = 0; k < 12; ++k) jobs.push_back(std::async(std::launch::async, [&] { return ex->extract(image); }));
    for (auto& j : jobs) j.get();
    peak = server.max_in_flight();
    o.require(peak <= 3, "more than max_concurrency in flight");
  }

  // quoted-response parsing
  const std::vector<std::pair<std::string, std::string>> fixtures = {
      {"\"NEW YORK CITY\"", "NEW YORK CITY"}, {"The text is \"a@b\".", "a@b"}, {"GRAND OPENING", "GRAND OPENING"}};
  for (const auto& [raw, expected] : fixtures) {
    o.require(extraction::parse_quoted_response(raw) == expected, "parse " + raw);
  }
  o.detail << "prompts byte-exact, 3 retries with doubling backoff, peak in-flight " << peak
           << " of 3, 3 parsing fixtures";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"metric range and identity", range_and_identity},
      {"corruption monotonicity", corruption_monotonicity},
      {"synthetic model ranking", synthetic_ranking},
      {"synthetic alignment accuracy", synthetic_alignment},
      {"length insensitivity", length_insensitivity},
      {"judgment aggregation fixtures", judgment_fixtures},
      {"extraction wire contract", extraction_wire_contract},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << "exception: " << e.what();
    }
    failures += out.pass ? 0 : 1;
    std::cout << (out.pass ? "PASS  " : "FAIL  ") << c.name << "  (" << out.detail.str() << ")" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
