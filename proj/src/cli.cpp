#include "typescore/cli.hpp"

#include <cstdio>
#include <ostream>

#include <CLI11.hpp>

#include "typescore/annotation.hpp"
#include "typescore/corpus.hpp"
#include "typescore/corruption.hpp"
#include "typescore/errors.hpp"
#include "typescore/extraction.hpp"
#include "typescore/meta_eval.hpp"
#include "typescore/metrics.hpp"
#include "typescore/pipeline.hpp"

namespace typescore::cli {
namespace {

enum class Format { Table, Json };

struct AlignmentFlags {
  int match = 2;
  int mismatch = -1;
  int gap = -1;

  void add_to(CLI::App* app) {
    app->add_option("--sw-match", match, "Smith-Waterman match score (> 0)")->capture_default_str();
    app->add_option("--sw-mismatch", mismatch, "Smith-Waterman mismatch score (<= 0)")->capture_default_str();
    app->add_option("--sw-gap", gap, "Smith-Waterman linear gap score (<= 0)")->capture_default_str();
  }
  metrics::AlignmentParams params() const {
    metrics::AlignmentParams p{match, mismatch, gap};
    p.validate();
    return p;
  }
};

void add_format(CLI::App* app, Format& format) {
  app->add_option("--format", format, "Standard output format")
      ->transform(CLI::CheckedTransformer(std::map<std::string, Format>{{"table", Format::Table},
                                                                        {"json", Format::Json}},
                                          CLI::ignore_case))
      ->capture_default_str();
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct MetricsArgs {
  std::string ref;
  std::string hyp;
  bool no_case_fold = false;
  AlignmentFlags align;
  Format format = Format::Table;
};

int run_metrics(const MetricsArgs& a, std::ostream& out) {
  const auto params = a.align.params();
  const auto ref = normalize_text(a.ref, !a.no_case_fold);
  const auto hyp = normalize_text(a.hyp, !a.no_case_fold);
  const auto scores = metrics::score_all(ref, hyp, params);
  if (a.format == Format::Json) {
    io::Json doc = io::Json::object();
    for (const auto& [kind, value] : scores) doc[std::string(metrics::metric_id(kind))] = value;
    out << doc.dump(2) << '\n';
  } else {
    for (const auto& [kind, value] : scores) {
      std::string id(metrics::metric_id(kind));
      id.resize(16, ' ');
      out << id << fixed6(value) << '\n';
    }
  }
  return 0;
}

struct ScoreArgs {
  std::string dataset;
  std::string images;
  std::string backend = "vlm";
  std::string model_id;
  std::string out;
  std::string oracle_file;
  std::string endpoint;
  std::string model_name;
  std::string api_key_env = "TYPESCORE_API_KEY";
  std::string ocr_command;
  int max_retries = 3;
  int max_concurrency = 4;
  int timeout_ms = 60000;
  double rpm = 0;
  bool no_case_fold = false;
  AlignmentFlags align;
  Format format = Format::Table;
};

int run_score(const ScoreArgs& a, std::ostream& out) {
  extraction::BackendConfig cfg;
  cfg.kind = extraction::parse_backend_kind(a.backend);
  cfg.endpoint = a.endpoint;
  cfg.model_name = a.model_name;
  cfg.api_key_env = a.api_key_env;
  cfg.max_retries = a.max_retries;
  cfg.max_concurrency = a.max_concurrency;
  cfg.timeout = std::chrono::milliseconds(a.timeout_ms);
  cfg.requests_per_minute = a.rpm;
  cfg.ocr_command = a.ocr_command;
  cfg.oracle_path = a.oracle_file;
  cfg.case_fold = !a.no_case_fold;
  cfg.validate();
  const auto params = a.align.params();

  const auto corpus = corpus::load_dataset(a.dataset);
  std::vector<pipeline::GeneratedImage> images;
  for (auto& image : pipeline::load_manifest(a.images)) {
    if (image.model_id == a.model_id) images.push_back(std::move(image));
  }
  if (images.empty()) throw EmptyRun("manifest has no images for model '" + a.model_id + "'");

  auto extractor = extraction::make_extractor(cfg);
  const auto report = pipeline::score_run(corpus, images, *extractor, {params, cfg.case_fold});
  const io::Json doc = pipeline::report_to_json(report);
  if (!a.out.empty()) io::write_file_atomic(a.out, doc.dump(2) + "\n");
  if (a.format == Format::Json) {
    out << doc.dump(2) << '\n';
  } else {
    out << pipeline::render_table({report});
    std::size_t failed = 0;
    for (const auto& row : report.rows) failed += row.extracted.failed ? 1 : 0;
    if (failed) out << failed << " of " << report.rows.size() << " extractions failed (scored 0)\n";
  }
  return 0;
}

struct CorruptArgs {
  std::string dataset;
  std::string spec;
  std::string out;
};

int run_corrupt(const CorruptArgs& a, std::ostream& out) {
  const auto corpus = corpus::load_dataset(a.dataset);
  const auto specs = corruption::load_specs(a.spec);
  const auto pairs = corruption::generate_pairs(corpus, specs);
  io::write_file_atomic(a.out, corruption::serialize_pairs(pairs));
  out << "wrote " << pairs.size() << " pairs (" << corpus.size() << " quotes x " << specs.size()
      << " specs) to " << a.out << '\n';
  return 0;
}

struct MetaEvalArgs {
  std::string annotations;
  std::vector<std::string> scores;
  std::string out;
  int resamples = 1000;
  std::uint64_t seed = 0;
  Format format = Format::Table;
};

// A scores file is either a pipeline report (one JSON document) or
// line-delimited external scores.
void merge_scores(const std::string& path, std::map<std::string, meta_eval::ScoreTable>& into) {
  const std::string text = io::read_file(path);
  std::map<std::string, meta_eval::ScoreTable> tables;
  const io::Json whole = io::Json::parse(text, nullptr, false);
  if (!whole.is_discarded() && whole.is_object() && whole.contains("aggregates")) {
    tables = meta_eval::score_tables_from_report(pipeline::report_from_json(whole));
  } else {
    tables = meta_eval::parse_external_scores(text);
  }
  for (auto& [metric, table] : tables) {
    auto& target = into[metric];
    for (auto& [key, value] : table) {
      if (!target.emplace(key, value).second) {
        throw DuplicateKey("score for (" + key.first + ", " + key.second + ", " + metric +
                           ") appears in more than one scores file");
      }
    }
  }
}

int run_meta_eval(const MetaEvalArgs& a, std::ostream& out) {
  const auto pairs = meta_eval::load_annotations(a.annotations);
  std::map<std::string, meta_eval::ScoreTable> tables;
  for (const auto& path : a.scores) merge_scores(path, tables);
  const auto rows = meta_eval::accuracy_table(pairs, tables, {a.resamples, a.seed});

  io::Json doc = io::Json::object();
  doc["pairs"] = pairs.size();
  doc["extra_judge_fraction"] = meta_eval::extra_judge_fraction(pairs);
  doc["resamples"] = a.resamples;
  doc["seed"] = a.seed;
  doc["metrics"] = meta_eval::accuracy_table_to_json(rows);
  if (!a.out.empty()) io::write_file_atomic(a.out, doc.dump(2) + "\n");
  if (a.format == Format::Json) {
    out << doc.dump(2) << '\n';
  } else {
    out << meta_eval::render_accuracy_table(rows);
  }
  return 0;
}

struct StatsArgs {
  std::string dataset;
  Format format = Format::Table;
};

int run_stats(const StatsArgs& a, std::ostream& out) {
  const auto stats = corpus::dataset_stats(corpus::load_dataset(a.dataset));
  io::Json doc = io::Json::object();
  doc["n_instructions"] = stats.n_instructions;
  doc["avg_words_instruction"] = stats.avg_words_instruction;
  doc["avg_words_quote"] = stats.avg_words_quote;
  doc["category_histogram"] = stats.category_histogram;
  if (a.format == Format::Json) {
    out << doc.dump(2) << '\n';
    return 0;
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "instructions: %zu\nwords/instruction: %.2f\nwords/quote: %.2f\n",
                stats.n_instructions, stats.avg_words_instruction, stats.avg_words_quote);
  out << buf;
  for (const auto& [category, count] : stats.category_histogram) {
    out << "  " << (category.empty() ? "(none)" : category) << ": " << count << '\n';
  }
  return 0;
}

struct SynthArgs {
  std::string seeds;
  std::string out;
  std::string endpoint;
  std::string model_name;
  std::string api_key_env = "TYPESCORE_API_KEY";
  int iterations = 3;
  int max_retries = 3;
  bool echo = false;
};

int run_synth(const SynthArgs& a, std::ostream& out) {
  std::unique_ptr<chat::ChatBackend> backend;
  if (a.echo) {
    backend = std::make_unique<chat::EchoChatBackend>();
  } else {
    chat::HttpChatOptions o;
    o.endpoint = a.endpoint;
    o.model = a.model_name;
    o.api_key_env = a.api_key_env;
    o.max_retries = a.max_retries;
    backend = std::make_unique<chat::HttpChatBackend>(o);
  }
  std::vector<corpus::Instruction> items;
  io::for_each_record(a.seeds, [&](const io::Json& record, std::size_t line) {
    corpus::SynthOptions options;
    options.id = record.value("id", std::string());
    options.category = record.value("category", std::string());
    options.style = record.value("style", std::string());
    options.iterations = a.iterations;
    items.push_back(corpus::synth_instruction(io::require_string(record, "seed_text", line),
                                              io::require_string(record, "quote", line), *backend, options));
  });
  corpus::save_dataset(a.out, items);
  out << "wrote " << items.size() << " instructions to " << a.out << '\n';
  return 0;
}

struct CompareExtractorsArgs {
  std::string oracle;
  std::string candidate;
  bool no_case_fold = false;
  Format format = Format::Table;
};

int run_compare_extractors(const CompareExtractorsArgs& a, std::ostream& out) {
  const bool fold = !a.no_case_fold;
  const auto result = extraction::compare_extractors(extraction::load_extractions(a.oracle, "oracle", fold),
                                                     extraction::load_extractions(a.candidate, "candidate", fold));
  if (a.format == Format::Json) {
    out << io::Json{{"ned_distance_mean", result.mean}, {"sem", result.sem}, {"n", result.n}}.dump(2) << '\n';
  } else {
    char buf[128];
    std::snprintf(buf, sizeof buf, "NED(oracle, candidate) = %.3f ± %.3f  (n = %zu, lower is better)\n",
                  result.mean, result.sem, result.n);
    out << buf;
  }
  return 0;
}

struct ServeArgs {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::string images_dir;
  std::string store;
  std::string tasks;
  std::string gold;
  std::string dataset;
  std::string ui_dir;
  std::uint64_t seed = 0;
};

int run_serve(const ServeArgs& a, std::ostream& out) {
  annotation::StoreConfig config;
  config.pairs = meta_eval::load_annotations(a.tasks);
  if (!a.gold.empty()) config.gold = annotation::load_gold_set(a.gold);
  if (!a.dataset.empty()) {
    for (const auto& item : corpus::load_dataset(a.dataset)) config.instructions[item.id] = item.instruction;
  }
  config.log_path = a.store;
  config.seed = a.seed;
  annotation::AnnotationStore store(std::move(config));
  annotation::AnnotationServer server(store, {a.host, a.port, a.images_dir, a.ui_dir});
  const int port = server.bind();
  out << "annotation service listening on " << a.host << ":" << port << std::endl;
  server.serve();
  return 0;
}

struct CompareRunsArgs {
  std::string a;
  std::string b;
  std::string out;
  Format format = Format::Table;
};

int run_compare_runs(const CompareRunsArgs& args, std::ostream& out) {
  const auto a = pipeline::load_report(args.a);
  const auto b = pipeline::load_report(args.b);
  const auto deltas = pipeline::compare_runs(a, b);
  const io::Json doc = pipeline::comparison_to_json(a, b, deltas);
  if (!args.out.empty()) io::write_file_atomic(args.out, doc.dump(2) + "\n");
  if (args.format == Format::Json) {
    out << doc.dump(2) << '\n';
  } else {
    out << pipeline::render_comparison(a, b, deltas);
  }
  return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"typescore: score how faithfully generated images render instructed text", "typescore"};
  app.require_subcommand(1);
  app.fallthrough(false);
  std::function<int()> action;

  MetricsArgs metrics_args;
  auto* metrics_cmd = app.add_subcommand("metrics", "Score one reference/hypothesis pair with every metric");
  metrics_cmd->add_option("--ref", metrics_args.ref, "Instructed (reference) text")->required();
  metrics_cmd->add_option("--hyp", metrics_args.hyp, "Extracted (hypothesis) text")->required();
  metrics_cmd->add_flag("--no-case-fold", metrics_args.no_case_fold, "Compare case-sensitively");
  metrics_args.align.add_to(metrics_cmd);
  add_format(metrics_cmd, metrics_args.format);
  metrics_cmd->callback([&] { action = [&] { return run_metrics(metrics_args, out); }; });

  ScoreArgs score_args;
  auto* score_cmd = app.add_subcommand("score", "Extract text from a model's images and score it");
  score_cmd->add_option("--dataset", score_args.dataset, "Instruction dataset (line-delimited)")->required();
  score_cmd->add_option("--images", score_args.images, "Image manifest (line-delimited)")->required();
  score_cmd->add_option("--backend", score_args.backend, "Extraction backend")
      ->check(CLI::IsMember({"vlm", "ocr", "ocr-refine", "oracle"}))
      ->capture_default_str();
  score_cmd->add_option("--model-id", score_args.model_id, "Model whose images are scored")->required();
  score_cmd->add_option("--out", score_args.out, "Report file (JSON)");
  score_cmd->add_option("--oracle-file", score_args.oracle_file, "Human extractions for --backend oracle");
  score_cmd->add_option("--endpoint", score_args.endpoint, "Chat-completion URL");
  score_cmd->add_option("--model-name", score_args.model_name, "Model name sent to the endpoint");
  score_cmd->add_option("--api-key-env", score_args.api_key_env, "Environment variable holding the API key")
      ->capture_default_str();
  score_cmd->add_option("--ocr-command", score_args.ocr_command, "OCR command with an {image} placeholder");
  score_cmd->add_option("--max-retries", score_args.max_retries)->check(CLI::NonNegativeNumber)->capture_default_str();
  score_cmd->add_option("--max-concurrency", score_args.max_concurrency)->check(CLI::PositiveNumber)->capture_default_str();
  score_cmd->add_option("--timeout-ms", score_args.timeout_ms)->check(CLI::PositiveNumber)->capture_default_str();
  score_cmd->add_option("--rpm", score_args.rpm, "Request rate limit per minute (0 = none)")->capture_default_str();
  score_cmd->add_flag("--no-case-fold", score_args.no_case_fold);
  score_args.align.add_to(score_cmd);
  add_format(score_cmd, score_args.format);
  score_cmd->callback([&] { action = [&] { return run_score(score_args, out); }; });

  CorruptArgs corrupt_args;
  auto* corrupt_cmd = app.add_subcommand("corrupt", "Generate (quote, corrupted) pairs from corruption specs");
  corrupt_cmd->add_option("--dataset", corrupt_args.dataset)->required();
  corrupt_cmd->add_option("--spec", corrupt_args.spec, "Corruption specs (line-delimited)")->required();
  corrupt_cmd->add_option("--out", corrupt_args.out, "Pair file (line-delimited)")->required();
  corrupt_cmd->callback([&] { action = [&] { return run_corrupt(corrupt_args, out); }; });

  MetaEvalArgs meta_args;
  auto* meta_cmd = app.add_subcommand("meta-eval", "Alignment accuracy of metrics against human preferences");
  meta_cmd->add_option("--annotations", meta_args.annotations, "Annotation export")->required();
  meta_cmd->add_option("--scores", meta_args.scores, "Score reports or external score files")->required();
  meta_cmd->add_option("--out", meta_args.out, "Result file (JSON)");
  meta_cmd->add_option("--resamples", meta_args.resamples, "Bootstrap resamples")->check(CLI::PositiveNumber)->capture_default_str();
  meta_cmd->add_option("--seed", meta_args.seed, "Bootstrap seed")->capture_default_str();
  add_format(meta_cmd, meta_args.format);
  meta_cmd->callback([&] { action = [&] { return run_meta_eval(meta_args, out); }; });

  auto* dataset_cmd = app.add_subcommand("dataset", "Inspect or synthesize instruction datasets");
  dataset_cmd->require_subcommand(1);
  StatsArgs stats_args;
  auto* stats_cmd = dataset_cmd->add_subcommand("stats", "Corpus statistics");
  stats_cmd->add_option("--dataset", stats_args.dataset)->required();
  add_format(stats_cmd, stats_args.format);
  stats_cmd->callback([&] { action = [&] { return run_stats(stats_args, out); }; });
  SynthArgs synth_args;
  auto* synth_cmd = dataset_cmd->add_subcommand("synth", "Recaption seed descriptions into instructions");
  synth_cmd->add_option("--seeds", synth_args.seeds, "Line-delimited {id, seed_text, quote, category, style}")->required();
  synth_cmd->add_option("--out", synth_args.out)->required();
  synth_cmd->add_option("--endpoint", synth_args.endpoint);
  synth_cmd->add_option("--model-name", synth_args.model_name);
  synth_cmd->add_option("--api-key-env", synth_args.api_key_env)->capture_default_str();
  synth_cmd->add_option("--iterations", synth_args.iterations)->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--max-retries", synth_args.max_retries)->check(CLI::NonNegativeNumber)->capture_default_str();
  synth_cmd->add_flag("--echo", synth_args.echo, "Use the offline echo backend");
  synth_cmd->callback([&] { action = [&] { return run_synth(synth_args, out); }; });

  CompareExtractorsArgs cx_args;
  auto* cx_cmd = app.add_subcommand("compare-extractors", "NED between oracle and candidate extractions");
  cx_cmd->add_option("--oracle", cx_args.oracle)->required();
  cx_cmd->add_option("--candidate", cx_args.candidate)->required();
  cx_cmd->add_flag("--no-case-fold", cx_args.no_case_fold);
  add_format(cx_cmd, cx_args.format);
  cx_cmd->callback([&] { action = [&] { return run_compare_extractors(cx_args, out); }; });

  auto* annotate_cmd = app.add_subcommand("annotate", "Human annotation service");
  annotate_cmd->require_subcommand(1);
  ServeArgs serve_args;
  auto* serve_cmd = annotate_cmd->add_subcommand("serve", "Run the annotation HTTP service");
  serve_cmd->add_option("--host", serve_args.host)->capture_default_str();
  serve_cmd->add_option("--port", serve_args.port)->check(CLI::Range(0, 65535))->capture_default_str();
  serve_cmd->add_option("--images-dir", serve_args.images_dir)->required()->check(CLI::ExistingDirectory);
  serve_cmd->add_option("--store", serve_args.store, "Append-only event log")->required();
  serve_cmd->add_option("--tasks", serve_args.tasks, "Pair definitions (line-delimited)")->required();
  serve_cmd->add_option("--gold", serve_args.gold, "Qualification gold set (line-delimited)");
  serve_cmd->add_option("--dataset", serve_args.dataset, "Instruction dataset for task text");
  serve_cmd->add_option("--ui-dir", serve_args.ui_dir, "Static UI bundle");
  serve_cmd->add_option("--seed", serve_args.seed, "Presentation-order seed")->capture_default_str();
  serve_cmd->callback([&] { action = [&] { return run_serve(serve_args, out); }; });

  CompareRunsArgs runs_args;
  auto* runs_cmd = app.add_subcommand("compare-runs", "Per-metric deltas between two score reports");
  runs_cmd->add_option("a", runs_args.a, "First report")->required();
  runs_cmd->add_option("b", runs_args.b, "Second report")->required();
  runs_cmd->add_option("--out", runs_args.out);
  add_format(runs_cmd, runs_args.format);
  runs_cmd->callback([&] { action = [&] { return run_compare_runs(runs_args, out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    return action ? action() : 2;
  } catch (const PreconditionError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "unexpected error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace typescore::cli
