#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "typescore/corpus.hpp"
#include "typescore/extraction.hpp"
#include "typescore/jsonl.hpp"
#include "typescore/metrics.hpp"

namespace typescore::pipeline {

using metrics::MetricKind;
using metrics::ScoreMap;

struct GeneratedImage {
  std::string image_id;
  std::string instruction_id;
  std::string model_id;
  std::filesystem::path path;
};

// Line-delimited {image_id, instruction_id, model_id, path}; relative paths
// resolve against the manifest's directory.
std::vector<GeneratedImage> load_manifest(const std::filesystem::path& path);

struct ReportRow {
  std::string instruction_id;
  std::string image_id;
  extraction::ExtractedText extracted;
  ScoreMap scores;
};

struct Aggregate {
  double mean = 0;
  double sem = 0;
  std::size_t n = 0;  // rows that went into the aggregate
};

struct MetricReport {
  std::string model_id;
  std::string backend_id;
  std::vector<ReportRow> rows;
  std::map<MetricKind, Aggregate> aggregates;
  std::size_t n_instructions = 0;
};

struct RunOptions {
  metrics::AlignmentParams params{};
  bool case_fold = true;
};

// All six metric values of one extraction against the instruction's quote.
ScoreMap score_pair(const corpus::Instruction& instruction,
                    const extraction::ExtractedText& extracted,
                    const metrics::AlignmentParams& params = {}, bool case_fold = true);

// Aggregates are a two-level mean: rows are averaged within an instruction,
// then across instructions, and the SEM is taken over the instruction means.
// With one image per instruction this is the plain row mean.
MetricReport aggregate(std::string model_id, std::string backend_id, std::vector<ReportRow> rows);

// Extracts every image (up to the extractor's concurrency at once) and scores
// it. A failed extraction becomes a row flagged failed with all scores 0.
// Throws EmptyRun and UnknownInstruction.
MetricReport score_run(const std::vector<corpus::Instruction>& corpus,
                       const std::vector<GeneratedImage>& images, extraction::Extractor& extractor,
                       const RunOptions& options = {});

io::Json report_to_json(const MetricReport& report);
MetricReport report_from_json(const io::Json& doc);
MetricReport load_report(const std::filesystem::path& path);

// Human-readable scoreboard, one line per report.
std::string render_table(const std::vector<MetricReport>& reports);

struct MetricDelta {
  MetricKind kind;
  double delta_mean;  // a - b
  Aggregate a;
  Aggregate b;
  bool separated;  // the two mean +/- sem intervals do not overlap
};

// Throws MissingMetric when either report lacks one of the six metrics.
std::vector<MetricDelta> compare_runs(const MetricReport& a, const MetricReport& b);
std::string render_comparison(const MetricReport& a, const MetricReport& b,
                              const std::vector<MetricDelta>& deltas);
io::Json comparison_to_json(const MetricReport& a, const MetricReport& b,
                            const std::vector<MetricDelta>& deltas);

}  // namespace typescore::pipeline
