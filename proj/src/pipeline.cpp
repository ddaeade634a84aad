#include "typescore/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <set>
#include <thread>
#include <unordered_map>

#include "typescore/errors.hpp"
#include "typescore/stats.hpp"

namespace typescore::pipeline {
namespace {

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

ScoreMap zero_scores() {
  ScoreMap out;
  for (auto kind : metrics::kAllMetrics) out[kind] = 0.0;
  return out;
}

io::Json aggregate_json(const Aggregate& a) {
  io::Json j = io::Json::object();
  j["mean"] = a.mean;
  j["sem"] = a.sem;
  j["n"] = a.n;
  return j;
}

Aggregate aggregate_from_json(const io::Json& j) {
  Aggregate a;
  a.mean = j.at("mean").get<double>();
  a.sem = j.at("sem").get<double>();
  a.n = j.at("n").get<std::size_t>();
  return a;
}

}  // namespace

std::vector<GeneratedImage> load_manifest(const std::filesystem::path& path) {
  const auto base = path.parent_path();
  std::vector<GeneratedImage> images;
  std::set<std::string> seen;
  io::for_each_record(path, [&](const io::Json& record, std::size_t line) {
    GeneratedImage g;
    g.image_id = io::require_string(record, "image_id", line);
    g.instruction_id = io::require_string(record, "instruction_id", line);
    g.model_id = io::require_string(record, "model_id", line);
    std::filesystem::path p = io::require_string(record, "path", line);
    g.path = p.is_absolute() ? p : base / p;
    if (!seen.insert(g.image_id).second) {
      throw ValidationError("duplicate image_id '" + g.image_id + "' in manifest (line " +
                            std::to_string(line) + ")");
    }
    images.push_back(std::move(g));
  });
  return images;
}

ScoreMap score_pair(const corpus::Instruction& instruction,
                    const extraction::ExtractedText& extracted,
                    const metrics::AlignmentParams& params, bool case_fold) {
  const NormalizedText reference = normalize_text(instruction.quote, case_fold);
  return metrics::score_all(reference, extracted.text, params);
}

MetricReport aggregate(std::string model_id, std::string backend_id, std::vector<ReportRow> rows) {
  MetricReport report;
  report.model_id = std::move(model_id);
  report.backend_id = std::move(backend_id);
  report.rows = std::move(rows);

  // Ordered containers keep the floating-point summation order independent
  // of row order.
  std::map<std::string, std::vector<const ReportRow*>> by_instruction;
  for (const auto& row : report.rows) by_instruction[row.instruction_id].push_back(&row);
  for (auto& [id, group] : by_instruction) {
    std::sort(group.begin(), group.end(),
              [](const ReportRow* a, const ReportRow* b) { return a->image_id < b->image_id; });
  }
  report.n_instructions = by_instruction.size();
  if (report.rows.empty()) return report;

  for (auto kind : metrics::kAllMetrics) {
    std::vector<double> per_instruction;
    per_instruction.reserve(by_instruction.size());
    for (const auto& [id, group] : by_instruction) {
      double sum = 0;
      for (const ReportRow* row : group) {
        const auto it = row->scores.find(kind);
        sum += it == row->scores.end() ? 0.0 : it->second;
      }
      per_instruction.push_back(sum / static_cast<double>(group.size()));
    }
    const auto ms = stats::mean_sem(per_instruction);
    report.aggregates[kind] = {ms.mean, ms.sem, report.rows.size()};
  }
  return report;
}

MetricReport score_run(const std::vector<corpus::Instruction>& corpus,
                       const std::vector<GeneratedImage>& images, extraction::Extractor& extractor,
                       const RunOptions& options) {
  if (images.empty()) throw EmptyRun("no images to score");
  options.params.validate();

  std::unordered_map<std::string, const corpus::Instruction*> by_id;
  for (const auto& item : corpus) by_id.emplace(item.id, &item);
  for (const auto& image : images) {
    if (!by_id.contains(image.instruction_id)) {
      throw UnknownInstruction("image '" + image.image_id + "' references unknown instruction '" +
                               image.instruction_id + "'");
    }
  }

  std::vector<ReportRow> rows(images.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < images.size(); i = next++) {
      const GeneratedImage& image = images[i];
      ReportRow& row = rows[i];
      row.instruction_id = image.instruction_id;
      row.image_id = image.image_id;
      try {
        extraction::ImageInput input;
        if (extractor.needs_image_bytes()) {
          input = extraction::load_image(image.image_id, image.path);
        } else {
          input.image_id = image.image_id;
          input.path = image.path;
        }
        row.extracted = extractor.extract(input);
        row.scores = score_pair(*by_id.at(image.instruction_id), row.extracted, options.params,
                                options.case_fold);
      } catch (const std::exception& e) {
        row.extracted = {};
        row.extracted.image_id = image.image_id;
        row.extracted.backend_id = extractor.backend_id();
        row.extracted.failed = true;
        row.extracted.error = e.what();
        row.scores = zero_scores();
      }
    }
  };

  const auto workers = std::min<std::size_t>(
      images.size(), static_cast<std::size_t>(std::max(1, extractor.max_concurrency())));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  return aggregate(images.front().model_id, extractor.backend_id(), std::move(rows));
}

io::Json report_to_json(const MetricReport& report) {
  io::Json doc = io::Json::object();
  doc["model_id"] = report.model_id;
  doc["backend_id"] = report.backend_id;
  doc["aggregation"] = "two-level mean: images averaged within instruction, then across instructions";
  doc["n_rows"] = report.rows.size();
  doc["n_instructions"] = report.n_instructions;
  io::Json aggs = io::Json::object();
  for (const auto& [kind, agg] : report.aggregates) {
    aggs[std::string(metrics::metric_id(kind))] = aggregate_json(agg);
  }
  doc["aggregates"] = std::move(aggs);

  io::Json rows = io::Json::array();
  for (const auto& row : report.rows) {
    io::Json r = io::Json::object();
    r["instruction_id"] = row.instruction_id;
    r["image_id"] = row.image_id;
    io::Json e = io::Json::object();
    e["backend_id"] = row.extracted.backend_id;
    e["raw_response"] = row.extracted.raw_response;
    e["text"] = row.extracted.text.normalized;
    e["glyph_count"] = row.extracted.text.glyph_count;
    e["retries_used"] = row.extracted.retries_used;
    e["failed"] = row.extracted.failed;
    if (row.extracted.failed) e["error"] = row.extracted.error;
    r["extracted"] = std::move(e);
    io::Json scores = io::Json::object();
    for (const auto& [kind, value] : row.scores) scores[std::string(metrics::metric_id(kind))] = value;
    r["scores"] = std::move(scores);
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  return doc;
}

MetricReport report_from_json(const io::Json& doc) {
  MetricReport report;
  try {
    report.model_id = doc.at("model_id").get<std::string>();
    report.backend_id = doc.value("backend_id", std::string());
    report.n_instructions = doc.value("n_instructions", std::size_t{0});
    for (const auto& [id, agg] : doc.at("aggregates").items()) {
      if (auto kind = metrics::parse_metric_kind(id)) report.aggregates[*kind] = aggregate_from_json(agg);
    }
    if (doc.contains("rows")) {
      for (const auto& r : doc.at("rows")) {
        ReportRow row;
        row.instruction_id = r.at("instruction_id").get<std::string>();
        row.image_id = r.at("image_id").get<std::string>();
        if (r.contains("extracted")) {
          const auto& e = r.at("extracted");
          row.extracted.image_id = row.image_id;
          row.extracted.backend_id = e.value("backend_id", std::string());
          row.extracted.raw_response = e.value("raw_response", std::string());
          row.extracted.text.raw = row.extracted.raw_response;
          row.extracted.text.normalized = e.value("text", std::string());
          row.extracted.text.codepoints = utf8_to_u32(row.extracted.text.normalized);
          row.extracted.text.glyph_count = e.value("glyph_count", std::size_t{0});
          row.extracted.retries_used = e.value("retries_used", 0);
          row.extracted.failed = e.value("failed", false);
          row.extracted.error = e.value("error", std::string());
        }
        for (const auto& [id, value] : r.at("scores").items()) {
          if (auto kind = metrics::parse_metric_kind(id)) row.scores[*kind] = value.get<double>();
        }
        report.rows.push_back(std::move(row));
      }
    }
  } catch (const io::Json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
  return report;
}

MetricReport load_report(const std::filesystem::path& path) {
  io::Json doc;
  try {
    doc = io::Json::parse(io::read_file(path));
  } catch (const io::Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return report_from_json(doc);
}

std::string render_table(const std::vector<MetricReport>& reports) {
  std::size_t name_width = 12;
  for (const auto& r : reports) name_width = std::max(name_width, r.model_id.size() + 2);

  std::string out = pad("Model", name_width);
  for (auto kind : metrics::kAllMetrics) out += " | " + pad(std::string(metrics::metric_label(kind)), 15);
  out += '\n';
  out += std::string(name_width + metrics::kAllMetrics.size() * 18, '-') + '\n';
  for (const auto& r : reports) {
    std::string line = pad(r.model_id, name_width);
    for (auto kind : metrics::kAllMetrics) {
      const auto it = r.aggregates.find(kind);
      const std::string cell =
          it == r.aggregates.end() ? "-" : fixed(it->second.mean) + " ± " + fixed(it->second.sem);
      // "±" is two bytes but one column.
      line += " | " + pad(cell, 15 + (it == r.aggregates.end() ? 0 : 1));
    }
    out += line + '\n';
  }
  return out;
}

std::vector<MetricDelta> compare_runs(const MetricReport& a, const MetricReport& b) {
  std::vector<MetricDelta> out;
  for (auto kind : metrics::kAllMetrics) {
    const auto ia = a.aggregates.find(kind);
    const auto ib = b.aggregates.find(kind);
    if (ia == a.aggregates.end() || ib == b.aggregates.end()) {
      throw MissingMetric("metric '" + std::string(metrics::metric_id(kind)) +
                          "' is missing from one of the reports");
    }
    const double delta = ia->second.mean - ib->second.mean;
    const bool separated = std::abs(delta) > ia->second.sem + ib->second.sem;
    out.push_back({kind, delta, ia->second, ib->second, separated});
  }
  return out;
}

std::string render_comparison(const MetricReport& a, const MetricReport& b,
                              const std::vector<MetricDelta>& deltas) {
  std::string out = pad("Metric", 16) + " | " + pad(a.model_id, 17) + " | " + pad(b.model_id, 17) +
                    " | delta   | separated\n";
  for (const auto& d : deltas) {
    std::string sign = d.delta_mean >= 0 ? "+" : "";
    out += pad(std::string(metrics::metric_label(d.kind)), 16) + " | " +
           pad(fixed(d.a.mean) + " ± " + fixed(d.a.sem), 18) + " | " +
           pad(fixed(d.b.mean) + " ± " + fixed(d.b.sem), 18) + " | " + pad(sign + fixed(d.delta_mean), 7) +
           " | " + (d.separated ? "yes" : "no") + '\n';
  }
  return out;
}

io::Json comparison_to_json(const MetricReport& a, const MetricReport& b,
                            const std::vector<MetricDelta>& deltas) {
  io::Json doc = io::Json::object();
  doc["a"] = a.model_id;
  doc["b"] = b.model_id;
  io::Json metrics_json = io::Json::object();
  for (const auto& d : deltas) {
    io::Json m = io::Json::object();
    m["delta_mean"] = d.delta_mean;
    m["a"] = aggregate_json(d.a);
    m["b"] = aggregate_json(d.b);
    m["separated"] = d.separated;
    metrics_json[std::string(metrics::metric_id(d.kind))] = std::move(m);
  }
  doc["metrics"] = std::move(metrics_json);
  return doc;
}

}  // namespace typescore::pipeline
