#include "typescore/extraction.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <set>

#include "typescore/errors.hpp"
#include "typescore/jsonl.hpp"
#include "typescore/metrics.hpp"
#include "typescore/prompts.hpp"

namespace typescore::extraction {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += '\'';
  return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& line : lines) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

class VlmExtractor final : public Extractor {
 public:
  VlmExtractor(std::shared_ptr<chat::ChatBackend> chat, std::string id, int concurrency, bool fold)
      : chat_(std::move(chat)), id_(std::move(id)), concurrency_(concurrency), fold_(fold) {}
  ExtractedText extract(const ImageInput& image) override {
    return extract_vlm(image, *chat_, id_, fold_);
  }
  const std::string& backend_id() const override { return id_; }
  int max_concurrency() const override { return concurrency_; }

 private:
  std::shared_ptr<chat::ChatBackend> chat_;
  std::string id_;
  int concurrency_;
  bool fold_;
};

class OcrExtractor final : public Extractor {
 public:
  OcrExtractor(OcrAdapter ocr, std::string id, int concurrency, bool fold)
      : ocr_(std::move(ocr)), id_(std::move(id)), concurrency_(concurrency), fold_(fold) {}
  ExtractedText extract(const ImageInput& image) override {
    return extract_ocr(image, ocr_, id_, fold_);
  }
  const std::string& backend_id() const override { return id_; }
  int max_concurrency() const override { return concurrency_; }

 private:
  OcrAdapter ocr_;
  std::string id_;
  int concurrency_;
  bool fold_;
};

class OcrRefineExtractor final : public Extractor {
 public:
  OcrRefineExtractor(OcrAdapter ocr, std::shared_ptr<chat::ChatBackend> chat, std::string id,
                     int concurrency, bool fold)
      : ocr_(std::move(ocr)),
        chat_(std::move(chat)),
        id_(std::move(id)),
        concurrency_(concurrency),
        fold_(fold) {}
  ExtractedText extract(const ImageInput& image) override {
    return extract_ocr_refine(image, ocr_, *chat_, id_, fold_);
  }
  const std::string& backend_id() const override { return id_; }
  int max_concurrency() const override { return concurrency_; }

 private:
  OcrAdapter ocr_;
  std::shared_ptr<chat::ChatBackend> chat_;
  std::string id_;
  int concurrency_;
  bool fold_;
};

class OracleExtractor final : public Extractor {
 public:
  OracleExtractor(OracleFile oracle, std::string id, bool fold)
      : oracle_(std::move(oracle)), id_(std::move(id)), fold_(fold) {}
  ExtractedText extract(const ImageInput& image) override {
    ExtractedText out;
    out.image_id = image.image_id;
    out.backend_id = id_;
    out.raw_response = oracle_.text_for(image.image_id);
    out.text = normalize_text(out.raw_response, fold_);
    return out;
  }
  const std::string& backend_id() const override { return id_; }
  int max_concurrency() const override { return 1; }
  bool needs_image_bytes() const override { return false; }

 private:
  OracleFile oracle_;
  std::string id_;
  bool fold_;
};

}  // namespace

std::string_view backend_kind_name(BackendKind kind) {
  switch (kind) {
    case BackendKind::Vlm:
      return "vlm";
    case BackendKind::Ocr:
      return "ocr";
    case BackendKind::OcrRefine:
      return "ocr-refine";
    case BackendKind::OracleFile:
      return "oracle";
  }
  return "unknown";
}

BackendKind parse_backend_kind(std::string_view name) {
  for (auto kind : {BackendKind::Vlm, BackendKind::Ocr, BackendKind::OcrRefine, BackendKind::OracleFile}) {
    if (backend_kind_name(kind) == name) return kind;
  }
  throw PreconditionError("unknown backend kind '" + std::string(name) + "'");
}

void BackendConfig::validate() const {
  const bool needs_chat = kind == BackendKind::Vlm || kind == BackendKind::OcrRefine;
  if (needs_chat && (endpoint.empty() || model_name.empty())) {
    throw PreconditionError(std::string(backend_kind_name(kind)) +
                            " backend needs an endpoint and a model name");
  }
  if (kind == BackendKind::OracleFile && oracle_path.empty()) {
    throw PreconditionError("oracle backend needs an oracle file path");
  }
  if (max_concurrency < 1) throw PreconditionError("max_concurrency must be >= 1");
  if (max_retries < 0) throw PreconditionError("max_retries must be >= 0");
}

std::string BackendConfig::backend_id() const {
  std::string id(backend_kind_name(kind));
  if (!model_name.empty() && kind != BackendKind::OracleFile && kind != BackendKind::Ocr) {
    id += ":" + model_name;
  }
  return id;
}

chat::HttpChatOptions BackendConfig::chat_options() const {
  chat::HttpChatOptions o;
  o.endpoint = endpoint;
  o.model = model_name;
  o.api_key_env = api_key_env;
  o.max_retries = max_retries;
  o.backoff_base = backoff_base;
  o.timeout = timeout;
  o.max_concurrency = max_concurrency;
  o.requests_per_minute = requests_per_minute;
  return o;
}

std::string media_type_for(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".webp") return "image/webp";
  if (ext == ".gif") return "image/gif";
  return "application/octet-stream";
}

ImageInput load_image(std::string image_id, const std::filesystem::path& path) {
  ImageInput image;
  image.image_id = std::move(image_id);
  image.path = path;
  image.bytes = io::read_file(path);
  image.media_type = media_type_for(path);
  return image;
}

std::string parse_quoted_response(std::string_view raw) {
  const auto first = raw.find('"');
  const auto last = raw.rfind('"');
  if (first == std::string_view::npos || first == last) return trim(raw);
  return std::string(raw.substr(first + 1, last - first - 1));
}

std::string render_ocr_refine_prompt(std::string_view ocr_caption) {
  std::string prompt(prompts::kOcrRefine);
  const auto slot = prompt.find(prompts::kOcrCaptionSlot);
  prompt.replace(slot, prompts::kOcrCaptionSlot.size(), ocr_caption);
  return prompt;
}

OcrAdapter command_ocr_adapter(std::string command_template) {
  if (command_template.find("{image}") == std::string::npos) {
    throw PreconditionError("OCR command must contain an {image} placeholder");
  }
  return [command_template](const ImageInput& image) {
    std::string command = command_template;
    const std::string quoted = shell_quote(image.path.string());
    for (auto at = command.find("{image}"); at != std::string::npos;
         at = command.find("{image}", at + quoted.size())) {
      command.replace(at, 7, quoted);
    }
    FILE* pipe = ::popen(command.c_str(), "r");
    if (pipe == nullptr) throw AdapterError("cannot start OCR command: " + command);
    std::string output;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) output.append(buf, n);
    const int status = ::pclose(pipe);
    if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      throw AdapterError("OCR command failed for image " + image.image_id);
    }
    std::vector<std::string> lines;
    std::string_view rest = output;
    while (!rest.empty()) {
      const auto eol = rest.find('\n');
      const std::string line = trim(rest.substr(0, eol));
      if (!line.empty()) lines.push_back(line);
      if (eol == std::string_view::npos) break;
      rest.remove_prefix(eol + 1);
    }
    return lines;
  };
}

ExtractedText extract_vlm(const ImageInput& image, chat::ChatBackend& chat,
                          std::string backend_id, bool case_fold) {
  chat::ChatRequest request;
  request.messages.push_back(
      {"user",
       {chat::ContentPart::text(std::string(prompts::kVlmExtract)),
        chat::ContentPart::image(chat::data_url(image.bytes, image.media_type))}});
  const chat::ChatReply reply = chat.complete(request);

  ExtractedText out;
  out.image_id = image.image_id;
  out.backend_id = std::move(backend_id);
  out.raw_response = reply.content;
  out.text = normalize_text(parse_quoted_response(reply.content), case_fold);
  out.retries_used = reply.retries_used;
  return out;
}

ExtractedText extract_ocr(const ImageInput& image, const OcrAdapter& ocr, std::string backend_id,
                          bool case_fold) {
  ExtractedText out;
  out.image_id = image.image_id;
  out.backend_id = std::move(backend_id);
  out.raw_response = join_lines(ocr(image));
  out.text = normalize_text(out.raw_response, case_fold);
  return out;
}

ExtractedText extract_ocr_refine(const ImageInput& image, const OcrAdapter& ocr,
                                 chat::ChatBackend& chat, std::string backend_id,
                                 bool case_fold) {
  const std::string caption = join_lines(ocr(image));
  chat::ChatRequest request;
  request.messages.push_back({"user", {chat::ContentPart::text(render_ocr_refine_prompt(caption))}});
  const chat::ChatReply reply = chat.complete(request);

  ExtractedText out;
  out.image_id = image.image_id;
  out.backend_id = std::move(backend_id);
  out.raw_response = reply.content;
  out.text = normalize_text(parse_quoted_response(reply.content), case_fold);
  out.retries_used = reply.retries_used;
  return out;
}

OracleFile OracleFile::parse(std::string_view text) {
  OracleFile oracle;
  io::for_each_record_in(text, [&](const io::Json& record, std::size_t line) {
    auto id = io::require_string(record, "image_id", line);
    auto value = io::require_string(record, "text", line);
    if (!oracle.texts_.emplace(id, std::move(value)).second) {
      throw DuplicateKey("duplicate image_id '" + id + "' in oracle file (line " +
                         std::to_string(line) + ")");
    }
  });
  return oracle;
}

OracleFile OracleFile::load(const std::filesystem::path& path) { return parse(io::read_file(path)); }

const std::string& OracleFile::text_for(const std::string& image_id) const {
  const auto it = texts_.find(image_id);
  if (it == texts_.end()) throw BackendError("no oracle extraction for image '" + image_id + "'");
  return it->second;
}

std::unique_ptr<Extractor> make_extractor(const BackendConfig& cfg, OcrAdapter ocr,
                                          std::shared_ptr<chat::ChatBackend> chat) {
  cfg.validate();
  const bool needs_ocr = cfg.kind == BackendKind::Ocr || cfg.kind == BackendKind::OcrRefine;
  if (needs_ocr && !ocr) {
    if (cfg.ocr_command.empty()) throw PreconditionError("OCR backends need an OCR command");
    ocr = command_ocr_adapter(cfg.ocr_command);
  }
  const bool needs_chat = cfg.kind == BackendKind::Vlm || cfg.kind == BackendKind::OcrRefine;
  if (needs_chat && !chat) chat = std::make_shared<chat::HttpChatBackend>(cfg.chat_options());

  switch (cfg.kind) {
    case BackendKind::Vlm:
      return std::make_unique<VlmExtractor>(chat, cfg.backend_id(), cfg.max_concurrency, cfg.case_fold);
    case BackendKind::Ocr:
      return std::make_unique<OcrExtractor>(ocr, cfg.backend_id(), cfg.max_concurrency, cfg.case_fold);
    case BackendKind::OcrRefine:
      return std::make_unique<OcrRefineExtractor>(ocr, chat, cfg.backend_id(), cfg.max_concurrency,
                                                  cfg.case_fold);
    case BackendKind::OracleFile:
      return std::make_unique<OracleExtractor>(OracleFile::load(cfg.oracle_path), cfg.backend_id(),
                                               cfg.case_fold);
  }
  throw PreconditionError("unsupported backend kind");
}

std::vector<ExtractedText> load_extractions(const std::filesystem::path& path,
                                            const std::string& backend_id, bool case_fold) {
  std::vector<ExtractedText> out;
  io::for_each_record(path, [&](const io::Json& record, std::size_t line) {
    ExtractedText e;
    e.image_id = io::require_string(record, "image_id", line);
    e.backend_id = backend_id;
    e.raw_response = io::require_string(record, "text", line);
    e.text = normalize_text(e.raw_response, case_fold);
    out.push_back(std::move(e));
  });
  return out;
}

stats::MeanSem compare_extractors(const std::vector<ExtractedText>& oracle,
                                  const std::vector<ExtractedText>& candidate) {
  if (oracle.size() != candidate.size()) {
    throw IdMismatch("oracle has " + std::to_string(oracle.size()) + " extractions, candidate has " +
                     std::to_string(candidate.size()));
  }
  std::map<std::string, const ExtractedText*> by_id;
  for (const auto& e : candidate) {
    if (!by_id.emplace(e.image_id, &e).second) {
      throw IdMismatch("candidate repeats image_id '" + e.image_id + "'");
    }
  }
  std::set<std::string> seen;
  std::vector<double> distances;
  distances.reserve(oracle.size());
  for (const auto& o : oracle) {
    if (!seen.insert(o.image_id).second) throw IdMismatch("oracle repeats image_id '" + o.image_id + "'");
    const auto it = by_id.find(o.image_id);
    if (it == by_id.end()) throw IdMismatch("candidate lacks image_id '" + o.image_id + "'");
    distances.push_back(metrics::ned_distance(o.text, it->second->text));
  }
  if (distances.empty()) throw EmptyInput("no extractions to compare");
  return stats::mean_sem(distances);
}

}  // namespace typescore::extraction
