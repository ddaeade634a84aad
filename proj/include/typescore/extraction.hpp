#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "typescore/chat.hpp"
#include "typescore/stats.hpp"
#include "typescore/text.hpp"

namespace typescore::extraction {

enum class BackendKind { Vlm, Ocr, OcrRefine, OracleFile };

std::string_view backend_kind_name(BackendKind kind);
BackendKind parse_backend_kind(std::string_view name);  // "vlm", "ocr", "ocr-refine", "oracle"

struct BackendConfig {
  BackendKind kind = BackendKind::Vlm;
  std::string endpoint;
  std::string model_name;
  std::string api_key_env = "TYPESCORE_API_KEY";
  int max_retries = 3;
  int max_concurrency = 4;
  std::chrono::milliseconds timeout{60000};
  std::chrono::milliseconds backoff_base{1000};
  double requests_per_minute = 0;
  std::string ocr_command;  // "{image}" is replaced by the quoted image path
  std::filesystem::path oracle_path;
  bool case_fold = true;

  // Throws PreconditionError for missing kind-specific settings.
  void validate() const;
  std::string backend_id() const;
  chat::HttpChatOptions chat_options() const;
};

struct ImageInput {
  std::string image_id;
  std::filesystem::path path;
  std::string bytes;
  std::string media_type;
};

std::string media_type_for(const std::filesystem::path& path);
ImageInput load_image(std::string image_id, const std::filesystem::path& path);

struct ExtractedText {
  std::string image_id;
  std::string backend_id;
  std::string raw_response;
  NormalizedText text;
  int retries_used = 0;
  bool failed = false;
  std::string error;
};

// Text between the first and last double quote; the trimmed input when it
// holds fewer than two.
std::string parse_quoted_response(std::string_view raw);

std::string render_ocr_refine_prompt(std::string_view ocr_caption);

// OCR engines sit behind a plain function returning text lines in reading
// order. Throws AdapterError on engine failure.
using OcrAdapter = std::function<std::vector<std::string>(const ImageInput&)>;

// Runs `command_template` through the shell with "{image}" substituted and
// returns the non-blank stdout lines. Nonzero exit raises AdapterError.
OcrAdapter command_ocr_adapter(std::string command_template);

ExtractedText extract_vlm(const ImageInput& image, chat::ChatBackend& chat,
                          std::string backend_id, bool case_fold = true);
ExtractedText extract_ocr(const ImageInput& image, const OcrAdapter& ocr, std::string backend_id,
                          bool case_fold = true);
ExtractedText extract_ocr_refine(const ImageInput& image, const OcrAdapter& ocr,
                                 chat::ChatBackend& chat, std::string backend_id,
                                 bool case_fold = true);

// Human extractions, line-delimited {image_id, text}.
class OracleFile {
 public:
  static OracleFile load(const std::filesystem::path& path);
  static OracleFile parse(std::string_view text);

  bool contains(const std::string& image_id) const { return texts_.contains(image_id); }
  const std::string& text_for(const std::string& image_id) const;  // throws BackendError
  std::size_t size() const noexcept { return texts_.size(); }

 private:
  std::map<std::string, std::string> texts_;
};

// One configured backend. Thread-safe.
class Extractor {
 public:
  virtual ~Extractor() = default;
  virtual ExtractedText extract(const ImageInput& image) = 0;
  virtual const std::string& backend_id() const = 0;
  virtual int max_concurrency() const = 0;
  // Oracle lookups need no image bytes.
  virtual bool needs_image_bytes() const { return true; }
};

// `ocr` overrides the command adapter built from cfg.ocr_command; `chat`
// overrides the HTTP client built from the endpoint settings.
std::unique_ptr<Extractor> make_extractor(const BackendConfig& cfg, OcrAdapter ocr = {},
                                          std::shared_ptr<chat::ChatBackend> chat = {});

// Line-delimited {image_id, text} loaded as extractions of `backend_id`.
std::vector<ExtractedText> load_extractions(const std::filesystem::path& path,
                                            const std::string& backend_id,
                                            bool case_fold = true);

// Mean NED distance between oracle and candidate texts matched by image_id
// (lower is better). Throws IdMismatch unless both cover the same images.
stats::MeanSem compare_extractors(const std::vector<ExtractedText>& oracle,
                                  const std::vector<ExtractedText>& candidate);

}  // namespace typescore::extraction
