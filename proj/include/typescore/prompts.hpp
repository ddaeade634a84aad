#pragma once

#include <string_view>

// Prompt templates, embedded byte-for-byte from assets/prompts/.
namespace typescore::prompts {

// Sent with every image to a vision-language extraction backend.
extern const std::string_view kVlmExtract;

// Text-only refinement of an OCR transcript; contains kOcrCaptionSlot once.
extern const std::string_view kOcrRefine;

// System prompt for one recaptioning round (not a published prompt; ours).
extern const std::string_view kRecaption;

inline constexpr std::string_view kOcrCaptionSlot = "{ocr_extracted_caption}";
inline constexpr std::string_view kRecaptionVersion = "recaption_v1";

}  // namespace typescore::prompts
