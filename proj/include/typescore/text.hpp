#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace typescore {

inline constexpr char32_t kGlyphPlaceholder = U'@';

// A string prepared for comparison. `normalized` is NFC, case-folded when
// requested, with whitespace runs collapsed to one ASCII space and trimmed.
// `codepoints` is the same text decoded, which is what the metrics consume.
struct NormalizedText {
  std::string raw;
  std::string normalized;
  std::u32string codepoints;
  std::size_t glyph_count = 0;

  bool empty() const noexcept { return codepoints.empty(); }
  std::size_t length() const noexcept { return codepoints.size(); }
};

NormalizedText normalize_text(std::string_view raw, bool case_fold = true);

// Invalid sequences decode to U+FFFD.
std::u32string utf8_to_u32(std::string_view utf8);
std::string u32_to_utf8(std::u32string_view text);

// Splits on runs of Unicode whitespace.
std::size_t count_words(std::string_view utf8);

}  // namespace typescore
