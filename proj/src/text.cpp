#include "typescore/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <stdexcept>

namespace typescore {
namespace {

const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || n == nullptr) {
    throw std::runtime_error("ICU NFC normalizer unavailable");
  }
  return *n;
}

icu::UnicodeString compose(const icu::UnicodeString& s) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = nfc().normalize(s, status);
  if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");
  return out;
}

}  // namespace

std::u32string utf8_to_u32(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    out.push_back(c < 0 ? U'\uFFFD' : static_cast<char32_t>(c));
  }
  return out;
}

std::string u32_to_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) {
    uint8_t buf[U8_MAX_LENGTH];
    int32_t n = 0;
    UBool error = false;
    U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(c), error);
    if (error) {
      n = 0;
      U8_APPEND_UNSAFE(buf, n, 0xFFFD);
    }
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
  }
  return out;
}

std::size_t count_words(std::string_view utf8) {
  std::size_t words = 0;
  bool in_word = false;
  for (char32_t c : utf8_to_u32(utf8)) {
    if (u_isUWhiteSpace(static_cast<UChar32>(c))) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++words;
    }
  }
  return words;
}

NormalizedText normalize_text(std::string_view raw, bool case_fold) {
  NormalizedText out;
  out.raw = std::string(raw);

  icu::UnicodeString text = compose(icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size()))));
  if (case_fold) {
    // Folding can decompose (e.g. U+0130), so compose again afterwards.
    text.foldCase(U_FOLD_CASE_DEFAULT);
    text = compose(text);
  }

  std::u32string folded;
  folded.reserve(static_cast<std::size_t>(text.length()));
  for (int32_t i = 0; i < text.length();) {
    UChar32 c = text.char32At(i);
    folded.push_back(static_cast<char32_t>(c));
    i += U16_LENGTH(c);
  }

  bool pending_space = false;
  for (char32_t c : folded) {
    if (u_isUWhiteSpace(static_cast<UChar32>(c))) {
      pending_space = !out.codepoints.empty();
      continue;
    }
    if (pending_space) {
      out.codepoints.push_back(U' ');
      pending_space = false;
    }
    out.codepoints.push_back(c);
  }

  out.normalized = u32_to_utf8(out.codepoints);
  out.glyph_count = static_cast<std::size_t>(
      std::count(out.codepoints.begin(), out.codepoints.end(), kGlyphPlaceholder));
  return out;
}

}  // namespace typescore
