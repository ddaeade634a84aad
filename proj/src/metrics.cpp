#include "typescore/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

namespace typescore::metrics {
namespace {

constexpr std::array<std::string_view, 6> kIds = {"ned",  "bleu1",          "char_bleu",
                                                  "nlcs", "smith_waterman", "ensemble"};
constexpr std::array<std::string_view, 6> kLabels = {"NED",  "BLEU",           "BLEU-char",
                                                     "NLCS", "Smith Waterman", "TypeScore"};

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Clipped unigram precision times the BLEU brevity penalty.
template <class Token>
double unigram_bleu(const std::vector<Token>& candidate, const std::vector<Token>& reference) {
  if (candidate.empty()) return reference.empty() ? 1.0 : 0.0;

  std::unordered_map<Token, std::size_t> ref_counts;
  for (const auto& t : reference) ++ref_counts[t];

  std::unordered_map<Token, std::size_t> cand_counts;
  for (const auto& t : candidate) ++cand_counts[t];

  std::size_t clipped = 0;
  for (const auto& [token, count] : cand_counts) {
    auto it = ref_counts.find(token);
    if (it != ref_counts.end()) clipped += std::min(count, it->second);
  }

  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double precision = static_cast<double>(clipped) / c;
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return clamp01(precision * bp);
}

std::vector<std::string_view> words(const NormalizedText& t) {
  std::vector<std::string_view> out;
  std::string_view s = t.normalized;
  while (!s.empty()) {
    const auto cut = s.find(' ');
    out.push_back(s.substr(0, cut));
    if (cut == std::string_view::npos) break;
    s.remove_prefix(cut + 1);
  }
  return out;
}

}  // namespace

std::string_view metric_id(MetricKind kind) { return kIds[static_cast<std::size_t>(kind)]; }

std::string_view metric_label(MetricKind kind) {
  return kLabels[static_cast<std::size_t>(kind)];
}

std::optional<MetricKind> parse_metric_kind(std::string_view id) {
  for (MetricKind kind : kAllMetrics) {
    if (metric_id(kind) == id) return kind;
  }
  return std::nullopt;
}

double ned_distance(const NormalizedText& a, const NormalizedText& b) {
  const std::size_t total = a.length() + b.length();
  if (total == 0) return 0.0;
  const double lev = kernels::levenshtein(a.codepoints, b.codepoints);
  return std::min(1.0, 2.0 * lev / static_cast<double>(total));
}

MetricScore ned(const NormalizedText& a, const NormalizedText& b) {
  return {MetricKind::Ned, 1.0 - ned_distance(a, b)};
}

MetricScore bleu1(const NormalizedText& candidate, const NormalizedText& reference) {
  return {MetricKind::Bleu1, unigram_bleu(words(candidate), words(reference))};
}

MetricScore char_bleu(const NormalizedText& candidate, const NormalizedText& reference) {
  const std::vector<char32_t> c(candidate.codepoints.begin(), candidate.codepoints.end());
  const std::vector<char32_t> r(reference.codepoints.begin(), reference.codepoints.end());
  return {MetricKind::CharBleu, unigram_bleu(c, r)};
}

MetricScore nlcs(const NormalizedText& a, const NormalizedText& b) {
  const std::size_t longest = std::max(a.length(), b.length());
  if (longest == 0) return {MetricKind::Nlcs, 1.0};
  const double lcs = kernels::lcs_length(a.codepoints, b.codepoints);
  return {MetricKind::Nlcs, clamp01(lcs / static_cast<double>(longest))};
}

MetricScore smith_waterman(const NormalizedText& a, const NormalizedText& b,
                           const AlignmentParams& params) {
  params.validate();
  if (a.empty() || b.empty()) {
    return {MetricKind::SmithWaterman, a.empty() && b.empty() ? 1.0 : 0.0};
  }
  // The best possible local score is a full-length match of the shorter side.
  const double ceiling =
      static_cast<double>(params.match) * static_cast<double>(std::min(a.length(), b.length()));
  const double raw = kernels::local_alignment(a.codepoints, b.codepoints, params);
  return {MetricKind::SmithWaterman, clamp01(raw / ceiling)};
}

MetricScore ensemble(const NormalizedText& a, const NormalizedText& b,
                     const AlignmentParams& params) {
  const double sum = ned(a, b).value + smith_waterman(a, b, params).value + nlcs(a, b).value;
  return {MetricKind::Ensemble, sum / 3.0};
}

ScoreMap score_all(const NormalizedText& reference, const NormalizedText& candidate,
                   const AlignmentParams& params) {
  ScoreMap out;
  out[MetricKind::Ned] = ned(reference, candidate).value;
  out[MetricKind::Bleu1] = bleu1(candidate, reference).value;
  out[MetricKind::CharBleu] = char_bleu(candidate, reference).value;
  out[MetricKind::Nlcs] = nlcs(reference, candidate).value;
  out[MetricKind::SmithWaterman] = smith_waterman(reference, candidate, params).value;
  out[MetricKind::Ensemble] =
      (out[MetricKind::Ned] + out[MetricKind::SmithWaterman] + out[MetricKind::Nlcs]) / 3.0;
  return out;
}

}  // namespace typescore::metrics
