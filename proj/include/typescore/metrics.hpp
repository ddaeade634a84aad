#pragma once

#include <array>
#include <map>
#include <optional>
#include <string_view>

#include "typescore/kernels.hpp"
#include "typescore/text.hpp"

namespace typescore::metrics {

using kernels::AlignmentParams;

enum class MetricKind { Ned, Bleu1, CharBleu, Nlcs, SmithWaterman, Ensemble };

inline constexpr std::array<MetricKind, 6> kAllMetrics = {
    MetricKind::Ned,  MetricKind::Bleu1,         MetricKind::CharBleu,
    MetricKind::Nlcs, MetricKind::SmithWaterman, MetricKind::Ensemble};

// Stable identifiers used in every file format ("ned", "bleu1", ...).
std::string_view metric_id(MetricKind kind);
// Column headers for rendered tables ("NED", "BLEU", ...).
std::string_view metric_label(MetricKind kind);
std::optional<MetricKind> parse_metric_kind(std::string_view id);

// Similarity in [0, 1]; higher is better for every kind.
struct MetricScore {
  MetricKind kind;
  double value;
};

using ScoreMap = std::map<MetricKind, double>;

// Normalized edit distance 2*lev/(|a|+|b|), clamped to [0, 1].
double ned_distance(const NormalizedText& a, const NormalizedText& b);

MetricScore ned(const NormalizedText& a, const NormalizedText& b);
MetricScore bleu1(const NormalizedText& candidate, const NormalizedText& reference);
MetricScore char_bleu(const NormalizedText& candidate, const NormalizedText& reference);
MetricScore nlcs(const NormalizedText& a, const NormalizedText& b);
MetricScore smith_waterman(const NormalizedText& a, const NormalizedText& b,
                           const AlignmentParams& params = {});

// Mean of ned, smith_waterman and nlcs.
MetricScore ensemble(const NormalizedText& a, const NormalizedText& b,
                     const AlignmentParams& params = {});

// All six kinds. `reference` is the instructed quote, `candidate` the
// extracted text; only the BLEU variants care about the order.
ScoreMap score_all(const NormalizedText& reference, const NormalizedText& candidate,
                   const AlignmentParams& params = {});

}  // namespace typescore::metrics
