// Reference DP kernels: one row at a time, O(min(|a|,|b|)) memory.
#include <algorithm>
#include <vector>

#include "typescore/errors.hpp"
#include "typescore/kernels.hpp"

namespace typescore::kernels {

void AlignmentParams::validate() const {
  if (match <= 0) throw PreconditionError("alignment match score must be > 0");
  if (mismatch > 0) throw PreconditionError("alignment mismatch score must be <= 0");
  if (gap > 0) throw PreconditionError("alignment gap score must be <= 0");
}

namespace scalar {

std::int32_t levenshtein(Sequence a, Sequence b) {
  if (a.size() < b.size()) std::swap(a, b);
  const std::size_t m = b.size();
  std::vector<std::int32_t> row(m + 1);
  for (std::size_t j = 0; j <= m; ++j) row[j] = static_cast<std::int32_t>(j);

  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::int32_t diag = row[0];
    row[0] = static_cast<std::int32_t>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const std::int32_t up = row[j];
      const std::int32_t sub = diag + (a[i - 1] != b[j - 1] ? 1 : 0);
      row[j] = std::min({sub, up + 1, row[j - 1] + 1});
      diag = up;
    }
  }
  return row[m];
}

std::int32_t lcs_length(Sequence a, Sequence b) {
  if (a.size() < b.size()) std::swap(a, b);
  const std::size_t m = b.size();
  std::vector<std::int32_t> row(m + 1, 0);

  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::int32_t diag = 0;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::int32_t up = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(up, row[j - 1]);
      diag = up;
    }
  }
  return row[m];
}

std::int32_t local_alignment(Sequence a, Sequence b, const AlignmentParams& p) {
  if (a.size() < b.size()) std::swap(a, b);
  const std::size_t m = b.size();
  std::vector<std::int32_t> row(m + 1, 0);
  std::int32_t best = 0;

  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::int32_t diag = 0;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::int32_t up = row[j];
      const std::int32_t sub = diag + (a[i - 1] == b[j - 1] ? p.match : p.mismatch);
      const std::int32_t h = std::max({0, sub, up + p.gap, row[j - 1] + p.gap});
      row[j] = h;
      best = std::max(best, h);
      diag = up;
    }
  }
  return best;
}

}  // namespace scalar
}  // namespace typescore::kernels
