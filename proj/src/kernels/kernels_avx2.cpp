// AVX2 kernels. The DP matrix is swept along anti-diagonals k = i + j: every
// cell on diagonal k depends only on diagonals k-1 and k-2, so eight
// consecutive rows of one diagonal are computed together. Diagonals are
// stored indexed by row i, and b is reversed so that b[k-i-1] is contiguous
// in i as well.
#include <immintrin.h>

#include <algorithm>
#include <vector>

#include "typescore/kernels.hpp"

namespace typescore::kernels::avx2 {
namespace {

constexpr std::size_t kLanes = 8;

inline __m256i load(const std::int32_t* p) {
  return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
}
inline __m256i load(const char32_t* p) {
  return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
}
inline void store(std::int32_t* p, __m256i v) {
  _mm256_storeu_si256(reinterpret_cast<__m256i*>(p), v);
}

inline std::int32_t hmax(__m256i v) {
  __m128i x = _mm_max_epi32(_mm256_castsi256_si128(v), _mm256_extracti128_si256(v, 1));
  x = _mm_max_epi32(x, _mm_shuffle_epi32(x, _MM_SHUFFLE(1, 0, 3, 2)));
  x = _mm_max_epi32(x, _mm_shuffle_epi32(x, _MM_SHUFFLE(2, 3, 0, 1)));
  return _mm_cvtsi128_si32(x);
}

// Runs the anti-diagonal sweep and returns the last diagonal buffer, whose
// entry at row |a| is cell (|a|, |b|).
//   edge(i, j)                 value of a boundary cell (i == 0 or j == 0)
//   cell(diag, up, left, eq)   scalar recurrence
//   vcell(diag, up, left, eq)  the same on eight lanes; eq is an all-ones mask
template <class Edge, class Cell, class VCell>
std::int32_t sweep(Sequence a, Sequence b, Edge edge, Cell cell, VCell vcell) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::u32string rb(b.rbegin(), b.rend());
  std::vector<std::int32_t> buf(3 * (n + 1), 0);
  std::int32_t* d2 = buf.data();
  std::int32_t* d1 = d2 + (n + 1);
  std::int32_t* d0 = d1 + (n + 1);

  for (std::size_t k = 0; k <= n + m; ++k) {
    if (k <= m) d0[0] = edge(0, k);
    if (k <= n) d0[k] = edge(k, 0);

    const std::size_t lo = std::max<std::size_t>(1, k > m ? k - m : 0);
    const std::size_t hi = std::min(n, k == 0 ? 0 : k - 1);  // inclusive
    std::size_t i = lo;
    if (k >= 2) {
      for (; i + kLanes <= hi + 1; i += kLanes) {
        const __m256i eq = _mm256_cmpeq_epi32(load(&a[i - 1]), load(&rb[m - k + i]));
        store(&d0[i], vcell(load(&d2[i - 1]), load(&d1[i]), load(&d1[i - 1]), eq));
      }
      for (; i <= hi; ++i) {
        d0[i] = cell(d2[i - 1], d1[i], d1[i - 1], a[i - 1] == rb[m - k + i]);
      }
    }
    std::int32_t* spent = d2;
    d2 = d1;
    d1 = d0;
    d0 = spent;
  }
  return d1[n];
}

}  // namespace

// In the sweep, "up" is cell (i, j-1) = d1[i] and "left" is (i-1, j) = d1[i-1];
// the recurrences below are symmetric in the two so the naming is cosmetic.

std::int32_t levenshtein(Sequence a, Sequence b) {
  const __m256i one = _mm256_set1_epi32(1);
  return sweep(
      a, b, [](std::size_t i, std::size_t j) { return static_cast<std::int32_t>(i + j); },
      [](std::int32_t diag, std::int32_t up, std::int32_t left, bool eq) {
        return std::min({diag + (eq ? 0 : 1), up + 1, left + 1});
      },
      [one](__m256i diag, __m256i up, __m256i left, __m256i eq) {
        // eq lanes are -1, so diag + 1 + eq is the substitution cost.
        const __m256i sub = _mm256_add_epi32(_mm256_add_epi32(diag, one), eq);
        const __m256i indel = _mm256_add_epi32(_mm256_min_epi32(up, left), one);
        return _mm256_min_epi32(sub, indel);
      });
}

std::int32_t lcs_length(Sequence a, Sequence b) {
  const __m256i one = _mm256_set1_epi32(1);
  return sweep(
      a, b, [](std::size_t, std::size_t) { return 0; },
      [](std::int32_t diag, std::int32_t up, std::int32_t left, bool eq) {
        return eq ? diag + 1 : std::max(up, left);
      },
      [one](__m256i diag, __m256i up, __m256i left, __m256i eq) {
        return _mm256_blendv_epi8(_mm256_max_epi32(up, left), _mm256_add_epi32(diag, one), eq);
      });
}

std::int32_t local_alignment(Sequence a, Sequence b, const AlignmentParams& p) {
  const __m256i zero = _mm256_setzero_si256();
  const __m256i match = _mm256_set1_epi32(p.match);
  const __m256i mismatch = _mm256_set1_epi32(p.mismatch);
  const __m256i gap = _mm256_set1_epi32(p.gap);
  __m256i vbest = zero;
  std::int32_t best = 0;

  sweep(
      a, b, [](std::size_t, std::size_t) { return 0; },
      [&](std::int32_t diag, std::int32_t up, std::int32_t left, bool eq) {
        const std::int32_t h =
            std::max({0, diag + (eq ? p.match : p.mismatch), std::max(up, left) + p.gap});
        best = std::max(best, h);
        return h;
      },
      [&](__m256i diag, __m256i up, __m256i left, __m256i eq) {
        const __m256i sub = _mm256_add_epi32(diag, _mm256_blendv_epi8(mismatch, match, eq));
        const __m256i indel = _mm256_add_epi32(_mm256_max_epi32(up, left), gap);
        const __m256i h = _mm256_max_epi32(zero, _mm256_max_epi32(sub, indel));
        vbest = _mm256_max_epi32(vbest, h);
        return h;
      });
  return std::max(best, hmax(vbest));
}

}  // namespace typescore::kernels::avx2
