#pragma once

// Brute-force references for the DP kernels. Deliberately slow and shaped
// differently from the production code.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>

namespace oracle {

inline int levenshtein(const std::u32string& a, const std::u32string& b) {
  std::map<std::pair<std::size_t, std::size_t>, int> memo;
  auto rec = [&](auto&& self, std::size_t i, std::size_t j) -> int {
    if (i == a.size()) return static_cast<int>(b.size() - j);
    if (j == b.size()) return static_cast<int>(a.size() - i);
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    int best = self(self, i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    best = std::min(best, self(self, i + 1, j) + 1);
    best = std::min(best, self(self, i, j + 1) + 1);
    memo[key] = best;
    return best;
  };
  return rec(rec, 0, 0);
}

inline bool is_subsequence(const std::u32string& s, const std::u32string& of) {
  std::size_t k = 0;
  for (char32_t c : of) {
    if (k < s.size() && s[k] == c) ++k;
  }
  return k == s.size();
}

// Longest subsequence of the shorter string (over all 2^n subsets) that is
// also a subsequence of the longer one.
inline int lcs_length(const std::u32string& a, const std::u32string& b) {
  const auto& s = a.size() <= b.size() ? a : b;
  const auto& t = a.size() <= b.size() ? b : a;
  const std::uint32_t n = static_cast<std::uint32_t>(s.size());
  int best = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const int bits = __builtin_popcount(mask);
    if (bits <= best) continue;
    std::u32string sub;
    for (std::uint32_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) sub.push_back(s[i]);
    }
    if (is_subsequence(sub, t)) best = bits;
  }
  return best;
}

// Best score over every pair of substrings a[i..x) and b[j..y), each scored
// by an optimal global alignment. The empty pair scores 0.
inline int local_alignment(const std::u32string& a, const std::u32string& b, int match, int mismatch,
                           int gap) {
  int best = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const std::size_t n = a.size() - i;
      const std::size_t m = b.size() - j;
      // g[x][y]: global score of a[i..i+x) against b[j..j+y)
      std::vector<std::vector<int>> g(n + 1, std::vector<int>(m + 1, 0));
      for (std::size_t x = 1; x <= n; ++x) g[x][0] = static_cast<int>(x) * gap;
      for (std::size_t y = 1; y <= m; ++y) g[0][y] = static_cast<int>(y) * gap;
      for (std::size_t x = 1; x <= n; ++x) {
        for (std::size_t y = 1; y <= m; ++y) {
          const int sub = a[i + x - 1] == b[j + y - 1] ? match : mismatch;
          g[x][y] = std::max({g[x - 1][y - 1] + sub, g[x - 1][y] + gap, g[x][y - 1] + gap});
          best = std::max(best, g[x][y]);
        }
      }
    }
  }
  return best;
}

}  // namespace oracle
