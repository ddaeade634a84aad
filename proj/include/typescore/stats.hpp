#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace typescore::stats {

struct MeanSem {
  double mean = 0;
  double sem = 0;  // sample sd / sqrt(n); 0 when n < 2
  std::size_t n = 0;
};

// Throws EmptyInput.
MeanSem mean_sem(std::span<const double> values);

// Standard deviation of `resamples` bootstrap means. Resample r draws from
// CounterRng(seed, r), so the result does not depend on threading.
double bootstrap_sem(std::span<const double> values, int resamples, std::uint64_t seed);

struct Correlation {
  double r = 0;
  bool degenerate = false;  // a variance was zero; r is reported as 0
};

Correlation pearson(std::span<const double> x, std::span<const double> y);

// Pearson correlation of average ranks.
Correlation spearman(std::span<const double> x, std::span<const double> y);

}  // namespace typescore::stats
