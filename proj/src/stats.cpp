#include "typescore/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "typescore/errors.hpp"
#include "typescore/rng.hpp"

namespace typescore::stats {
namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw LengthMismatch("correlation inputs differ in length");
  if (x.size() < 2) throw TooFewPoints("correlation needs at least two points");
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

MeanSem mean_sem(std::span<const double> values) {
  if (values.empty()) throw EmptyInput("mean of an empty sample");
  // Work on offsets from the first value so a constant sample is exact.
  const auto n = static_cast<double>(values.size());
  const double pivot = values[0];
  double offset = 0;
  for (double v : values) offset += v - pivot;
  offset /= n;
  const double mean = pivot + offset;
  double sem = 0;
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - pivot - offset) * (v - pivot - offset);
    sem = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return {mean, sem, values.size()};
}

double bootstrap_sem(std::span<const double> values, int resamples, std::uint64_t seed) {
  if (values.empty()) throw EmptyInput("bootstrap of an empty sample");
  if (resamples < 1) throw PreconditionError("bootstrap needs at least one resample");

  const std::size_t n = values.size();
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (int r = 0; r < resamples; ++r) {
    const CounterRng rng(seed, static_cast<std::uint64_t>(r));
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) sum += values[rng.below(n, i)] - values[0];
    means[static_cast<std::size_t>(r)] = sum / static_cast<double>(n);
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / resamples;
  double ss = 0;
  for (double m : means) ss += (m - grand) * (m - grand);
  return std::sqrt(ss / resamples);
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) return {0.0, true};
  return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), false};
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

}  // namespace typescore::stats
