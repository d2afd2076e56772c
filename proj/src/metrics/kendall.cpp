#include "pfuse/metrics/kendall.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "pfuse/common/error.hpp"

namespace pfuse::metrics {

namespace {

std::int64_t pairs(std::int64_t n) { return n * (n - 1) / 2; }

/// Pairs tied within runs of equal values of an already sorted sequence.
template <typename Equal>
std::int64_t tied_pairs(std::size_t n, Equal equal) {
  std::int64_t total = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && equal(i, j)) ++j;
    total += pairs(static_cast<std::int64_t>(j - i));
    i = j;
  }
  return total;
}

/// Stable merge sort on `v`, returning the number of inversions (strict).
std::int64_t sort_count_swaps(std::vector<double>& v, std::vector<double>& buffer,
                              std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = sort_count_swaps(v, buffer, lo, mid) + sort_count_swaps(v, buffer, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buffer[k++] = v[j++];
    } else {
      buffer[k++] = v[i++];
    }
  }
  while (i < mid) buffer[k++] = v[i++];
  while (j < hi) buffer[k++] = v[j++];
  std::copy(buffer.begin() + static_cast<std::ptrdiff_t>(lo),
            buffer.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ContractViolation("kendall_tau: lengths " + std::to_string(x.size()) + " and " +
                            std::to_string(y.size()) + " differ");
  }
  if (x.size() < 2) throw ContractViolation("kendall_tau: need at least two observations");
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  const std::int64_t total = pairs(static_cast<std::int64_t>(n));
  const std::int64_t ties_x =
      tied_pairs(n, [&](std::size_t i, std::size_t j) { return x[order[i]] == x[order[j]]; });
  const std::int64_t ties_xy = tied_pairs(n, [&](std::size_t i, std::size_t j) {
    return x[order[i]] == x[order[j]] && y[order[i]] == y[order[j]];
  });

  std::vector<double> ys(n), buffer(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const std::int64_t swaps = sort_count_swaps(ys, buffer, 0, n);
  const std::int64_t ties_y = tied_pairs(n, [&](std::size_t i, std::size_t j) { return ys[i] == ys[j]; });

  if (ties_x == total || ties_y == total) {
    throw UndefinedMetric("kendall_tau: one input is entirely tied");
  }
  // concordant - discordant = total - ties_x - ties_y + ties_xy - 2·swaps
  const std::int64_t numerator = total - ties_x - ties_y + ties_xy - 2 * swaps;
  const double denom = std::sqrt(static_cast<double>(total - ties_x)) *
                       std::sqrt(static_cast<double>(total - ties_y));
  return static_cast<double>(numerator) / denom;
}

}  // namespace pfuse::metrics
