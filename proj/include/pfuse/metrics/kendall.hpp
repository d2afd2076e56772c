#pragma once

#include <span>

namespace pfuse::metrics {

/// Tie-corrected Kendall rank correlation (τ-b), computed in O(n log n) with
/// Knight's merge-sort method. Throws ContractViolation on unequal or short
/// inputs and UndefinedMetric when either side is entirely tied.
double kendall_tau(std::span<const double> x, std::span<const double> y);

}  // namespace pfuse::metrics
