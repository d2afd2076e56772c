#pragma once

#include <span>

#include "pfuse/metrics/auc.hpp"

namespace pfuse::metrics {

enum class Sense { maximize, minimize };

/// Standard Pareto dominance: a is no worse than b everywhere and strictly
/// better somewhere. Throws ContractViolation on length mismatch.
bool pareto_dominates(std::span<const double> a, std::span<const double> b,
                      Sense sense = Sense::maximize);

/// Pareto dominance of GAUC reports over an identical objective list.
bool dominates(const GaucReport& a, const GaucReport& b);

}  // namespace pfuse::metrics
