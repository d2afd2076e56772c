#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pfuse/formula/formula.hpp"

namespace pfuse::formula {

struct SearchConfig {
  std::size_t budget = 512;
  std::size_t sweeps = 3;
  /// Interval reductions per coordinate line search.
  std::size_t golden_iterations = 16;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct TraceEntry {
  std::size_t index = 0;
  std::string phase;
  FormulaParams params;
  double metric = 0.0;
};

struct TuneResult {
  FormulaParams best;
  double best_metric = 0.0;
  std::vector<TraceEntry> trace;
};

/// Seeded two-phase maximization of the selection metric: `budget` uniform
/// samples inside the bounds, then coordinate-wise golden-section sweeps from
/// the best sample (skipped when budget is 1). Returns the best evaluated
/// point; the first one wins ties.
TuneResult tune_params(const FusionFormula& formula, const data::ObjectiveSet& objectives,
                       const nn::Tensor& pxtr, const std::vector<data::ImpressionLog>& window,
                       const metrics::UserGroups& groups, const EvalMetricSpec& spec,
                       const SearchConfig& config);

void write_trace(const std::filesystem::path& path, const std::vector<TraceEntry>& trace);

}  // namespace pfuse::formula
