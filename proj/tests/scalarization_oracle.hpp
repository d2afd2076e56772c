#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "pfuse/common/rng.hpp"
#include "pfuse/metrics/dominance.hpp"
#include "pfuse/nn/layers.hpp"

namespace pfuse::testing {

struct ScalarizationOutcome {
  std::size_t assignments = 0;
  std::size_t weight_vectors = 0;
  /// Weight vectors whose weighted-loss minimizer some enumerated point dominates.
  std::size_t dominated_minimizers = 0;
};

/// Exhaustive scalarization check. Each of `n_items` items takes a score from
/// the grid {0.1, ..., 0.9}; objective o's loss is the summed BCE of the scores
/// against its own random labels. For each random strictly positive weight
/// vector the weighted-loss global minimizer over all 9^n_items assignments is
/// tested for Pareto dominance against every assignment.
inline ScalarizationOutcome check_scalarization(std::uint64_t seed, std::size_t n_items,
                                                std::size_t n_objectives,
                                                std::size_t n_weight_vectors) {
  constexpr std::size_t kGrid = 9;
  Rng rng(seed);
  std::vector<std::vector<double>> labels(n_objectives, std::vector<double>(n_items));
  for (auto& row : labels) {
    for (auto& y : row) y = rng.bernoulli(0.5) ? 1.0 : 0.0;
  }
  std::size_t total = 1;
  for (std::size_t i = 0; i < n_items; ++i) total *= kGrid;

  // losses[a * n_objectives + o] for assignment a.
  std::vector<double> losses(total * n_objectives, 0.0);
  std::vector<std::size_t> digits(n_items, 0);
  for (std::size_t a = 0; a < total; ++a) {
    for (std::size_t o = 0; o < n_objectives; ++o) {
      double l = 0.0;
      for (std::size_t i = 0; i < n_items; ++i) {
        l += nn::bce_loss(0.1 * static_cast<double>(digits[i] + 1), labels[o][i]);
      }
      losses[a * n_objectives + o] = l;
    }
    for (std::size_t i = 0; i < n_items && ++digits[i] == kGrid; ++i) digits[i] = 0;
  }

  ScalarizationOutcome out;
  out.assignments = total;
  out.weight_vectors = n_weight_vectors;
  for (std::size_t k = 0; k < n_weight_vectors; ++k) {
    std::vector<double> w(n_objectives);
    for (auto& x : w) x = rng.uniform(0.01, 1.0);
    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < total; ++a) {
      double v = 0.0;
      for (std::size_t o = 0; o < n_objectives; ++o) v += w[o] * losses[a * n_objectives + o];
      if (v < best_value) {
        best_value = v;
        best = a;
      }
    }
    const std::span<const double> minimizer(&losses[best * n_objectives], n_objectives);
    for (std::size_t a = 0; a < total; ++a) {
      const std::span<const double> candidate(&losses[a * n_objectives], n_objectives);
      if (metrics::pareto_dominates(candidate, minimizer, metrics::Sense::minimize)) {
        ++out.dominated_minimizers;
        break;
      }
    }
  }
  return out;
}

}  // namespace pfuse::testing
