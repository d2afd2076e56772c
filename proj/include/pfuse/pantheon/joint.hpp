#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "pfuse/nn/parameter_store.hpp"
#include "pfuse/nn/tensor.hpp"
#include "pfuse/pantheon/pantheon.hpp"
#include "pfuse/pantheon/weights.hpp"
#include "pfuse/rank/ranking_model.hpp"
#include "pfuse/rank/snapshot.hpp"

namespace pfuse::pantheon {

nlohmann::ordered_json to_json(const PantheonConfig& config);
PantheonConfig pantheon_config_from_json(const nlohmann::ordered_json& j);

/// The active weights travel in the snapshot header.
rank::Snapshot make_pantheon_snapshot(const PantheonModel& model, const WeightVector& weights);
PantheonModel pantheon_from_snapshot(const rank::Snapshot& snapshot);
WeightVector weights_from_snapshot(const rank::Snapshot& snapshot);

/// Parameters (and optimizer state) of both jointly trained components.
struct JointSnapshot {
  nn::ParameterStore ranking;
  nn::ParameterStore pantheon;

  friend bool operator==(const JointSnapshot&, const JointSnapshot&) = default;
};

struct JointStepLosses {
  std::vector<double> ranking;
  double pantheon_total = 0.0;
  std::vector<double> pantheon;
};

/// Ranking model plus fusion head, trained on the same stream: per batch one
/// ranking step, then one fusion step against the updated ranking model.
class JointModel {
 public:
  JointModel(rank::RankingModel ranking, PantheonModel pantheon);

  const rank::RankingModel& ranking() const noexcept { return ranking_; }
  rank::RankingModel& ranking() noexcept { return ranking_; }
  const PantheonModel& pantheon() const noexcept { return pantheon_; }
  PantheonModel& pantheon() noexcept { return pantheon_; }

  JointStepLosses step(std::span<const data::ImpressionLog> batch, const WeightVector& weights);

  JointSnapshot snapshot() const;
  void restore(const JointSnapshot& snapshot);

 private:
  rank::RankingModel ranking_;
  PantheonModel pantheon_;
};

/// Scores for one evaluation window, row-aligned with the window.
struct WindowScores {
  std::vector<double> fused;
  /// rows × objectives ranking-model predictions.
  nn::Tensor pxtr;
};

/// Thread-parallel scoring in fixed chunks, gathered in window order.
WindowScores score_window(const rank::RankingModel& ranking, const PantheonModel& pantheon,
                          std::span<const data::ImpressionLog> window, std::size_t threads);
nn::Tensor ranking_pxtr(const rank::RankingModel& ranking,
                        std::span<const data::ImpressionLog> window, std::size_t threads);

}  // namespace pfuse::pantheon
