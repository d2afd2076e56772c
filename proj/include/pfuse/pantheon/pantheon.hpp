#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pfuse/data/datagen.hpp"
#include "pfuse/nn/graph.hpp"
#include "pfuse/nn/optimizer.hpp"
#include "pfuse/nn/parameter_store.hpp"
#include "pfuse/pantheon/weights.hpp"
#include "pfuse/rank/ranking_model.hpp"

namespace pfuse::pantheon {

enum class InputVariant { pxtr, hidden_state };
enum class EncoderVariant { mlp, transformer };

InputVariant parse_input_variant(std::string_view name);
EncoderVariant parse_encoder_variant(std::string_view name);
std::string_view to_string(InputVariant v);
std::string_view to_string(EncoderVariant v);

struct PantheonConfig {
  InputVariant input = InputVariant::hidden_state;
  EncoderVariant encoder = EncoderVariant::mlp;
  std::vector<std::size_t> mlp_dims = {64, 32};
  /// Width of the unshared ItemFea/UserFea vectors; equals the tower output
  /// dimension so every block can serve as a transformer token.
  std::size_t feature_dim = 16;
  double learning_rate = 1e-3;
  nn::OptimizerMethod optimizer = nn::OptimizerMethod::adam;
  /// Cut gradients from the fusion loss into the ranking model. Disabling it
  /// exists only to demonstrate what the isolation check catches.
  bool stop_gradient = true;
  /// Track ranking parameters on every step and require exact zero gradients.
  bool debug_isolation_check = false;
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::size_t n_objectives = 0;
  /// Tower output dimension d of the ranking model.
  std::size_t hidden_dim = 16;

  /// Accepts only (pxtr, mlp), (hidden_state, mlp), (hidden_state, transformer).
  void validate() const;
  std::size_t input_length() const noexcept;
};

enum class BlockKind { item_feature, task_hidden, task_pxtr, user_feature };
enum class Provenance { stop_gradient, trainable };

struct FusionBlock {
  BlockKind kind = BlockKind::item_feature;
  /// Objective index for task_hidden blocks.
  std::size_t objective = 0;
  std::size_t width = 0;
  Provenance provenance = Provenance::trainable;
};

/// Assembled fusion input of one sample: [ItemFea, t_1..t_N | ŷ, UserFea].
struct FusionInput {
  InputVariant variant = InputVariant::hidden_state;
  std::vector<FusionBlock> blocks;
  std::vector<double> values;

  std::size_t length() const noexcept { return values.size(); }
};

/// The same assembly inside a graph, for a batch.
struct FusionGraphInput {
  InputVariant variant = InputVariant::hidden_state;
  std::vector<FusionBlock> blocks;
  nn::Graph::Var flat;
};

struct PantheonLoss {
  double total = 0.0;
  std::vector<double> per_objective;
};

/// Weighted multi-objective BCE of one shared score: every objective's term
/// is BCE(score, y_o) and total = Σ w_o · term_o.
PantheonLoss pantheon_loss(double score, std::span<const std::uint8_t> labels,
                           const WeightVector& weights);

struct PantheonStepResult {
  double total = 0.0;
  std::vector<double> per_objective;
};

/// Fusion head trained jointly with (but isolated from) the ranking model.
class PantheonModel {
 public:
  PantheonModel(PantheonConfig config, std::uint64_t seed);
  PantheonModel(PantheonConfig config, const nn::ParameterStore& params);

  const PantheonConfig& config() const noexcept { return config_; }
  const nn::ParameterStore& params() const noexcept { return params_; }
  nn::ParameterStore& params() noexcept { return params_; }

  FusionGraphInput assemble(nn::Graph& graph, const rank::RankingModel::Forward& ranking,
                            const rank::Batch& batch) const;
  /// Score per row, B×1, strictly inside (0, 1).
  nn::Graph::Var encode(nn::Graph& graph, const FusionGraphInput& input) const;
  /// Last attention node of the transformer encoder, if any.
  nn::Graph::Var last_attention() const noexcept { return last_attention_; }
  nn::Graph::Var loss(nn::Graph& graph, nn::Graph::Var scores, const rank::Batch& batch,
                      const WeightVector& weights) const;

  FusionInput assemble_input(const rank::TaskOutputs& outputs, std::int64_t user_id,
                             std::int64_t item_id) const;
  double ensemble_encode(const FusionInput& input) const;

  /// One optimizer step on the fusion parameters only; the ranking model is
  /// read through stop-gradient and left untouched.
  PantheonStepResult train_step(std::span<const data::ImpressionLog> batch,
                                const rank::RankingModel& ranking, const WeightVector& weights);

  std::vector<double> score(std::span<const data::ImpressionLog> logs,
                            const rank::RankingModel& ranking) const;

 private:
  void add_parameters(std::uint64_t seed);

  PantheonConfig config_;
  nn::ParameterStore params_;
  mutable nn::Graph::Var last_attention_;
};

}  // namespace pfuse::pantheon
