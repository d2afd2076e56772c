#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pfuse/data/datagen.hpp"
#include "pfuse/nn/graph.hpp"
#include "pfuse/nn/optimizer.hpp"
#include "pfuse/nn/parameter_store.hpp"

namespace pfuse::rank {

struct RankingConfig {
  std::size_t n_experts = 4;
  std::vector<std::size_t> expert_hidden_dims = {32};
  /// Last width is the tower output (hidden-state) dimension.
  std::vector<std::size_t> tower_hidden_dims = {32, 16};
  std::size_t tower_output_dim = 16;
  std::size_t embedding_dim = 8;
  double learning_rate = 1e-3;
  nn::OptimizerMethod optimizer = nn::OptimizerMethod::adam;
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::size_t dense_dim = 0;
  data::ObjectiveSet objectives = data::ObjectiveSet::defaults();

  /// Throws ConfigError on zero dims or a tower that does not end at d.
  void validate() const;
  std::size_t input_dim() const noexcept { return 2 * embedding_dim + dense_dim; }
};

/// Embedding row for an id: ids 1..vocab map to themselves, anything else to
/// the reserved out-of-vocabulary row 0.
std::size_t embedding_row(std::int64_t id, std::size_t vocab);

/// Column-major view of a batch of impressions.
struct Batch {
  std::vector<std::size_t> user_rows;
  std::vector<std::size_t> item_rows;
  nn::Tensor dense;
  /// One label column per objective, each of batch length.
  std::vector<std::vector<double>> labels;
  std::int64_t first_ordinal = 0;

  std::size_t size() const noexcept { return user_rows.size(); }
};

Batch make_batch(std::span<const data::ImpressionLog> logs, std::size_t n_users,
                 std::size_t n_items, std::size_t dense_dim, std::size_t n_objectives);

/// Per-objective tower hidden states t and predicted probabilities ŷ, indexed
/// by the ObjectiveSet order.
struct TaskOutputs {
  std::vector<std::vector<double>> hidden;
  std::vector<double> pxtr;
};

struct MoeOutputs {
  /// Per objective: softmax gate weights over experts.
  std::vector<std::vector<double>> gates;
  /// Per objective: gate-weighted expert mixture e.
  std::vector<std::vector<double>> mixtures;
};

/// Batched inference results: pxtr is B×N, hidden[o] is B×d.
struct BatchOutputs {
  nn::Tensor pxtr;
  std::vector<nn::Tensor> hidden;
};

/// MMoE ranking model: shared ID embeddings and dense features, shared
/// experts with one softmax gate per objective, then per-objective towers
/// (dense+ReLU) and single-layer sigmoid heads.
class RankingModel {
 public:
  RankingModel(RankingConfig config, std::uint64_t seed);
  /// Rebuilds a model around restored parameters; the manifest must match.
  RankingModel(RankingConfig config, const nn::ParameterStore& params);

  const RankingConfig& config() const noexcept { return config_; }
  const nn::ParameterStore& params() const noexcept { return params_; }
  nn::ParameterStore& params() noexcept { return params_; }

  struct Forward {
    nn::Graph::Var input;
    std::vector<nn::Graph::Var> gates;
    std::vector<nn::Graph::Var> mixtures;
    std::vector<nn::Graph::Var> hidden;
    std::vector<nn::Graph::Var> pxtr;
  };
  Forward forward(nn::Graph& graph, const Batch& batch) const;
  /// Sum over objectives of mean BCE, on an existing forward pass.
  nn::Graph::Var loss(nn::Graph& graph, const Forward& forward, const Batch& batch) const;

  /// v = [user embedding, item embedding, dense features].
  std::vector<double> build_input(const data::ImpressionLog& log) const;
  MoeOutputs moe_forward(std::span<const double> input) const;
  TaskOutputs rank_forward(const data::ImpressionLog& log) const;
  BatchOutputs infer(std::span<const data::ImpressionLog> logs) const;

  /// One optimizer step on the unweighted sum of per-objective mean BCE.
  /// Returns the per-objective losses before the update.
  std::vector<double> train_step(std::span<const data::ImpressionLog> batch);

 private:
  void add_parameters(std::uint64_t seed);
  struct Trunk {
    std::vector<nn::Graph::Var> gates;
    std::vector<nn::Graph::Var> mixtures;
  };
  Trunk trunk(nn::Graph& graph, nn::Graph::Var input) const;

  RankingConfig config_;
  nn::ParameterStore params_;
};

}  // namespace pfuse::rank
