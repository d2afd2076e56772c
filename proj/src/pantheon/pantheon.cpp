#include "pfuse/pantheon/pantheon.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pfuse/common/error.hpp"
#include "pfuse/common/rng.hpp"
#include "pfuse/nn/layers.hpp"

namespace pfuse::pantheon {

namespace {

const std::string kItemFea = "pantheon.item_fea";
const std::string kUserFea = "pantheon.user_fea";
const std::string kMlp = "pantheon.mlp";
const std::string kAttention = "pantheon.attn";
const std::string kHead = "pantheon.head";

constexpr std::size_t kScoreChunk = 512;

double clamp_score(double s) {
  return std::clamp(s, nn::kProbEpsilon, 1.0 - nn::kProbEpsilon);
}

}  // namespace

InputVariant parse_input_variant(std::string_view name) {
  if (name == "pxtr") return InputVariant::pxtr;
  if (name == "hidden_state") return InputVariant::hidden_state;
  throw ConfigError("unknown pantheon input variant '" + std::string(name) +
                    "' (expected pxtr or hidden_state)");
}

EncoderVariant parse_encoder_variant(std::string_view name) {
  if (name == "mlp") return EncoderVariant::mlp;
  if (name == "transformer") return EncoderVariant::transformer;
  throw ConfigError("unknown pantheon encoder variant '" + std::string(name) +
                    "' (expected mlp or transformer)");
}

std::string_view to_string(InputVariant v) {
  return v == InputVariant::pxtr ? "pxtr" : "hidden_state";
}

std::string_view to_string(EncoderVariant v) {
  return v == EncoderVariant::mlp ? "mlp" : "transformer";
}

void PantheonConfig::validate() const {
  if (input == InputVariant::pxtr && encoder == EncoderVariant::transformer) {
    throw ConfigError("pantheon: the transformer encoder requires the hidden_state input");
  }
  if (encoder == EncoderVariant::mlp && mlp_dims.empty()) {
    throw ConfigError("pantheon: mlp encoder needs at least one hidden layer");
  }
  for (auto d : mlp_dims) {
    if (d < 1) throw ConfigError("pantheon: mlp dims must be >= 1");
  }
  if (feature_dim < 1 || hidden_dim < 1) throw ConfigError("pantheon: dims must be >= 1");
  if (encoder == EncoderVariant::transformer && feature_dim != hidden_dim) {
    throw ConfigError("pantheon: transformer tokens need feature_dim " +
                      std::to_string(feature_dim) + " == hidden_dim " +
                      std::to_string(hidden_dim));
  }
  if (!(learning_rate > 0.0)) throw ConfigError("pantheon: learning_rate must be positive");
  if (n_users < 1 || n_items < 1) throw ConfigError("pantheon: vocabulary sizes must be >= 1");
  if (n_objectives < 1) throw ConfigError("pantheon: at least one objective is required");
}

std::size_t PantheonConfig::input_length() const noexcept {
  const std::size_t task =
      input == InputVariant::hidden_state ? n_objectives * hidden_dim : n_objectives;
  return 2 * feature_dim + task;
}

PantheonLoss pantheon_loss(double score, std::span<const std::uint8_t> labels,
                           const WeightVector& weights) {
  if (labels.size() != weights.size()) {
    throw ContractViolation("pantheon_loss: " + std::to_string(labels.size()) + " labels but " +
                            std::to_string(weights.size()) + " weights");
  }
  PantheonLoss loss;
  for (std::size_t o = 0; o < labels.size(); ++o) {
    const double term = nn::bce_loss(score, labels[o]);
    loss.per_objective.push_back(term);
    loss.total += weights[o] * term;
  }
  return loss;
}

PantheonModel::PantheonModel(PantheonConfig config, std::uint64_t seed)
    : config_(std::move(config)) {
  config_.validate();
  add_parameters(seed);
}

PantheonModel::PantheonModel(PantheonConfig config, const nn::ParameterStore& params)
    : config_(std::move(config)) {
  config_.validate();
  add_parameters(0);
  params_.restore(params);
}

void PantheonModel::add_parameters(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "pantheon-init"));
  params_.add_glorot(kItemFea, config_.n_items + 1, config_.feature_dim, rng);
  params_.add_glorot(kUserFea, config_.n_users + 1, config_.feature_dim, rng);
  if (config_.encoder == EncoderVariant::mlp) {
    const std::size_t out =
        nn::add_mlp(params_, kMlp, config_.input_length(), config_.mlp_dims, rng);
    nn::add_dense(params_, kHead, out, 1, rng);
  } else {
    nn::add_self_attention(params_, kAttention, config_.hidden_dim, rng);
    nn::add_dense(params_, kHead, config_.hidden_dim, 1, rng);
  }
}

FusionGraphInput PantheonModel::assemble(nn::Graph& graph,
                                         const rank::RankingModel::Forward& ranking,
                                         const rank::Batch& batch) const {
  if (ranking.pxtr.size() != config_.n_objectives) {
    throw ConfigError("pantheon: ranking model has " + std::to_string(ranking.pxtr.size()) +
                      " objectives, fusion head expects " +
                      std::to_string(config_.n_objectives));
  }
  auto isolate = [&](nn::Graph::Var v) {
    return config_.stop_gradient ? graph.stop_gradient(v) : v;
  };
  const Provenance task_provenance =
      config_.stop_gradient ? Provenance::stop_gradient : Provenance::trainable;

  FusionGraphInput in;
  in.variant = config_.input;
  std::vector<nn::Graph::Var> parts;
  parts.push_back(graph.gather_rows(params_, kItemFea, batch.item_rows));
  in.blocks.push_back({BlockKind::item_feature, 0, config_.feature_dim, Provenance::trainable});
  if (config_.input == InputVariant::hidden_state) {
    for (std::size_t o = 0; o < ranking.hidden.size(); ++o) {
      parts.push_back(isolate(ranking.hidden[o]));
      in.blocks.push_back({BlockKind::task_hidden, o, config_.hidden_dim, task_provenance});
    }
  } else {
    parts.push_back(isolate(graph.concat_cols(ranking.pxtr)));
    in.blocks.push_back({BlockKind::task_pxtr, 0, config_.n_objectives, task_provenance});
  }
  parts.push_back(graph.gather_rows(params_, kUserFea, batch.user_rows));
  in.blocks.push_back({BlockKind::user_feature, 0, config_.feature_dim, Provenance::trainable});
  in.flat = graph.concat_cols(parts);
  return in;
}

nn::Graph::Var PantheonModel::encode(nn::Graph& graph, const FusionGraphInput& input) const {
  if (input.variant != config_.input) {
    throw UsageError("ensemble_encode: input assembled for the " +
                     std::string(to_string(input.variant)) + " variant, model expects " +
                     std::string(to_string(config_.input)));
  }
  const auto& flat = graph.value(input.flat);
  if (flat.cols() != config_.input_length()) {
    throw UsageError("ensemble_encode: input length " + std::to_string(flat.cols()) +
                     ", model expects " + std::to_string(config_.input_length()));
  }
  if (config_.encoder == EncoderVariant::mlp) {
    const auto h = nn::mlp(graph, params_, input.flat, kMlp, config_.mlp_dims.size(),
                           nn::Activation::relu);
    return nn::dense(graph, params_, h, kHead, nn::Activation::sigmoid);
  }
  const std::size_t n_tokens = config_.n_objectives + 2;
  const std::size_t rows = flat.rows();
  const auto tokens = graph.reshape(input.flat, rows * n_tokens, config_.hidden_dim);
  const auto attended = nn::self_attention(graph, params_, tokens, n_tokens, kAttention);
  last_attention_ = attended.mixing;
  const auto pooled = graph.block_mean(attended.tokens, n_tokens);
  return nn::dense(graph, params_, pooled, kHead, nn::Activation::sigmoid);
}

nn::Graph::Var PantheonModel::loss(nn::Graph& graph, nn::Graph::Var scores,
                                   const rank::Batch& batch, const WeightVector& weights) const {
  if (weights.size() != batch.labels.size()) {
    throw ContractViolation("pantheon loss: " + std::to_string(weights.size()) +
                            " weights for " + std::to_string(batch.labels.size()) +
                            " objectives");
  }
  std::vector<nn::Graph::Var> terms;
  for (const auto& labels : batch.labels) terms.push_back(graph.bce_mean(scores, labels));
  return graph.weighted_sum(terms, weights.values());
}

FusionInput PantheonModel::assemble_input(const rank::TaskOutputs& outputs, std::int64_t user_id,
                                          std::int64_t item_id) const {
  if (outputs.pxtr.size() != config_.n_objectives ||
      outputs.hidden.size() != config_.n_objectives) {
    throw ConfigError("assemble_input: task outputs cover " +
                      std::to_string(outputs.pxtr.size()) + " objectives, expected " +
                      std::to_string(config_.n_objectives));
  }
  const Provenance task_provenance =
      config_.stop_gradient ? Provenance::stop_gradient : Provenance::trainable;
  FusionInput in;
  in.variant = config_.input;
  in.values.reserve(config_.input_length());
  const auto item = params_.get(kItemFea).row(rank::embedding_row(item_id, config_.n_items));
  in.values.insert(in.values.end(), item.begin(), item.end());
  in.blocks.push_back({BlockKind::item_feature, 0, config_.feature_dim, Provenance::trainable});
  if (config_.input == InputVariant::hidden_state) {
    for (std::size_t o = 0; o < outputs.hidden.size(); ++o) {
      if (outputs.hidden[o].size() != config_.hidden_dim) {
        throw ConfigError("assemble_input: hidden state of dim " +
                          std::to_string(outputs.hidden[o].size()) + ", expected " +
                          std::to_string(config_.hidden_dim));
      }
      in.values.insert(in.values.end(), outputs.hidden[o].begin(), outputs.hidden[o].end());
      in.blocks.push_back({BlockKind::task_hidden, o, config_.hidden_dim, task_provenance});
    }
  } else {
    in.values.insert(in.values.end(), outputs.pxtr.begin(), outputs.pxtr.end());
    in.blocks.push_back({BlockKind::task_pxtr, 0, config_.n_objectives, task_provenance});
  }
  const auto user = params_.get(kUserFea).row(rank::embedding_row(user_id, config_.n_users));
  in.values.insert(in.values.end(), user.begin(), user.end());
  in.blocks.push_back({BlockKind::user_feature, 0, config_.feature_dim, Provenance::trainable});
  return in;
}

double PantheonModel::ensemble_encode(const FusionInput& input) const {
  nn::Graph graph;
  FusionGraphInput g;
  g.variant = input.variant;
  g.blocks = input.blocks;
  g.flat = graph.constant(nn::Tensor(1, input.length(), input.values));
  const auto score = encode(graph, g);
  return clamp_score(graph.value(score)[0]);
}

PantheonStepResult PantheonModel::train_step(std::span<const data::ImpressionLog> batch_logs,
                                             const rank::RankingModel& ranking,
                                             const WeightVector& weights) {
  if (batch_logs.empty()) throw ContractViolation("pantheon_train_step: empty batch");
  const auto& rc = ranking.config();
  const rank::Batch batch =
      rank::make_batch(batch_logs, rc.n_users, rc.n_items, rc.dense_dim, rc.objectives.size());
  nn::Graph graph;
  const auto forward = ranking.forward(graph, batch);
  const auto scores = encode(graph, assemble(graph, forward, batch));

  PantheonStepResult result;
  std::vector<nn::Graph::Var> terms;
  for (const auto& labels : batch.labels) {
    terms.push_back(graph.bce_mean(scores, labels));
    result.per_objective.push_back(graph.value(terms.back())[0]);
  }
  if (weights.size() != terms.size()) {
    throw ContractViolation("pantheon_train_step: " + std::to_string(weights.size()) +
                            " weights for " + std::to_string(terms.size()) + " objectives");
  }
  const auto total = graph.weighted_sum(terms, weights.values());
  result.total = graph.value(total)[0];
  if (!std::isfinite(result.total)) {
    throw NumericError("pantheon_train_step: non-finite loss in batch starting at ordinal " +
                       std::to_string(batch.first_ordinal));
  }

  nn::GradientTape tape(params_);
  if (config_.debug_isolation_check) tape.track(ranking.params());
  nn::backward(graph, total, tape);
  if (config_.debug_isolation_check) {
    for (const auto& [name, grad] : tape.entries()) {
      if (!ranking.params().contains(name)) continue;
      for (std::size_t i = 0; i < grad.size(); ++i) {
        if (grad[i] != 0.0) {
          throw ContractViolation("pantheon loss leaked a gradient into ranking parameter '" +
                                  name + "'");
        }
      }
    }
  }
  nn::optimizer_step(params_, tape, config_.learning_rate, config_.optimizer);
  return result;
}

std::vector<double> PantheonModel::score(std::span<const data::ImpressionLog> logs,
                                         const rank::RankingModel& ranking) const {
  const auto& rc = ranking.config();
  std::vector<double> out;
  out.reserve(logs.size());
  for (std::size_t begin = 0; begin < logs.size(); begin += kScoreChunk) {
    const auto chunk = logs.subspan(begin, std::min(kScoreChunk, logs.size() - begin));
    const rank::Batch batch =
        rank::make_batch(chunk, rc.n_users, rc.n_items, rc.dense_dim, rc.objectives.size());
    nn::Graph graph;
    const auto forward = ranking.forward(graph, batch);
    const auto& scores = graph.value(encode(graph, assemble(graph, forward, batch)));
    for (std::size_t r = 0; r < scores.size(); ++r) out.push_back(clamp_score(scores[r]));
  }
  return out;
}

}  // namespace pfuse::pantheon
