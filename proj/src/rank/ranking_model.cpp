#include "pfuse/rank/ranking_model.hpp"

#include <algorithm>
#include <cmath>

#include "pfuse/common/error.hpp"
#include "pfuse/common/rng.hpp"
#include "pfuse/nn/layers.hpp"

namespace pfuse::rank {

namespace {

const std::string kUserEmbedding = "rank.user_embedding";
const std::string kItemEmbedding = "rank.item_embedding";

std::string expert_prefix(std::size_t j) { return "rank.expert" + std::to_string(j); }
std::string gate_prefix(const std::string& objective) { return "rank.gate." + objective; }
std::string tower_prefix(const std::string& objective) { return "rank.tower." + objective; }
std::string head_prefix(const std::string& objective) { return "rank.head." + objective; }

}  // namespace

void RankingConfig::validate() const {
  if (n_experts < 1) throw ConfigError("ranking: n_experts must be >= 1");
  if (embedding_dim < 1) throw ConfigError("ranking: embedding_dim must be >= 1");
  if (expert_hidden_dims.empty() || tower_hidden_dims.empty()) {
    throw ConfigError("ranking: expert and tower dims must be non-empty");
  }
  for (auto d : expert_hidden_dims) {
    if (d < 1) throw ConfigError("ranking: expert dims must be >= 1");
  }
  for (auto d : tower_hidden_dims) {
    if (d < 1) throw ConfigError("ranking: tower dims must be >= 1");
  }
  if (tower_hidden_dims.back() != tower_output_dim) {
    throw ConfigError("ranking: last tower width " + std::to_string(tower_hidden_dims.back()) +
                      " must equal tower_output_dim " + std::to_string(tower_output_dim));
  }
  if (!(learning_rate > 0.0)) throw ConfigError("ranking: learning_rate must be positive");
  if (n_users < 1 || n_items < 1) throw ConfigError("ranking: vocabulary sizes must be >= 1");
}

std::size_t embedding_row(std::int64_t id, std::size_t vocab) {
  if (id >= 1 && static_cast<std::uint64_t>(id) <= vocab) return static_cast<std::size_t>(id);
  return 0;
}

Batch make_batch(std::span<const data::ImpressionLog> logs, std::size_t n_users,
                 std::size_t n_items, std::size_t dense_dim, std::size_t n_objectives) {
  Batch b;
  b.dense = nn::Tensor(logs.size(), dense_dim);
  b.labels.assign(n_objectives, std::vector<double>(logs.size(), 0.0));
  b.user_rows.reserve(logs.size());
  b.item_rows.reserve(logs.size());
  if (!logs.empty()) b.first_ordinal = logs.front().ordinal;
  for (std::size_t r = 0; r < logs.size(); ++r) {
    const auto& log = logs[r];
    if (log.dense_features.size() != dense_dim) {
      throw ConfigError("impression " + std::to_string(log.ordinal) + " has " +
                        std::to_string(log.dense_features.size()) +
                        " dense features, model expects " + std::to_string(dense_dim));
    }
    if (log.labels.size() != n_objectives) {
      throw ConfigError("impression " + std::to_string(log.ordinal) + " has " +
                        std::to_string(log.labels.size()) + " labels, expected " +
                        std::to_string(n_objectives));
    }
    b.user_rows.push_back(embedding_row(log.user_id, n_users));
    b.item_rows.push_back(embedding_row(log.item_id, n_items));
    std::copy(log.dense_features.begin(), log.dense_features.end(), b.dense.row(r).begin());
    for (std::size_t o = 0; o < n_objectives; ++o) b.labels[o][r] = log.labels[o];
  }
  return b;
}

RankingModel::RankingModel(RankingConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  add_parameters(seed);
}

RankingModel::RankingModel(RankingConfig config, const nn::ParameterStore& params)
    : config_(std::move(config)) {
  config_.validate();
  add_parameters(0);
  params_.restore(params);
}

void RankingModel::add_parameters(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "ranking-init"));
  const std::size_t in = config_.input_dim();
  params_.add_glorot(kUserEmbedding, config_.n_users + 1, config_.embedding_dim, rng);
  params_.add_glorot(kItemEmbedding, config_.n_items + 1, config_.embedding_dim, rng);
  for (std::size_t j = 0; j < config_.n_experts; ++j) {
    nn::add_mlp(params_, expert_prefix(j), in, config_.expert_hidden_dims, rng);
  }
  const std::size_t expert_out = config_.expert_hidden_dims.back();
  for (const auto& name : config_.objectives.names()) {
    nn::add_dense(params_, gate_prefix(name), in, config_.n_experts, rng);
    nn::add_mlp(params_, tower_prefix(name), expert_out, config_.tower_hidden_dims, rng);
    nn::add_dense(params_, head_prefix(name), config_.tower_output_dim, 1, rng);
  }
}

RankingModel::Trunk RankingModel::trunk(nn::Graph& graph, nn::Graph::Var input) const {
  std::vector<nn::Graph::Var> experts;
  experts.reserve(config_.n_experts);
  for (std::size_t j = 0; j < config_.n_experts; ++j) {
    experts.push_back(nn::mlp(graph, params_, input, expert_prefix(j),
                              config_.expert_hidden_dims.size(), nn::Activation::relu));
  }
  Trunk t;
  for (const auto& name : config_.objectives.names()) {
    const auto logits = nn::dense(graph, params_, input, gate_prefix(name), nn::Activation::none);
    const auto gate = graph.softmax_rows(logits);
    t.gates.push_back(gate);
    t.mixtures.push_back(graph.mixture(gate, experts));
  }
  return t;
}

RankingModel::Forward RankingModel::forward(nn::Graph& graph, const Batch& batch) const {
  Forward f;
  const auto user = graph.gather_rows(params_, kUserEmbedding, batch.user_rows);
  const auto item = graph.gather_rows(params_, kItemEmbedding, batch.item_rows);
  const auto dense = graph.constant(batch.dense);
  const nn::Graph::Var parts[] = {user, item, dense};
  f.input = graph.concat_cols(parts);
  auto t = trunk(graph, f.input);
  f.gates = std::move(t.gates);
  f.mixtures = std::move(t.mixtures);
  const auto& names = config_.objectives.names();
  for (std::size_t o = 0; o < names.size(); ++o) {
    const auto hidden = nn::mlp(graph, params_, f.mixtures[o], tower_prefix(names[o]),
                                config_.tower_hidden_dims.size(), nn::Activation::relu);
    f.hidden.push_back(hidden);
    f.pxtr.push_back(
        nn::dense(graph, params_, hidden, head_prefix(names[o]), nn::Activation::sigmoid));
  }
  return f;
}

nn::Graph::Var RankingModel::loss(nn::Graph& graph, const Forward& forward,
                                  const Batch& batch) const {
  std::vector<nn::Graph::Var> terms;
  for (std::size_t o = 0; o < forward.pxtr.size(); ++o) {
    terms.push_back(graph.bce_mean(forward.pxtr[o], batch.labels[o]));
  }
  const std::vector<double> ones(terms.size(), 1.0);
  return graph.weighted_sum(terms, ones);
}

std::vector<double> RankingModel::build_input(const data::ImpressionLog& log) const {
  if (log.dense_features.size() != config_.dense_dim) {
    throw ConfigError("build_input: " + std::to_string(log.dense_features.size()) +
                      " dense features, model expects " + std::to_string(config_.dense_dim));
  }
  std::vector<double> v;
  v.reserve(config_.input_dim());
  const auto user = params_.get(kUserEmbedding).row(embedding_row(log.user_id, config_.n_users));
  const auto item = params_.get(kItemEmbedding).row(embedding_row(log.item_id, config_.n_items));
  v.insert(v.end(), user.begin(), user.end());
  v.insert(v.end(), item.begin(), item.end());
  v.insert(v.end(), log.dense_features.begin(), log.dense_features.end());
  return v;
}

MoeOutputs RankingModel::moe_forward(std::span<const double> input) const {
  if (input.size() != config_.input_dim()) {
    throw ConfigError("moe_forward: input length " + std::to_string(input.size()) +
                      ", expected " + std::to_string(config_.input_dim()));
  }
  nn::Graph graph;
  const auto v = graph.constant(nn::Tensor(1, input.size(), {input.begin(), input.end()}));
  const auto t = trunk(graph, v);
  MoeOutputs out;
  for (std::size_t o = 0; o < t.gates.size(); ++o) {
    const auto& g = graph.value(t.gates[o]).values();
    const auto& m = graph.value(t.mixtures[o]).values();
    out.gates.emplace_back(g.begin(), g.end());
    out.mixtures.emplace_back(m.begin(), m.end());
  }
  return out;
}

TaskOutputs RankingModel::rank_forward(const data::ImpressionLog& log) const {
  const auto outputs = infer(std::span(&log, 1));
  TaskOutputs t;
  t.pxtr.assign(outputs.pxtr.values().begin(), outputs.pxtr.values().end());
  for (const auto& h : outputs.hidden) t.hidden.emplace_back(h.values().begin(), h.values().end());
  return t;
}

BatchOutputs RankingModel::infer(std::span<const data::ImpressionLog> logs) const {
  const std::size_t n_obj = config_.objectives.size();
  const Batch batch = make_batch(logs, config_.n_users, config_.n_items, config_.dense_dim, n_obj);
  nn::Graph graph;
  const Forward f = forward(graph, batch);
  BatchOutputs out;
  out.pxtr = nn::Tensor(batch.size(), n_obj);
  for (std::size_t o = 0; o < n_obj; ++o) {
    const auto& p = graph.value(f.pxtr[o]);
    for (std::size_t r = 0; r < batch.size(); ++r) out.pxtr(r, o) = p[r];
    out.hidden.push_back(graph.value(f.hidden[o]));
  }
  return out;
}

std::vector<double> RankingModel::train_step(std::span<const data::ImpressionLog> batch_logs) {
  if (batch_logs.empty()) throw ContractViolation("rank_train_step: empty batch");
  const Batch batch = make_batch(batch_logs, config_.n_users, config_.n_items,
                                 config_.dense_dim, config_.objectives.size());
  nn::Graph graph;
  const Forward f = forward(graph, batch);
  std::vector<double> losses;
  std::vector<nn::Graph::Var> terms;
  for (std::size_t o = 0; o < f.pxtr.size(); ++o) {
    terms.push_back(graph.bce_mean(f.pxtr[o], batch.labels[o]));
    losses.push_back(graph.value(terms.back())[0]);
  }
  const std::vector<double> ones(terms.size(), 1.0);
  const auto total = graph.weighted_sum(terms, ones);
  if (!std::isfinite(graph.value(total)[0])) {
    throw NumericError("rank_train_step: non-finite loss in batch starting at ordinal " +
                       std::to_string(batch.first_ordinal));
  }
  nn::GradientTape tape(params_);
  nn::backward(graph, total, tape);
  nn::optimizer_step(params_, tape, config_.learning_rate, config_.optimizer);
  return losses;
}

}  // namespace pfuse::rank
