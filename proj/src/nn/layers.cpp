#include "pfuse/nn/layers.hpp"

#include <algorithm>
#include <cmath>

#include "pfuse/common/error.hpp"

namespace pfuse::nn {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> dense_forward(std::span<const double> input, const Tensor& weights,
                                  std::span<const double> bias, Activation activation) {
  if (input.size() != weights.cols() || bias.size() != weights.rows()) {
    throw ConfigError("dense_forward: weights " + to_string(weights.shape()) + " vs input [" +
                      std::to_string(input.size()) + "] and bias [" +
                      std::to_string(bias.size()) + "]");
  }
  std::vector<double> out(weights.rows());
  for (std::size_t o = 0; o < weights.rows(); ++o) {
    double acc = bias[o];
    const auto w = weights.row(o);
    for (std::size_t i = 0; i < input.size(); ++i) acc += w[i] * input[i];
    switch (activation) {
      case Activation::none:
        break;
      case Activation::relu:
        acc = std::max(acc, 0.0);
        break;
      case Activation::sigmoid:
        acc = sigmoid(acc);
        break;
    }
    out[o] = acc;
  }
  return out;
}

double bce_loss(double p, double label) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw NumericError("bce_loss: probability " + std::to_string(p) + " outside [0,1]");
  }
  const double q = std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
  return -(label * std::log(q) + (1.0 - label) * std::log(1.0 - q));
}

void add_dense(ParameterStore& store, const std::string& prefix, std::size_t in,
               std::size_t out, Rng& rng) {
  store.add_glorot(prefix + ".w", out, in, rng);
  store.add_zeros(prefix + ".b", 1, out);
}

Graph::Var dense(Graph& graph, const ParameterStore& store, Graph::Var x,
                 const std::string& prefix, Activation activation) {
  const auto w = graph.parameter(store, prefix + ".w");
  const auto b = graph.parameter(store, prefix + ".b");
  return graph.activate(graph.linear(x, w, b), activation);
}

std::size_t add_mlp(ParameterStore& store, const std::string& prefix, std::size_t in,
                    std::span<const std::size_t> widths, Rng& rng) {
  std::size_t width = in;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    add_dense(store, prefix + "." + std::to_string(i), width, widths[i], rng);
    width = widths[i];
  }
  return width;
}

Graph::Var mlp(Graph& graph, const ParameterStore& store, Graph::Var x,
               const std::string& prefix, std::size_t depth, Activation activation) {
  for (std::size_t i = 0; i < depth; ++i) {
    x = dense(graph, store, x, prefix + "." + std::to_string(i), activation);
  }
  return x;
}

void add_self_attention(ParameterStore& store, const std::string& prefix, std::size_t dim,
                        Rng& rng) {
  store.add_glorot(prefix + ".query", dim, dim, rng);
  store.add_glorot(prefix + ".key", dim, dim, rng);
  store.add_glorot(prefix + ".value", dim, dim, rng);
}

AttentionOutput self_attention(Graph& graph, const ParameterStore& store, Graph::Var tokens,
                               std::size_t sequence_length, const std::string& prefix) {
  const Graph::Var none;
  const auto q = graph.linear(tokens, graph.parameter(store, prefix + ".query"), none);
  const auto k = graph.linear(tokens, graph.parameter(store, prefix + ".key"), none);
  const auto v = graph.linear(tokens, graph.parameter(store, prefix + ".value"), none);
  const auto attended = graph.block_attention(q, k, v, sequence_length);
  return {graph.add(tokens, attended), attended};
}

SequenceAttention self_attention_forward(const std::vector<std::vector<double>>& tokens,
                                         const ParameterStore& store, const std::string& prefix) {
  if (tokens.empty()) throw ConfigError("self_attention_forward: empty sequence");
  const std::size_t dim = tokens.front().size();
  Tensor flat(tokens.size(), dim);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t].size() != dim) {
      throw ConfigError("self_attention_forward: token " + std::to_string(t) + " has dim " +
                        std::to_string(tokens[t].size()) + ", expected " + std::to_string(dim));
    }
    std::copy(tokens[t].begin(), tokens[t].end(), flat.row(t).begin());
  }
  Graph graph;
  const auto out = self_attention(graph, store, graph.constant(std::move(flat)), tokens.size(),
                                  prefix);
  SequenceAttention result;
  const Tensor& values = graph.value(out.tokens);
  for (std::size_t t = 0; t < values.rows(); ++t) {
    result.tokens.emplace_back(values.row(t).begin(), values.row(t).end());
  }
  result.weights = graph.attention_weights(out.mixing);
  return result;
}

}  // namespace pfuse::nn
