#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pfuse/nn/parameter_store.hpp"
#include "pfuse/nn/tensor.hpp"

namespace pfuse::nn {

/// Predictions are clamped to [kProbEpsilon, 1 - kProbEpsilon] before log.
inline constexpr double kProbEpsilon = 1e-7;

enum class Activation { none, relu, sigmoid };

/// Forward record of one batched computation over a fixed operator set.
///
/// Every operator evaluates eagerly and appends a node; backward() walks the
/// nodes in reverse and accumulates parameter gradients into a GradientTape.
/// A graph can be backpropagated once. Parameter leaves reference the store
/// they were read from, so the store must outlive the graph and must not be
/// modified until backward() has run.
class Graph {
 public:
  struct Var {
    std::size_t id = std::numeric_limits<std::size_t>::max();
    bool valid() const noexcept { return id != std::numeric_limits<std::size_t>::max(); }
  };

  Var constant(Tensor value);
  Var parameter(const ParameterStore& store, const std::string& name);
  /// Rows of an embedding table; gradients scatter back into those rows.
  Var gather_rows(const ParameterStore& store, const std::string& name,
                  std::vector<std::size_t> rows);

  /// x·Wᵀ + b with x: B×in, W: out×in, b: 1×out. `bias` may be an invalid Var.
  Var linear(Var x, Var weight, Var bias);
  Var activate(Var x, Activation activation);
  Var relu(Var x);
  Var sigmoid(Var x);
  Var softmax_rows(Var x);
  Var add(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var x, double factor);
  Var sum(Var x);
  Var concat_cols(std::span<const Var> parts);
  Var slice_cols(Var x, std::size_t begin, std::size_t count);
  /// out[b] = Σ_j gates[b, j] · experts[j][b]
  Var mixture(Var gates, std::span<const Var> experts);
  Var reshape(Var x, std::size_t rows, std::size_t cols);
  /// Scaled dot-product attention applied independently to consecutive
  /// blocks of `block` rows (one block per sample).
  Var block_attention(Var queries, Var keys, Var values, std::size_t block);
  /// Row-softmax weights computed by a block_attention node, (B·T)×T.
  const Tensor& attention_weights(Var attention) const;
  /// Mean of each consecutive block of `block` rows.
  Var block_mean(Var x, std::size_t block);
  /// Forward identity; no gradient flows to the input.
  Var stop_gradient(Var x);
  /// Mean binary cross-entropy of B probabilities against B labels.
  Var bce_mean(Var probs, std::span<const double> labels);
  /// Σ_i weights[i] · scalars[i] over 1×1 nodes.
  Var weighted_sum(std::span<const Var> scalars, std::span<const double> weights);

  const Tensor& value(Var v) const;
  std::size_t node_count() const noexcept { return nodes_.size(); }
  bool consumed() const noexcept { return consumed_; }

 private:
  enum class Op {
    constant,
    parameter,
    gather,
    linear,
    relu,
    sigmoid,
    softmax,
    add,
    mul,
    scale,
    sum,
    concat,
    slice,
    mixture,
    reshape,
    attention,
    block_mean,
    stop_gradient,
    bce_mean,
    weighted_sum,
  };

  struct Node {
    Op op = Op::constant;
    std::vector<std::size_t> inputs;
    Tensor value;
    const Tensor* external = nullptr;
    std::string name;
    std::vector<std::size_t> indices;
    std::vector<double> coeffs;
    double factor = 0.0;
    std::size_t offset = 0;
    std::size_t extent = 0;
    Tensor aux;
    bool requires_grad = false;
  };

  const Node& node(Var v) const;
  Var push(Node n);

  std::vector<Node> nodes_;
  bool consumed_ = false;

  friend void backward(Graph& graph, Var loss, GradientTape& tape);
};

/// Accumulates d(loss)/d(parameter) · tape.scale() into `tape` for every
/// parameter reachable from the 1×1 `loss` node without crossing a
/// stop_gradient. Throws UsageError on a second call for the same graph or
/// when a gradient reaches a parameter the tape does not track.
void backward(Graph& graph, Graph::Var loss, GradientTape& tape);

}  // namespace pfuse::nn
