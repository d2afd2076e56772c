#pragma once

#include <span>
#include <string>
#include <vector>

#include "pfuse/common/rng.hpp"
#include "pfuse/nn/graph.hpp"
#include "pfuse/nn/parameter_store.hpp"

namespace pfuse::nn {

double sigmoid(double x);

/// activation(W·input + b) for a single input vector; W is out×in.
std::vector<double> dense_forward(std::span<const double> input, const Tensor& weights,
                                  std::span<const double> bias, Activation activation);

/// Standard binary cross-entropy on a clamped probability.
/// Throws NumericError when p is outside [0, 1] or NaN.
double bce_loss(double p, double label);

/// Registers `<prefix>.w` (out×in, Glorot) and `<prefix>.b` (1×out, zeros).
void add_dense(ParameterStore& store, const std::string& prefix, std::size_t in,
               std::size_t out, Rng& rng);
Graph::Var dense(Graph& graph, const ParameterStore& store, Graph::Var x,
                 const std::string& prefix, Activation activation);

/// Stacked dense layers `<prefix>.0`, `<prefix>.1`, ... with the given widths.
/// Returns the output width.
std::size_t add_mlp(ParameterStore& store, const std::string& prefix, std::size_t in,
                    std::span<const std::size_t> widths, Rng& rng);
Graph::Var mlp(Graph& graph, const ParameterStore& store, Graph::Var x,
               const std::string& prefix, std::size_t depth, Activation activation);

/// Registers `<prefix>.query`, `<prefix>.key`, `<prefix>.value`, each d×d.
void add_self_attention(ParameterStore& store, const std::string& prefix, std::size_t dim,
                        Rng& rng);

struct AttentionOutput {
  Graph::Var tokens;   ///< (B·T)×d, input plus attended values
  Graph::Var mixing;   ///< attention node; see Graph::attention_weights
};

/// Single-head scaled dot-product self-attention with a residual connection
/// over (B·T)×d tokens grouped in blocks of `sequence_length` rows.
AttentionOutput self_attention(Graph& graph, const ParameterStore& store, Graph::Var tokens,
                               std::size_t sequence_length, const std::string& prefix);

/// Convenience single-sequence form: returns the T output tokens and the
/// T×T attention matrix.
struct SequenceAttention {
  std::vector<std::vector<double>> tokens;
  Tensor weights;
};
SequenceAttention self_attention_forward(const std::vector<std::vector<double>>& tokens,
                                         const ParameterStore& store, const std::string& prefix);

}  // namespace pfuse::nn
