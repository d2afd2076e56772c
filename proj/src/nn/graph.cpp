#include "pfuse/nn/graph.hpp"

#include <algorithm>
#include <cmath>

#include "pfuse/common/error.hpp"

namespace pfuse::nn {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ConfigError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                      to_string(b.shape()));
  }
}

void accumulate(Tensor& dst, const Tensor& src) {
  double* d = dst.data();
  const double* s = src.data();
  for (std::size_t i = 0; i < src.size(); ++i) d[i] += s[i];
}

Tensor& grad_slot(std::vector<Tensor>& grads, std::size_t id, Shape shape) {
  Tensor& g = grads[id];
  if (g.empty() && shape.size() > 0) g = Tensor(shape.rows, shape.cols);
  return g;
}

double clamp_prob(double p) { return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon); }

}  // namespace

const Graph::Node& Graph::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) throw UsageError("invalid graph variable");
  return nodes_[v.id];
}

Graph::Var Graph::push(Node n) {
  switch (n.op) {
    case Op::parameter:
    case Op::gather:
      n.requires_grad = true;
      break;
    case Op::constant:
    case Op::stop_gradient:
      n.requires_grad = false;
      break;
    default:
      n.requires_grad = std::any_of(n.inputs.begin(), n.inputs.end(),
                                    [&](std::size_t i) { return nodes_[i].requires_grad; });
  }
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

const Tensor& Graph::value(Var v) const {
  const Node& n = node(v);
  return n.external ? *n.external : n.value;
}

Graph::Var Graph::constant(Tensor value) {
  Node n;
  n.op = Op::constant;
  n.value = std::move(value);
  return push(std::move(n));
}

Graph::Var Graph::parameter(const ParameterStore& store, const std::string& name) {
  Node n;
  n.op = Op::parameter;
  n.external = &store.get(name);
  n.name = name;
  return push(std::move(n));
}

Graph::Var Graph::gather_rows(const ParameterStore& store, const std::string& name,
                              std::vector<std::size_t> rows) {
  const Tensor& table = store.get(name);
  Node n;
  n.op = Op::gather;
  n.name = name;
  n.value = Tensor(rows.size(), table.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= table.rows()) {
      throw ConfigError("gather row " + std::to_string(rows[r]) + " outside table '" + name +
                        "' of shape " + to_string(table.shape()));
    }
    std::copy_n(table.row(rows[r]).data(), table.cols(), n.value.row(r).data());
  }
  n.indices = std::move(rows);
  return push(std::move(n));
}

Graph::Var Graph::linear(Var x, Var weight, Var bias) {
  const Tensor& in = value(x);
  const Tensor& w = value(weight);
  if (in.cols() != w.cols()) {
    throw ConfigError("linear: input " + to_string(in.shape()) + " does not match weights " +
                      to_string(w.shape()));
  }
  Node n;
  n.op = Op::linear;
  n.inputs = {x.id, weight.id};
  n.value = Tensor(in.rows(), w.rows());
  const Tensor* b = nullptr;
  if (bias.valid()) {
    b = &value(bias);
    if (b->rows() != 1 || b->cols() != w.rows()) {
      throw ConfigError("linear: bias " + to_string(b->shape()) + " does not match weights " +
                        to_string(w.shape()));
    }
    n.inputs.push_back(bias.id);
  }
  const std::size_t in_dim = w.cols();
  for (std::size_t r = 0; r < in.rows(); ++r) {
    const double* xr = in.row(r).data();
    double* yr = n.value.row(r).data();
    for (std::size_t o = 0; o < w.rows(); ++o) {
      const double* wr = w.row(o).data();
      double acc = b ? (*b)[o] : 0.0;
      for (std::size_t i = 0; i < in_dim; ++i) acc += wr[i] * xr[i];
      yr[o] = acc;
    }
  }
  return push(std::move(n));
}

Graph::Var Graph::activate(Var x, Activation activation) {
  switch (activation) {
    case Activation::none:
      return x;
    case Activation::relu:
      return relu(x);
    case Activation::sigmoid:
      return sigmoid(x);
  }
  return x;
}

Graph::Var Graph::relu(Var x) {
  Node n;
  n.op = Op::relu;
  n.inputs = {x.id};
  n.value = value(x);
  for (double& v : n.value.values()) v = v > 0.0 ? v : 0.0;
  return push(std::move(n));
}

Graph::Var Graph::sigmoid(Var x) {
  Node n;
  n.op = Op::sigmoid;
  n.inputs = {x.id};
  n.value = value(x);
  for (double& v : n.value.values()) v = 1.0 / (1.0 + std::exp(-v));
  return push(std::move(n));
}

Graph::Var Graph::softmax_rows(Var x) {
  Node n;
  n.op = Op::softmax;
  n.inputs = {x.id};
  n.value = value(x);
  for (std::size_t r = 0; r < n.value.rows(); ++r) {
    auto row = n.value.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      total += v;
    }
    for (double& v : row) v /= total;
  }
  return push(std::move(n));
}

Graph::Var Graph::add(Var a, Var b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  require_same_shape(va, vb, "add");
  Node n;
  n.op = Op::add;
  n.inputs = {a.id, b.id};
  n.value = va;
  accumulate(n.value, vb);
  return push(std::move(n));
}

Graph::Var Graph::mul(Var a, Var b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  require_same_shape(va, vb, "mul");
  Node n;
  n.op = Op::mul;
  n.inputs = {a.id, b.id};
  n.value = va;
  for (std::size_t i = 0; i < vb.size(); ++i) n.value[i] *= vb[i];
  return push(std::move(n));
}

Graph::Var Graph::scale(Var x, double factor) {
  Node n;
  n.op = Op::scale;
  n.inputs = {x.id};
  n.factor = factor;
  n.value = value(x);
  for (double& v : n.value.values()) v *= factor;
  return push(std::move(n));
}

Graph::Var Graph::sum(Var x) {
  double total = 0.0;
  for (double v : value(x).values()) total += v;
  Node n;
  n.op = Op::sum;
  n.inputs = {x.id};
  n.value = Tensor(1, 1, total);
  return push(std::move(n));
}

Graph::Var Graph::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ConfigError("concat_cols: no inputs");
  const std::size_t rows = value(parts.front()).rows();
  std::size_t cols = 0;
  for (Var p : parts) {
    const Tensor& t = value(p);
    if (t.rows() != rows) {
      throw ConfigError("concat_cols: row mismatch " + to_string(value(parts.front()).shape()) +
                        " vs " + to_string(t.shape()));
    }
    cols += t.cols();
  }
  Node n;
  n.op = Op::concat;
  n.value = Tensor(rows, cols);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Tensor& t = value(p);
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(t.row(r).data(), t.cols(), n.value.row(r).data() + offset);
    }
    offset += t.cols();
    n.inputs.push_back(p.id);
  }
  return push(std::move(n));
}

Graph::Var Graph::slice_cols(Var x, std::size_t begin, std::size_t count) {
  const Tensor& t = value(x);
  if (begin + count > t.cols()) {
    throw ConfigError("slice_cols: [" + std::to_string(begin) + ", " +
                      std::to_string(begin + count) + ") outside " + to_string(t.shape()));
  }
  Node n;
  n.op = Op::slice;
  n.inputs = {x.id};
  n.offset = begin;
  n.extent = count;
  n.value = Tensor(t.rows(), count);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    std::copy_n(t.row(r).data() + begin, count, n.value.row(r).data());
  }
  return push(std::move(n));
}

Graph::Var Graph::mixture(Var gates, std::span<const Var> experts) {
  const Tensor& g = value(gates);
  if (g.cols() != experts.size()) {
    throw ConfigError("mixture: gates " + to_string(g.shape()) + " for " +
                      std::to_string(experts.size()) + " experts");
  }
  const Tensor& first = value(experts.front());
  Node n;
  n.op = Op::mixture;
  n.inputs = {gates.id};
  n.value = Tensor(first.rows(), first.cols());
  for (std::size_t j = 0; j < experts.size(); ++j) {
    const Tensor& e = value(experts[j]);
    require_same_shape(first, e, "mixture");
    if (e.rows() != g.rows()) {
      throw ConfigError("mixture: expert " + to_string(e.shape()) + " vs gates " +
                        to_string(g.shape()));
    }
    for (std::size_t r = 0; r < e.rows(); ++r) {
      const double gate = g(r, j);
      const double* er = e.row(r).data();
      double* out = n.value.row(r).data();
      for (std::size_t c = 0; c < e.cols(); ++c) out[c] += gate * er[c];
    }
    n.inputs.push_back(experts[j].id);
  }
  return push(std::move(n));
}

Graph::Var Graph::reshape(Var x, std::size_t rows, std::size_t cols) {
  Node n;
  n.op = Op::reshape;
  n.inputs = {x.id};
  n.value = value(x);
  n.value.reshape(rows, cols);
  return push(std::move(n));
}

Graph::Var Graph::block_attention(Var queries, Var keys, Var values, std::size_t block) {
  const Tensor& q = value(queries);
  const Tensor& k = value(keys);
  const Tensor& v = value(values);
  require_same_shape(q, k, "block_attention");
  if (v.rows() != q.rows()) {
    throw ConfigError("block_attention: values " + to_string(v.shape()) + " vs queries " +
                      to_string(q.shape()));
  }
  if (block == 0 || q.rows() % block != 0) {
    throw ConfigError("block_attention: " + std::to_string(q.rows()) +
                      " rows not divisible into blocks of " + std::to_string(block));
  }
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  Node n;
  n.op = Op::attention;
  n.inputs = {queries.id, keys.id, values.id};
  n.extent = block;
  n.aux = Tensor(q.rows(), block);
  n.value = Tensor(v.rows(), v.cols());
  for (std::size_t base = 0; base < q.rows(); base += block) {
    for (std::size_t i = 0; i < block; ++i) {
      auto weights = n.aux.row(base + i);
      const double* qi = q.row(base + i).data();
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < block; ++j) {
        const double* kj = k.row(base + j).data();
        double s = 0.0;
        for (std::size_t c = 0; c < q.cols(); ++c) s += qi[c] * kj[c];
        weights[j] = s * inv_sqrt;
        mx = std::max(mx, weights[j]);
      }
      double total = 0.0;
      for (double& w : weights) {
        w = std::exp(w - mx);
        total += w;
      }
      for (double& w : weights) w /= total;
      double* out = n.value.row(base + i).data();
      for (std::size_t j = 0; j < block; ++j) {
        const double* vj = v.row(base + j).data();
        for (std::size_t c = 0; c < v.cols(); ++c) out[c] += weights[j] * vj[c];
      }
    }
  }
  return push(std::move(n));
}

const Tensor& Graph::attention_weights(Var attention) const {
  const Node& n = node(attention);
  if (n.op != Op::attention) throw UsageError("attention_weights: not an attention node");
  return n.aux;
}

Graph::Var Graph::block_mean(Var x, std::size_t block) {
  const Tensor& t = value(x);
  if (block == 0 || t.rows() % block != 0) {
    throw ConfigError("block_mean: " + std::to_string(t.rows()) +
                      " rows not divisible into blocks of " + std::to_string(block));
  }
  Node n;
  n.op = Op::block_mean;
  n.inputs = {x.id};
  n.extent = block;
  n.value = Tensor(t.rows() / block, t.cols());
  const double inv = 1.0 / static_cast<double>(block);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const double* src = t.row(r).data();
    double* dst = n.value.row(r / block).data();
    for (std::size_t c = 0; c < t.cols(); ++c) dst[c] += src[c] * inv;
  }
  return push(std::move(n));
}

Graph::Var Graph::stop_gradient(Var x) {
  Node n;
  n.op = Op::stop_gradient;
  n.inputs = {x.id};
  n.value = value(x);
  return push(std::move(n));
}

Graph::Var Graph::bce_mean(Var probs, std::span<const double> labels) {
  const Tensor& p = value(probs);
  if (p.size() != labels.size() || p.empty()) {
    throw ConfigError("bce_mean: " + std::to_string(p.size()) + " probabilities vs " +
                      std::to_string(labels.size()) + " labels");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0 && p[i] <= 1.0)) {
      throw NumericError("bce_mean: probability " + std::to_string(p[i]) + " outside [0,1]");
    }
    const double q = clamp_prob(p[i]);
    total -= labels[i] * std::log(q) + (1.0 - labels[i]) * std::log(1.0 - q);
  }
  Node n;
  n.op = Op::bce_mean;
  n.inputs = {probs.id};
  n.coeffs.assign(labels.begin(), labels.end());
  n.value = Tensor(1, 1, total / static_cast<double>(p.size()));
  return push(std::move(n));
}

Graph::Var Graph::weighted_sum(std::span<const Var> scalars, std::span<const double> weights) {
  if (scalars.size() != weights.size() || scalars.empty()) {
    throw ConfigError("weighted_sum: " + std::to_string(scalars.size()) + " terms vs " +
                      std::to_string(weights.size()) + " weights");
  }
  Node n;
  n.op = Op::weighted_sum;
  double total = 0.0;
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    const Tensor& t = value(scalars[i]);
    if (t.size() != 1) throw ConfigError("weighted_sum: term is " + to_string(t.shape()));
    total += weights[i] * t[0];
    n.inputs.push_back(scalars[i].id);
  }
  n.coeffs.assign(weights.begin(), weights.end());
  n.value = Tensor(1, 1, total);
  return push(std::move(n));
}

void backward(Graph& graph, Graph::Var loss, GradientTape& tape) {
  if (graph.consumed_) throw UsageError("backward called twice on the same graph");
  const Tensor& loss_value = graph.value(loss);
  if (loss_value.size() != 1) {
    throw UsageError("backward requires a scalar loss, got " + to_string(loss_value.shape()));
  }
  graph.consumed_ = true;

  auto& nodes = graph.nodes_;
  std::vector<Tensor> grads(nodes.size());
  grads[loss.id] = Tensor(1, 1, 1.0);
  const double tape_scale = tape.scale();

  for (std::size_t id = loss.id + 1; id-- > 0;) {
    if (grads[id].empty() || !nodes[id].requires_grad) continue;
    const Tensor& g = grads[id];
    Graph::Node& n = nodes[id];
    auto in_value = [&](std::size_t k) -> const Tensor& {
      const Graph::Node& src = nodes[n.inputs[k]];
      return src.external ? *src.external : src.value;
    };
    auto needs = [&](std::size_t k) { return nodes[n.inputs[k]].requires_grad; };
    auto in_grad = [&](std::size_t k) -> Tensor& {
      return grad_slot(grads, n.inputs[k], in_value(k).shape());
    };

    switch (n.op) {
      case Graph::Op::constant:
      case Graph::Op::stop_gradient:
        break;
      case Graph::Op::parameter: {
        if (!tape.tracks(n.name)) {
          throw UsageError("gradient reaches parameter '" + n.name +
                           "' which the tape does not track");
        }
        Tensor& dst = tape.grad(n.name);
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += tape_scale * g[i];
        break;
      }
      case Graph::Op::gather: {
        if (!tape.tracks(n.name)) {
          throw UsageError("gradient reaches parameter '" + n.name +
                           "' which the tape does not track");
        }
        Tensor& dst = tape.grad(n.name);
        for (std::size_t r = 0; r < n.indices.size(); ++r) {
          double* row = dst.row(n.indices[r]).data();
          const double* src = g.row(r).data();
          for (std::size_t c = 0; c < g.cols(); ++c) row[c] += tape_scale * src[c];
        }
        break;
      }
      case Graph::Op::linear: {
        const Tensor& x = in_value(0);
        const Tensor& w = in_value(1);
        if (needs(0)) {
          Tensor& dx = in_grad(0);
          for (std::size_t r = 0; r < x.rows(); ++r) {
            const double* gr = g.row(r).data();
            double* dxr = dx.row(r).data();
            for (std::size_t o = 0; o < w.rows(); ++o) {
              const double go = gr[o];
              if (go == 0.0) continue;
              const double* wr = w.row(o).data();
              for (std::size_t i = 0; i < w.cols(); ++i) dxr[i] += go * wr[i];
            }
          }
        }
        if (needs(1)) {
          Tensor& dw = in_grad(1);
          for (std::size_t r = 0; r < x.rows(); ++r) {
            const double* gr = g.row(r).data();
            const double* xr = x.row(r).data();
            for (std::size_t o = 0; o < w.rows(); ++o) {
              const double go = gr[o];
              if (go == 0.0) continue;
              double* dwr = dw.row(o).data();
              for (std::size_t i = 0; i < w.cols(); ++i) dwr[i] += go * xr[i];
            }
          }
        }
        if (n.inputs.size() == 3 && needs(2)) {
          Tensor& db = in_grad(2);
          for (std::size_t r = 0; r < g.rows(); ++r) {
            for (std::size_t o = 0; o < g.cols(); ++o) db[o] += g(r, o);
          }
        }
        break;
      }
      case Graph::Op::relu: {
        Tensor& dx = in_grad(0);
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (n.value[i] > 0.0) dx[i] += g[i];
        }
        break;
      }
      case Graph::Op::sigmoid: {
        Tensor& dx = in_grad(0);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double y = n.value[i];
          dx[i] += g[i] * y * (1.0 - y);
        }
        break;
      }
      case Graph::Op::softmax: {
        Tensor& dx = in_grad(0);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          auto y = n.value.row(r);
          auto gy = g.row(r);
          double dot = 0.0;
          for (std::size_t c = 0; c < y.size(); ++c) dot += gy[c] * y[c];
          auto dxr = dx.row(r);
          for (std::size_t c = 0; c < y.size(); ++c) dxr[c] += y[c] * (gy[c] - dot);
        }
        break;
      }
      case Graph::Op::add: {
        accumulate(in_grad(0), g);
        accumulate(in_grad(1), g);
        break;
      }
      case Graph::Op::mul: {
        const Tensor& a = in_value(0);
        const Tensor& b = in_value(1);
        Tensor& da = in_grad(0);
        Tensor& db = in_grad(1);
        for (std::size_t i = 0; i < g.size(); ++i) {
          da[i] += g[i] * b[i];
          db[i] += g[i] * a[i];
        }
        break;
      }
      case Graph::Op::scale: {
        Tensor& dx = in_grad(0);
        for (std::size_t i = 0; i < g.size(); ++i) dx[i] += n.factor * g[i];
        break;
      }
      case Graph::Op::sum: {
        Tensor& dx = in_grad(0);
        for (double& v : dx.values()) v += g[0];
        break;
      }
      case Graph::Op::concat: {
        std::size_t offset = 0;
        for (std::size_t k = 0; k < n.inputs.size(); ++k) {
          Tensor& dx = in_grad(k);
          for (std::size_t r = 0; r < g.rows(); ++r) {
            const double* src = g.row(r).data() + offset;
            double* dst = dx.row(r).data();
            for (std::size_t c = 0; c < dx.cols(); ++c) dst[c] += src[c];
          }
          offset += dx.cols();
        }
        break;
      }
      case Graph::Op::slice: {
        Tensor& dx = in_grad(0);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          const double* src = g.row(r).data();
          double* dst = dx.row(r).data() + n.offset;
          for (std::size_t c = 0; c < n.extent; ++c) dst[c] += src[c];
        }
        break;
      }
      case Graph::Op::mixture: {
        const Tensor& gates = in_value(0);
        Tensor& dgates = in_grad(0);
        for (std::size_t j = 1; j < n.inputs.size(); ++j) {
          const Tensor& e = in_value(j);
          Tensor& de = in_grad(j);
          for (std::size_t r = 0; r < g.rows(); ++r) {
            const double gate = gates(r, j - 1);
            const double* gr = g.row(r).data();
            const double* er = e.row(r).data();
            double* der = de.row(r).data();
            double dot = 0.0;
            for (std::size_t c = 0; c < g.cols(); ++c) {
              dot += gr[c] * er[c];
              der[c] += gate * gr[c];
            }
            dgates(r, j - 1) += dot;
          }
        }
        break;
      }
      case Graph::Op::reshape: {
        Tensor& dx = in_grad(0);
        for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
        break;
      }
      case Graph::Op::attention: {
        const Tensor& q = in_value(0);
        const Tensor& k = in_value(1);
        const Tensor& v = in_value(2);
        Tensor& dq = in_grad(0);
        Tensor& dk = in_grad(1);
        Tensor& dv = in_grad(2);
        const std::size_t block = n.extent;
        const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(q.cols()));
        std::vector<double> dweights(block);
        for (std::size_t base = 0; base < q.rows(); base += block) {
          for (std::size_t i = 0; i < block; ++i) {
            auto a = n.aux.row(base + i);
            const double* gi = g.row(base + i).data();
            double dot = 0.0;
            for (std::size_t j = 0; j < block; ++j) {
              const double* vj = v.row(base + j).data();
              double* dvj = dv.row(base + j).data();
              double s = 0.0;
              for (std::size_t c = 0; c < v.cols(); ++c) {
                s += gi[c] * vj[c];
                dvj[c] += a[j] * gi[c];
              }
              dweights[j] = s;
              dot += s * a[j];
            }
            const double* qi = q.row(base + i).data();
            double* dqi = dq.row(base + i).data();
            for (std::size_t j = 0; j < block; ++j) {
              const double dscore = a[j] * (dweights[j] - dot) * inv_sqrt;
              if (dscore == 0.0) continue;
              const double* kj = k.row(base + j).data();
              double* dkj = dk.row(base + j).data();
              for (std::size_t c = 0; c < q.cols(); ++c) {
                dqi[c] += dscore * kj[c];
                dkj[c] += dscore * qi[c];
              }
            }
          }
        }
        break;
      }
      case Graph::Op::block_mean: {
        Tensor& dx = in_grad(0);
        const double inv = 1.0 / static_cast<double>(n.extent);
        for (std::size_t r = 0; r < dx.rows(); ++r) {
          const double* src = g.row(r / n.extent).data();
          double* dst = dx.row(r).data();
          for (std::size_t c = 0; c < dx.cols(); ++c) dst[c] += src[c] * inv;
        }
        break;
      }
      case Graph::Op::bce_mean: {
        const Tensor& p = in_value(0);
        Tensor& dp = in_grad(0);
        const double inv_n = 1.0 / static_cast<double>(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
          // The clamp is flat outside (eps, 1 - eps).
          if (p[i] <= kProbEpsilon || p[i] >= 1.0 - kProbEpsilon) continue;
          const double y = n.coeffs[i];
          dp[i] += g[0] * inv_n * (p[i] - y) / (p[i] * (1.0 - p[i]));
        }
        break;
      }
      case Graph::Op::weighted_sum: {
        for (std::size_t k = 0; k < n.inputs.size(); ++k) in_grad(k)[0] += n.coeffs[k] * g[0];
        break;
      }
    }
  }
}

}  // namespace pfuse::nn
