#include "pfuse/nn/parameter_store.hpp"

#include <cmath>

#include "pfuse/common/error.hpp"

namespace pfuse::nn {

Tensor& ParameterStore::add(const std::string& name, Tensor init) {
  if (contains(name)) throw ConfigError("duplicate parameter entry '" + name + "'");
  return entries_.emplace(name, std::move(init)).first->second;
}

Tensor& ParameterStore::add_glorot(const std::string& name, std::size_t rows, std::size_t cols,
                                   Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor t(rows, cols);
  for (double& v : t.values()) v = rng.uniform(-limit, limit);
  return add(name, std::move(t));
}

Tensor& ParameterStore::add_zeros(const std::string& name, std::size_t rows, std::size_t cols) {
  return add(name, Tensor(rows, cols));
}

const Tensor& ParameterStore::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError("unknown parameter entry '" + name + "'");
  return it->second;
}

Tensor& ParameterStore::mutable_entry(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError("unknown parameter entry '" + name + "'");
  return it->second;
}

void ParameterStore::assign(const std::string& name, const Tensor& values) {
  Tensor& dst = mutable_entry(name);
  if (dst.shape() != values.shape()) {
    throw ConfigError("parameter '" + name + "' has shape " + to_string(dst.shape()) +
                      ", cannot assign " + to_string(values.shape()));
  }
  dst = values;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

std::size_t ParameterStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : entries_) n += t.size();
  return n;
}

void ParameterStore::restore(const ParameterStore& snapshot) {
  if (snapshot.entries_.size() != entries_.size()) {
    throw ConfigError("snapshot manifest has " + std::to_string(snapshot.entries_.size()) +
                      " entries, store has " + std::to_string(entries_.size()));
  }
  for (const auto& [name, t] : snapshot.entries_) {
    const Tensor& mine = get(name);
    if (mine.shape() != t.shape()) {
      throw ConfigError("snapshot entry '" + name + "' has shape " + to_string(t.shape()) +
                        ", store expects " + to_string(mine.shape()));
    }
  }
  *this = snapshot;
}

GradientTape::GradientTape(const ParameterStore& store, double scale) {
  set_scale(scale);
  track(store);
}

void GradientTape::track(const ParameterStore& store) {
  for (const auto& [name, t] : store.entries()) {
    if (tracks(name)) throw ConfigError("tape already tracks '" + name + "'");
    grads_.emplace(name, Tensor(t.rows(), t.cols()));
  }
}

Tensor& GradientTape::grad(const std::string& name) {
  auto it = grads_.find(name);
  if (it == grads_.end()) throw UsageError("tape does not track '" + name + "'");
  return it->second;
}

const Tensor& GradientTape::grad(const std::string& name) const {
  auto it = grads_.find(name);
  if (it == grads_.end()) throw UsageError("tape does not track '" + name + "'");
  return it->second;
}

void GradientTape::set_scale(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ConfigError("gradient tape scale must be a positive finite real");
  }
  scale_ = scale;
}

void GradientTape::reset() {
  for (auto& [_, g] : grads_) g.fill(0.0);
}

}  // namespace pfuse::nn
