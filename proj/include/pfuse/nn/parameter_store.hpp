#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pfuse/common/rng.hpp"
#include "pfuse/nn/tensor.hpp"

namespace pfuse::nn {

/// First/second moment accumulators kept per parameter entry by Adam.
struct Moments {
  Tensor first;
  Tensor second;
  friend bool operator==(const Moments&, const Moments&) = default;
};

/// Named weights, biases and embedding tables of one model.
///
/// Entry shapes are fixed at creation. The store is a value type: copying it
/// is a snapshot, and restore() writes a snapshot back after checking that
/// the manifest (names and shapes) matches.
class ParameterStore {
 public:
  Tensor& add(const std::string& name, Tensor init);
  /// Glorot-uniform on (-sqrt(6/(rows+cols)), +sqrt(6/(rows+cols))).
  Tensor& add_glorot(const std::string& name, std::size_t rows, std::size_t cols, Rng& rng);
  Tensor& add_zeros(const std::string& name, std::size_t rows, std::size_t cols);

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  const Tensor& get(const std::string& name) const;
  /// Overwrites an entry's values; the shape must match.
  void assign(const std::string& name, const Tensor& values);
  /// Mutable access for optimizers and tests; callers must not reshape.
  Tensor& mutable_entry(const std::string& name);

  const std::map<std::string, Tensor>& entries() const noexcept { return entries_; }
  std::vector<std::string> names() const;
  std::size_t parameter_count() const;

  std::uint64_t step_count() const noexcept { return step_count_; }
  void set_step_count(std::uint64_t n) noexcept { step_count_ = n; }

  std::map<std::string, Moments>& optimizer_state() noexcept { return optimizer_state_; }
  const std::map<std::string, Moments>& optimizer_state() const noexcept {
    return optimizer_state_;
  }

  ParameterStore snapshot() const { return *this; }
  void restore(const ParameterStore& snapshot);

  friend bool operator==(const ParameterStore&, const ParameterStore&) = default;

 private:
  std::map<std::string, Tensor> entries_;
  std::map<std::string, Moments> optimizer_state_;
  std::uint64_t step_count_ = 0;
};

/// Per-parameter gradient accumulator filled by backward().
///
/// A tape tracks entries of one or more stores (names are globally unique by
/// prefix convention). Every accumulation is multiplied by scale().
class GradientTape {
 public:
  GradientTape() = default;
  explicit GradientTape(const ParameterStore& store, double scale = 1.0);

  void track(const ParameterStore& store);
  bool tracks(const std::string& name) const { return grads_.count(name) != 0; }

  Tensor& grad(const std::string& name);
  const Tensor& grad(const std::string& name) const;
  const std::map<std::string, Tensor>& entries() const noexcept { return grads_; }

  double scale() const noexcept { return scale_; }
  void set_scale(double scale);

  /// Zeroes every gradient, keeping the tracked set.
  void reset();

 private:
  std::map<std::string, Tensor> grads_;
  double scale_ = 1.0;
};

}  // namespace pfuse::nn
