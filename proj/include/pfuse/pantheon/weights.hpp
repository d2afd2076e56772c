#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pfuse::pantheon {

/// Strictly positive per-objective loss weights, indexed by ObjectiveSet order.
class WeightVector {
 public:
  /// Throws ContractViolation if any weight is not a positive finite real.
  explicit WeightVector(std::vector<double> weights);
  static WeightVector uniform(std::size_t n);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_.at(i); }
  std::span<const double> values() const noexcept { return weights_; }

  double sum() const noexcept;
  bool is_normalized(double tolerance = 1e-12) const noexcept;
  WeightVector normalized() const;
  WeightVector scaled(double factor) const;
  /// w[i] += delta (delta > 0), without renormalizing.
  WeightVector bumped(std::size_t objective, double delta) const;
  /// ρ_ij = w_i / w_j.
  double relative_importance(std::size_t i, std::size_t j) const;

  friend bool operator==(const WeightVector&, const WeightVector&) = default;

 private:
  std::vector<double> weights_;
};

}  // namespace pfuse::pantheon
