#include "pfuse/pantheon/weights.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "pfuse/common/error.hpp"

namespace pfuse::pantheon {

WeightVector::WeightVector(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ContractViolation("weight vector is empty");
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
      throw ContractViolation("objective weight " + std::to_string(i) + " is " +
                              std::to_string(weights_[i]) + "; weights must be strictly positive");
    }
  }
}

WeightVector WeightVector::uniform(std::size_t n) {
  return WeightVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double WeightVector::sum() const noexcept {
  return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

bool WeightVector::is_normalized(double tolerance) const noexcept {
  return std::abs(sum() - 1.0) <= tolerance;
}

WeightVector WeightVector::normalized() const {
  const double total = sum();
  std::vector<double> out(weights_);
  for (double& w : out) w /= total;
  return WeightVector(std::move(out));
}

WeightVector WeightVector::scaled(double factor) const {
  if (!(factor > 0.0)) throw ContractViolation("weight scale factor must be positive");
  std::vector<double> out(weights_);
  for (double& w : out) w *= factor;
  return WeightVector(std::move(out));
}

WeightVector WeightVector::bumped(std::size_t objective, double delta) const {
  if (!(delta > 0.0)) throw ContractViolation("weight adjustment must be positive");
  std::vector<double> out(weights_);
  out.at(objective) += delta;
  return WeightVector(std::move(out));
}

double WeightVector::relative_importance(std::size_t i, std::size_t j) const {
  return weights_.at(i) / weights_.at(j);
}

}  // namespace pfuse::pantheon
