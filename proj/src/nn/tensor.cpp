#include "pfuse/nn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "pfuse/common/error.hpp"

namespace pfuse::nn {

std::string to_string(Shape shape) {
  return "[" + std::to_string(shape.rows) + "x" + std::to_string(shape.cols) + "]";
}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows_ * cols_) {
    throw ConfigError("tensor of shape " + to_string({rows_, cols_}) + " given " +
                      std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::row_vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor(1, n, std::move(values));
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::reshape(std::size_t rows, std::size_t cols) {
  if (rows * cols != data_.size()) {
    throw ConfigError("cannot reshape " + to_string(shape()) + " to " +
                      to_string({rows, cols}));
  }
  rows_ = rows;
  cols_ = cols;
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace pfuse::nn
