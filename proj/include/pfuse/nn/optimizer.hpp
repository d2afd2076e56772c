#pragma once

#include <string_view>

#include "pfuse/nn/parameter_store.hpp"

namespace pfuse::nn {

enum class OptimizerMethod { sgd, adam };

OptimizerMethod parse_optimizer(std::string_view name);
std::string_view to_string(OptimizerMethod method);

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

/// Applies one update to every entry of `params` using the matching tape
/// gradients and increments the step count. All gradients are checked for
/// finiteness before any parameter is touched.
void optimizer_step(ParameterStore& params, const GradientTape& tape, double learning_rate,
                    OptimizerMethod method);

}  // namespace pfuse::nn
