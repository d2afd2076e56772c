#include "pfuse/nn/optimizer.hpp"

#include <cmath>
#include <string>

#include "pfuse/common/error.hpp"

namespace pfuse::nn {

OptimizerMethod parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerMethod::sgd;
  if (name == "adam") return OptimizerMethod::adam;
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

std::string_view to_string(OptimizerMethod method) {
  return method == OptimizerMethod::sgd ? "sgd" : "adam";
}

void optimizer_step(ParameterStore& params, const GradientTape& tape, double learning_rate,
                    OptimizerMethod method) {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be a positive finite real");
  }
  for (const auto& [name, value] : params.entries()) {
    const Tensor& g = tape.grad(name);
    if (g.shape() != value.shape()) {
      throw ConfigError("gradient for '" + name + "' has shape " + to_string(g.shape()) +
                        ", parameter has " + to_string(value.shape()));
    }
    if (!g.all_finite()) throw NumericError("non-finite gradient for parameter '" + name + "'");
  }

  const std::uint64_t step = params.step_count() + 1;
  if (method == OptimizerMethod::sgd) {
    for (const auto& name : params.names()) {
      Tensor& theta = params.mutable_entry(name);
      const Tensor& g = tape.grad(name);
      for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= learning_rate * g[i];
    }
  } else {
    const double correction1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
    const double correction2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
    auto& state = params.optimizer_state();
    for (const auto& name : params.names()) {
      Tensor& theta = params.mutable_entry(name);
      const Tensor& g = tape.grad(name);
      auto [it, inserted] = state.try_emplace(name);
      Moments& m = it->second;
      if (inserted) {
        m.first = Tensor(theta.rows(), theta.cols());
        m.second = Tensor(theta.rows(), theta.cols());
      }
      for (std::size_t i = 0; i < theta.size(); ++i) {
        m.first[i] = kAdamBeta1 * m.first[i] + (1.0 - kAdamBeta1) * g[i];
        m.second[i] = kAdamBeta2 * m.second[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
        const double m_hat = m.first[i] / correction1;
        const double v_hat = m.second[i] / correction2;
        theta[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
      }
    }
  }
  params.set_step_count(step);
}

}  // namespace pfuse::nn
