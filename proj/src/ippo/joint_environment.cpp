#include "pfuse/ippo/joint_environment.hpp"

#include <algorithm>

#include "pfuse/common/error.hpp"

namespace pfuse::ippo {

WindowPolicy parse_window_policy(std::string_view name) {
  if (name == "fixed") return WindowPolicy::fixed;
  if (name == "rolling") return WindowPolicy::rolling;
  throw ConfigError("unknown window policy '" + std::string(name) +
                    "' (expected fixed or rolling)");
}

std::string_view to_string(WindowPolicy policy) {
  return policy == WindowPolicy::fixed ? "fixed" : "rolling";
}

std::vector<EvalWindow> make_windows(const std::vector<data::ImpressionLog>& eval,
                                     WindowPolicy policy, std::size_t window_size) {
  if (eval.empty()) throw ConfigError("evaluation split is empty");
  std::vector<EvalWindow> windows;
  if (policy == WindowPolicy::fixed) {
    windows.push_back({"eval", eval, metrics::UserGroups(eval)});
    return windows;
  }
  if (window_size == 0) throw ConfigError("rolling windows need window_size >= 1");
  for (std::size_t begin = 0; begin + window_size <= eval.size(); begin += window_size) {
    std::vector<data::ImpressionLog> slice(eval.begin() + static_cast<std::ptrdiff_t>(begin),
                                           eval.begin() +
                                               static_cast<std::ptrdiff_t>(begin + window_size));
    metrics::UserGroups groups(slice);
    windows.push_back({"eval-" + std::to_string(windows.size()), std::move(slice),
                       std::move(groups)});
  }
  if (windows.empty()) {
    throw ConfigError("window_size " + std::to_string(window_size) + " exceeds the " +
                      std::to_string(eval.size()) + "-row evaluation split");
  }
  return windows;
}

JointEnvironment::JointEnvironment(pantheon::JointModel& reference, data::StreamCursor& stream,
                                   std::vector<EvalWindow> windows, std::size_t batch_size,
                                   std::size_t threads)
    : reference_(reference),
      base_(reference),
      stream_(stream),
      windows_(std::move(windows)),
      batch_size_(batch_size),
      threads_(threads) {
  if (windows_.empty()) throw ConfigError("joint environment needs an evaluation window");
  if (batch_size_ == 0) throw ConfigError("batch_size must be >= 1");
}

std::size_t JointEnvironment::objective_count() const {
  return reference_.ranking().config().objectives.size();
}

bool JointEnvironment::train_reference(std::size_t steps, const pantheon::WeightVector& weights) {
  for (std::size_t s = 0; s < steps; ++s) {
    const auto batch = stream_.next_batch(batch_size_);
    if (batch.empty()) return false;
    reference_.step(batch, weights);
    ++steps_;
  }
  return true;
}

const EvalWindow& JointEnvironment::window(std::size_t round) const {
  return windows_[round % windows_.size()];
}

metrics::GaucReport JointEnvironment::evaluate(const pantheon::JointModel& model,
                                               const EvalWindow& w) const {
  const auto scores =
      pantheon::score_window(model.ranking(), model.pantheon(), w.logs, threads_);
  return metrics::gauc_report(scores.fused, w.logs, w.groups,
                              model.ranking().config().objectives, w.id);
}

metrics::GaucReport JointEnvironment::evaluate_base(std::size_t round) {
  const auto& w = window(round);
  auto it = base_cache_.find(w.id);
  if (it == base_cache_.end()) it = base_cache_.emplace(w.id, evaluate(base_, w)).first;
  return it->second;
}

metrics::GaucReport JointEnvironment::evaluate_reference(std::size_t round) {
  return evaluate(reference_, window(round));
}

void JointEnvironment::promote_reference() {
  base_.restore(reference_.snapshot());
  base_cache_.clear();
}

void JointEnvironment::reset_reference() { reference_.restore(base_.snapshot()); }

}  // namespace pfuse::ippo
