#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pfuse/data/stream.hpp"
#include "pfuse/ippo/runner.hpp"
#include "pfuse/metrics/auc.hpp"
#include "pfuse/pantheon/joint.hpp"

namespace pfuse::ippo {

enum class WindowPolicy { fixed, rolling };
WindowPolicy parse_window_policy(std::string_view name);
std::string_view to_string(WindowPolicy policy);

struct EvalWindow {
  std::string id;
  std::vector<data::ImpressionLog> logs;
  metrics::UserGroups groups;
};

/// Splits the held-out split into evaluation windows: one window holding
/// everything for the fixed policy, consecutive slices of `window_size` rows
/// for the rolling policy (round r uses slice r mod count).
std::vector<EvalWindow> make_windows(const std::vector<data::ImpressionLog>& eval,
                                     WindowPolicy policy, std::size_t window_size);

/// Environment backed by a live joint model (the reference) and a frozen copy
/// (the base), fed by a training stream and scored on evaluation windows.
class JointEnvironment final : public Environment {
 public:
  JointEnvironment(pantheon::JointModel& reference, data::StreamCursor& stream,
                   std::vector<EvalWindow> windows, std::size_t batch_size, std::size_t threads);

  std::size_t objective_count() const override;
  bool train_reference(std::size_t steps, const pantheon::WeightVector& weights) override;
  metrics::GaucReport evaluate_base(std::size_t round) override;
  metrics::GaucReport evaluate_reference(std::size_t round) override;
  void promote_reference() override;
  void reset_reference() override;

  const pantheon::JointModel& base() const noexcept { return base_; }
  std::size_t steps_trained() const noexcept { return steps_; }

 private:
  const EvalWindow& window(std::size_t round) const;
  metrics::GaucReport evaluate(const pantheon::JointModel& model, const EvalWindow& w) const;

  pantheon::JointModel& reference_;
  pantheon::JointModel base_;
  data::StreamCursor& stream_;
  std::vector<EvalWindow> windows_;
  std::size_t batch_size_;
  std::size_t threads_;
  std::size_t steps_ = 0;
  std::map<std::string, metrics::GaucReport> base_cache_;
};

}  // namespace pfuse::ippo
