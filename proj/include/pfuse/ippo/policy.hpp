#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pfuse/metrics/auc.hpp"
#include "pfuse/pantheon/weights.hpp"

namespace pfuse::ippo {

/// Margin a reference GAUC must clear over the base to count as better.
inline constexpr double kDominanceEpsilon = 1e-6;
/// Adjust step is kDeltaScale / N for N objectives.
inline constexpr double kDeltaScale = 0.1;

enum class ActionKind { replace_base, adjust_weight };
std::string_view to_string(ActionKind kind);

struct PolicyAction {
  ActionKind kind = ActionKind::adjust_weight;
  /// Objective whose weight is bumped; unused for replace_base.
  std::size_t target = 0;
  double delta = 0.0;

  friend bool operator==(const PolicyAction&, const PolicyAction&) = default;
};

/// One completed round: the weights the reference trained under, both GAUC
/// vectors on the shared window, the reward and the action taken.
struct RoundRecord {
  std::size_t round = 0;
  std::vector<double> weights;
  std::vector<double> weights_after;
  std::vector<double> base_gauc;
  std::vector<double> reference_gauc;
  std::string window_id;
  bool reward = false;
  PolicyAction action;
};

struct ParetoState {
  pantheon::WeightVector weights = pantheon::WeightVector::uniform(1);
  metrics::GaucReport base_report;
  std::size_t round = 0;
  std::vector<RoundRecord> history;
};

ParetoState initial_state(std::size_t n_objectives, metrics::GaucReport base_report);

/// delta = scale / n.
double adjust_delta(std::size_t n_objectives, double scale = kDeltaScale);

/// True iff the reference beats the base by more than kDominanceEpsilon on
/// every objective. Throws ContractViolation when the objective lists differ.
bool compute_reward(const metrics::GaucReport& base, const metrics::GaucReport& reference);

/// reward → replace_base; otherwise bump the objective with the largest
/// (base − reference) gap, earliest objective on ties.
PolicyAction select_action(bool reward, const metrics::GaucReport& base,
                           const metrics::GaucReport& reference, double delta);

/// Applies the action, increments the round and appends the history record.
ParetoState apply_action(const PolicyAction& action, ParetoState state, bool reward,
                         const metrics::GaucReport& base, const metrics::GaucReport& reference);

nlohmann::ordered_json to_json(const RoundRecord& record,
                               const std::vector<std::string>& objectives);

}  // namespace pfuse::ippo
