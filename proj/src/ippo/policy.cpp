#include "pfuse/ippo/policy.hpp"

#include "pfuse/common/error.hpp"

namespace pfuse::ippo {

std::string_view to_string(ActionKind kind) {
  return kind == ActionKind::replace_base ? "replace_base" : "adjust_weight";
}

ParetoState initial_state(std::size_t n_objectives, metrics::GaucReport base_report) {
  ParetoState s;
  s.weights = pantheon::WeightVector::uniform(n_objectives);
  s.base_report = std::move(base_report);
  return s;
}

double adjust_delta(std::size_t n_objectives, double scale) {
  if (n_objectives == 0) throw ConfigError("adjust_delta: no objectives");
  if (!(scale > 0.0)) throw ConfigError("adjust_delta: scale must be positive");
  return scale / static_cast<double>(n_objectives);
}

namespace {

void check_comparable(const metrics::GaucReport& base, const metrics::GaucReport& reference) {
  if (base.objectives != reference.objectives || base.gauc.size() != reference.gauc.size() ||
      base.gauc.size() != base.objectives.size()) {
    throw ContractViolation("GAUC reports cover different objective sets");
  }
}

}  // namespace

bool compute_reward(const metrics::GaucReport& base, const metrics::GaucReport& reference) {
  check_comparable(base, reference);
  for (std::size_t o = 0; o < base.size(); ++o) {
    if (!(reference.gauc[o] - base.gauc[o] > kDominanceEpsilon)) return false;
  }
  return true;
}

PolicyAction select_action(bool reward, const metrics::GaucReport& base,
                           const metrics::GaucReport& reference, double delta) {
  check_comparable(base, reference);
  if (reward) return {ActionKind::replace_base, 0, 0.0};
  if (!(delta > 0.0)) throw ContractViolation("select_action: delta must be positive");
  std::size_t target = 0;
  double best_gap = base.gauc[0] - reference.gauc[0];
  for (std::size_t o = 1; o < base.size(); ++o) {
    const double gap = base.gauc[o] - reference.gauc[o];
    if (gap > best_gap) {
      best_gap = gap;
      target = o;
    }
  }
  return {ActionKind::adjust_weight, target, delta};
}

ParetoState apply_action(const PolicyAction& action, ParetoState state, bool reward,
                         const metrics::GaucReport& base, const metrics::GaucReport& reference) {
  RoundRecord record;
  record.round = state.round;
  record.weights.assign(state.weights.values().begin(), state.weights.values().end());
  record.base_gauc = base.gauc;
  record.reference_gauc = reference.gauc;
  record.window_id = reference.window_id;
  record.reward = reward;
  record.action = action;
  if (action.kind == ActionKind::replace_base) {
    state.base_report = reference;
  } else {
    if (action.target >= state.weights.size()) {
      throw ContractViolation("apply_action: target objective " + std::to_string(action.target) +
                              " out of range");
    }
    state.weights = state.weights.bumped(action.target, action.delta).normalized();
  }
  record.weights_after.assign(state.weights.values().begin(), state.weights.values().end());
  state.history.push_back(std::move(record));
  ++state.round;
  return state;
}

nlohmann::ordered_json to_json(const RoundRecord& record,
                               const std::vector<std::string>& objectives) {
  auto by_objective = [&](const std::vector<double>& values) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (std::size_t o = 0; o < objectives.size() && o < values.size(); ++o) {
      j[objectives[o]] = values[o];
    }
    return j;
  };
  nlohmann::ordered_json j;
  j["round"] = record.round;
  j["window"] = record.window_id;
  j["weights"] = by_objective(record.weights);
  j["base_gauc"] = by_objective(record.base_gauc);
  j["reference_gauc"] = by_objective(record.reference_gauc);
  j["reward"] = record.reward ? 1 : 0;
  j["action"] = to_string(record.action.kind);
  if (record.action.kind == ActionKind::adjust_weight) {
    j["target"] = objectives.at(record.action.target);
    j["delta"] = record.action.delta;
  }
  j["weights_after"] = by_objective(record.weights_after);
  return j;
}

}  // namespace pfuse::ippo
