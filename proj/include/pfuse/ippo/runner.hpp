#pragma once

#include <cstddef>
#include <filesystem>
#include <string_view>
#include <vector>

#include "pfuse/ippo/policy.hpp"
#include "pfuse/metrics/auc.hpp"
#include "pfuse/pantheon/weights.hpp"

namespace pfuse::ippo {

/// Everything the round loop needs from the models and the data.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::size_t objective_count() const = 0;
  /// Trains the reference for `steps` steps under `weights`. Returns false if
  /// the stream ran out first.
  virtual bool train_reference(std::size_t steps, const pantheon::WeightVector& weights) = 0;
  virtual metrics::GaucReport evaluate_base(std::size_t round) = 0;
  virtual metrics::GaucReport evaluate_reference(std::size_t round) = 0;
  /// base := reference.
  virtual void promote_reference() = 0;
  /// reference := base.
  virtual void reset_reference() = 0;
};

struct IppoConfig {
  std::size_t rounds = 20;
  std::size_t steps_per_round = 500;
  double delta_scale = kDeltaScale;
  /// Keep training the reference from its own parameters after an adjust
  /// action; false restarts it from the base.
  bool warm_start = true;
};

struct IppoResult {
  ParetoState state;
  bool truncated = false;
  std::size_t replacements = 0;
};

IppoResult run_ippo(Environment& env, const IppoConfig& config);

/// True iff every replacement's base vector strictly improves on the
/// previous replacement's, objective by objective.
bool improvement_chain_holds(const std::vector<RoundRecord>& history);

void write_trail(const std::filesystem::path& path, const std::vector<RoundRecord>& history,
                 const std::vector<std::string>& objectives);
std::vector<nlohmann::ordered_json> read_trail(const std::filesystem::path& path);

}  // namespace pfuse::ippo
