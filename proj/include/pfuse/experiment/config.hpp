#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "pfuse/data/datagen.hpp"
#include "pfuse/formula/formula.hpp"
#include "pfuse/formula/search.hpp"
#include "pfuse/ippo/joint_environment.hpp"
#include "pfuse/ippo/runner.hpp"
#include "pfuse/pantheon/pantheon.hpp"
#include "pfuse/rank/ranking_model.hpp"

namespace pfuse::experiment {

inline constexpr int kSchemaVersion = 1;

struct TrainingConfig {
  std::size_t batch_size = 16;
  /// Ranking-only steps before the fusion head joins.
  std::size_t pretrain_steps = 2000;
  /// Joint steps under uniform weights before the first IPPO round.
  std::size_t warmup_steps = 300;
  /// Times the training split may be replayed.
  std::size_t max_passes = 16;
};

struct WindowConfig {
  ippo::WindowPolicy policy = ippo::WindowPolicy::fixed;
  /// Rows per window for the rolling policy.
  std::size_t size = 2500;
};

struct FormulaConfig {
  formula::FusionFormula formula = formula::FusionFormula::toy();
  std::map<std::string, double> eval_metric_weights = {{"ctr", 2.0}, {"lvtr", 5.0}};
  std::size_t budget = 512;
  std::size_t sweeps = 3;
  std::size_t golden_iterations = 16;
};

/// Everything one experiment needs; together with the binary it fixes every
/// output byte.
struct ExperimentConfig {
  std::uint64_t seed = 20240611;
  std::filesystem::path output_dir = "pareto-fuse-out";
  data::ObjectiveSet objectives = data::ObjectiveSet::defaults();
  data::DatagenConfig datagen;
  rank::RankingConfig ranking;
  pantheon::PantheonConfig pantheon;
  TrainingConfig training;
  ippo::IppoConfig ippo;
  WindowConfig window;
  FormulaConfig formula;

  /// Ranking config with vocabulary, feature and objective fields filled in.
  rank::RankingConfig resolved_ranking() const;
  pantheon::PantheonConfig resolved_pantheon() const;
  /// Throws ConfigError on any inconsistency.
  void validate() const;
};

/// Parses a config document. Missing sections and keys keep their defaults;
/// unknown keys and a wrong schema_version raise ConfigError.
ExperimentConfig config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const ExperimentConfig& config);

/// Throws MissingArtifact for an absent file and ConfigError for bad content.
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace pfuse::experiment
