#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "pfuse/nn/parameter_store.hpp"
#include "pfuse/rank/ranking_model.hpp"

namespace pfuse::rank {

inline constexpr int kSnapshotVersion = 1;
inline constexpr const char* kSnapshotFormat = "pareto-fuse-snapshot";

/// Self-describing model file: format tag, version, component tag, model
/// config, free-form header, shape manifest, flat parameter arrays and
/// optimizer moments. Reals use shortest round-trip formatting, so a
/// write/read cycle restores the store bit-exactly.
struct Snapshot {
  std::string component;
  nlohmann::ordered_json config;
  nlohmann::ordered_json header = nlohmann::ordered_json::object();
  nn::ParameterStore params;
};

nlohmann::ordered_json snapshot_to_json(const Snapshot& snapshot);
Snapshot snapshot_from_json(const nlohmann::ordered_json& j);

void write_snapshot(const std::filesystem::path& path, const Snapshot& snapshot);
/// Throws MissingArtifact when absent, ConfigError on a malformed file.
Snapshot read_snapshot(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const data::ObjectiveSet& objectives);
data::ObjectiveSet objectives_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const RankingConfig& config);
RankingConfig ranking_config_from_json(const nlohmann::ordered_json& j);

Snapshot make_ranking_snapshot(const RankingModel& model);
RankingModel ranking_from_snapshot(const Snapshot& snapshot);

}  // namespace pfuse::rank
