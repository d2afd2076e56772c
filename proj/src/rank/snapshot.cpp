#include "pfuse/rank/snapshot.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pfuse/common/error.hpp"

namespace pfuse::rank {

namespace {

using json = nlohmann::ordered_json;

json tensor_values(const nn::Tensor& t) { return json(std::vector<double>(t.values().begin(), t.values().end())); }

nn::Tensor tensor_from(const json& values, nn::Shape shape, const std::string& name) {
  auto v = values.get<std::vector<double>>();
  if (v.size() != shape.size()) {
    throw ConfigError("snapshot entry '" + name + "' has " + std::to_string(v.size()) +
                      " values for shape " + nn::to_string(shape));
  }
  return nn::Tensor(shape.rows, shape.cols, std::move(v));
}

}  // namespace

json snapshot_to_json(const Snapshot& s) {
  json j;
  j["format"] = kSnapshotFormat;
  j["version"] = kSnapshotVersion;
  j["component"] = s.component;
  j["config"] = s.config;
  j["header"] = s.header;
  j["step_count"] = s.params.step_count();
  json manifest = json::array();
  json params = json::object();
  for (const auto& [name, t] : s.params.entries()) {
    manifest.push_back({{"name", name}, {"shape", {t.rows(), t.cols()}}});
    params[name] = tensor_values(t);
  }
  j["manifest"] = std::move(manifest);
  j["params"] = std::move(params);
  json moments = json::object();
  for (const auto& [name, m] : s.params.optimizer_state()) {
    moments[name] = {{"first", tensor_values(m.first)}, {"second", tensor_values(m.second)}};
  }
  j["optimizer_state"] = std::move(moments);
  return j;
}

Snapshot snapshot_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kSnapshotFormat) {
      throw ConfigError("not a pareto-fuse snapshot");
    }
    const int version = j.at("version").get<int>();
    if (version != kSnapshotVersion) {
      throw ConfigError("unsupported snapshot version " + std::to_string(version));
    }
    Snapshot s;
    s.component = j.at("component").get<std::string>();
    s.config = j.at("config");
    s.header = j.at("header");
    for (const auto& entry : j.at("manifest")) {
      const auto name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
      if (shape.size() != 2) throw ConfigError("snapshot entry '" + name + "' has a bad shape");
      s.params.add(name, tensor_from(j.at("params").at(name), {shape[0], shape[1]}, name));
    }
    for (const auto& [name, m] : j.at("optimizer_state").items()) {
      const nn::Shape shape = s.params.get(name).shape();
      s.params.optimizer_state()[name] = {tensor_from(m.at("first"), shape, name),
                                          tensor_from(m.at("second"), shape, name)};
    }
    s.params.set_step_count(j.at("step_count").get<std::uint64_t>());
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed snapshot: ") + e.what());
  }
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& snapshot) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << snapshot_to_json(snapshot).dump() << '\n';
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingArtifact(path.string());
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  json j;
  try {
    j = json::parse(buffer.str());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse snapshot " + path.string() + ": " + e.what());
  }
  return snapshot_from_json(j);
}

json to_json(const data::ObjectiveSet& objectives) {
  json edges = json::array();
  for (const auto& e : objectives.edges()) edges.push_back({e.prerequisite, e.dependent});
  return {{"names", objectives.names()}, {"funnel", edges}};
}

data::ObjectiveSet objectives_from_json(const json& j) {
  std::vector<data::FunnelEdge> edges;
  for (const auto& e : j.at("funnel")) {
    const auto pair = e.get<std::vector<std::string>>();
    if (pair.size() != 2) throw ConfigError("funnel edge must be a [prerequisite, dependent] pair");
    edges.push_back({pair[0], pair[1]});
  }
  return data::ObjectiveSet(j.at("names").get<std::vector<std::string>>(), std::move(edges));
}

json to_json(const RankingConfig& c) {
  return {{"n_experts", c.n_experts},
          {"expert_hidden_dims", c.expert_hidden_dims},
          {"tower_hidden_dims", c.tower_hidden_dims},
          {"tower_output_dim", c.tower_output_dim},
          {"embedding_dim", c.embedding_dim},
          {"learning_rate", c.learning_rate},
          {"optimizer", std::string(nn::to_string(c.optimizer))},
          {"n_users", c.n_users},
          {"n_items", c.n_items},
          {"dense_dim", c.dense_dim},
          {"objectives", to_json(c.objectives)}};
}

RankingConfig ranking_config_from_json(const json& j) {
  try {
    RankingConfig c;
    c.n_experts = j.at("n_experts").get<std::size_t>();
    c.expert_hidden_dims = j.at("expert_hidden_dims").get<std::vector<std::size_t>>();
    c.tower_hidden_dims = j.at("tower_hidden_dims").get<std::vector<std::size_t>>();
    c.tower_output_dim = j.at("tower_output_dim").get<std::size_t>();
    c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.optimizer = nn::parse_optimizer(j.at("optimizer").get<std::string>());
    c.n_users = j.at("n_users").get<std::size_t>();
    c.n_items = j.at("n_items").get<std::size_t>();
    c.dense_dim = j.at("dense_dim").get<std::size_t>();
    c.objectives = objectives_from_json(j.at("objectives"));
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed ranking config: ") + e.what());
  }
}

Snapshot make_ranking_snapshot(const RankingModel& model) {
  Snapshot s;
  s.component = "ranking";
  s.config = to_json(model.config());
  s.params = model.params();
  return s;
}

RankingModel ranking_from_snapshot(const Snapshot& snapshot) {
  if (snapshot.component != "ranking") {
    throw ConfigError("expected a ranking snapshot, found component '" + snapshot.component + "'");
  }
  return RankingModel(ranking_config_from_json(snapshot.config), snapshot.params);
}

}  // namespace pfuse::rank
