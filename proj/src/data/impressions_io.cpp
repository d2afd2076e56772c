#include "pfuse/data/impressions_io.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "pfuse/common/error.hpp"

namespace pfuse::data {

std::string to_jsonl_line(const ImpressionLog& log, const ObjectiveSet& objectives) {
  nlohmann::ordered_json j;
  j["user_id"] = log.user_id;
  j["item_id"] = log.item_id;
  j["features"] = log.dense_features;
  nlohmann::ordered_json labels = nlohmann::ordered_json::object();
  for (std::size_t o = 0; o < objectives.size(); ++o) {
    labels[objectives.name(o)] = static_cast<int>(log.labels.at(o));
  }
  j["labels"] = std::move(labels);
  j["ordinal"] = log.ordinal;
  return j.dump();
}

ImpressionLog from_jsonl_line(const std::string& line, const ObjectiveSet& objectives) {
  ImpressionLog log;
  try {
    const auto j = nlohmann::json::parse(line);
    log.user_id = j.at("user_id").get<std::int64_t>();
    log.item_id = j.at("item_id").get<std::int64_t>();
    log.dense_features = j.at("features").get<std::vector<double>>();
    log.ordinal = j.at("ordinal").get<std::int64_t>();
    const auto& labels = j.at("labels");
    log.labels.assign(objectives.size(), 0);
    for (std::size_t o = 0; o < objectives.size(); ++o) {
      const int v = labels.at(objectives.name(o)).get<int>();
      if (v != 0 && v != 1) throw ConfigError("label must be 0 or 1");
      log.labels[o] = static_cast<std::uint8_t>(v);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed impression record: ") + e.what());
  }
  return log;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<ImpressionLog>& logs,
                 const ObjectiveSet& objectives) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (const auto& log : logs) out << to_jsonl_line(log, objectives) << '\n';
}

std::vector<ImpressionLog> read_jsonl(const std::filesystem::path& path,
                                      const ObjectiveSet& objectives) {
  if (!std::filesystem::exists(path)) throw MissingArtifact(path.string());
  std::ifstream in(path, std::ios::binary);
  std::vector<ImpressionLog> logs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    logs.push_back(from_jsonl_line(line, objectives));
  }
  return logs;
}

}  // namespace pfuse::data
