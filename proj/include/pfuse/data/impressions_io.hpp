#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pfuse/data/datagen.hpp"

namespace pfuse::data {

/// One JSON object per line: user_id, item_id, features, labels (name → 0/1),
/// ordinal. Reals are written with shortest round-trip precision, so reading
/// a file back reproduces the logs bit-exactly.
std::string to_jsonl_line(const ImpressionLog& log, const ObjectiveSet& objectives);
ImpressionLog from_jsonl_line(const std::string& line, const ObjectiveSet& objectives);

void write_jsonl(const std::filesystem::path& path, const std::vector<ImpressionLog>& logs,
                 const ObjectiveSet& objectives);
/// Throws MissingArtifact when the file does not exist.
std::vector<ImpressionLog> read_jsonl(const std::filesystem::path& path,
                                      const ObjectiveSet& objectives);

}  // namespace pfuse::data
