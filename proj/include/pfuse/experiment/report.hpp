#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace pfuse::experiment {

/// Offline comparison on the evaluation window: per-objective GAUC of the
/// ranking model's own predictions, the tuned formula and the fusion head,
/// plus Kendall τ of every ranking prediction against both fused scores.
struct EvaluationTable {
  std::string window_id;
  std::size_t rows = 0;
  std::vector<std::string> objectives;
  std::vector<double> ranking;
  std::vector<double> formula;
  std::vector<double> pantheon;
  std::vector<double> kendall_formula;
  std::vector<double> kendall_pantheon;

  /// pantheon − formula per objective.
  std::vector<double> improvement() const;
  double average_improvement() const;
  std::size_t strictly_improved() const;
};

nlohmann::ordered_json to_json(const EvaluationTable& table);
EvaluationTable evaluation_from_json(const nlohmann::ordered_json& j);

/// Shortest decimal that reads back to the same double.
std::string format_double(double value);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);
/// Throws MissingArtifact when absent, ConfigError when malformed.
nlohmann::ordered_json read_json(const std::filesystem::path& path);

/// Method rows (ranking, formula, pantheon, improvement) × objectives.
std::string gauc_table_csv(const EvaluationTable& table);
/// Objective rows × (formula, pantheon) Kendall τ.
std::string kendall_table_csv(const EvaluationTable& table);
/// One row per IPPO round: weights, both GAUC vectors, reward, action.
std::string rounds_csv(const std::vector<std::string>& objectives,
                       const std::vector<nlohmann::ordered_json>& trail);

}  // namespace pfuse::experiment
