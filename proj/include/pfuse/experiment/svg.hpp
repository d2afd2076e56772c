#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pfuse/experiment/report.hpp"

namespace pfuse::experiment {

/// Grouped bars: one group per objective, one bar per method.
std::string gauc_bars_svg(const EvaluationTable& table);
/// One polyline per objective weight over IPPO rounds; replacement rounds
/// are marked on the axis.
std::string weight_trajectories_svg(const std::vector<std::string>& objectives,
                                    const std::vector<nlohmann::ordered_json>& trail);
/// Kendall τ of each ranking prediction against both fused scores.
std::string kendall_table_svg(const EvaluationTable& table);

}  // namespace pfuse::experiment
