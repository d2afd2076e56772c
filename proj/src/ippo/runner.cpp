#include "pfuse/ippo/runner.hpp"

#include <filesystem>
#include <fstream>
#include <string>

#include "pfuse/common/error.hpp"

namespace pfuse::ippo {

IppoResult run_ippo(Environment& env, const IppoConfig& config) {
  const std::size_t n = env.objective_count();
  const double delta = adjust_delta(n, config.delta_scale);
  IppoResult result;
  result.state = initial_state(n, env.evaluate_base(0));
  for (std::size_t r = 0; r < config.rounds; ++r) {
    if (!env.train_reference(config.steps_per_round, result.state.weights)) {
      result.truncated = true;
      break;
    }
    const auto base = env.evaluate_base(r);
    const auto reference = env.evaluate_reference(r);
    const bool reward = compute_reward(base, reference);
    const auto action = select_action(reward, base, reference, delta);
    result.state = apply_action(action, std::move(result.state), reward, base, reference);
    if (action.kind == ActionKind::replace_base) {
      env.promote_reference();
      ++result.replacements;
    } else if (!config.warm_start) {
      env.reset_reference();
    }
  }
  return result;
}

bool improvement_chain_holds(const std::vector<RoundRecord>& history) {
  const std::vector<double>* previous = nullptr;
  for (const auto& record : history) {
    if (record.action.kind != ActionKind::replace_base) continue;
    if (previous != nullptr) {
      for (std::size_t o = 0; o < record.reference_gauc.size(); ++o) {
        if (!(record.reference_gauc[o] > (*previous)[o])) return false;
      }
    }
    previous = &record.reference_gauc;
  }
  return true;
}

void write_trail(const std::filesystem::path& path, const std::vector<RoundRecord>& history,
                 const std::vector<std::string>& objectives) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& record : history) out << to_json(record, objectives).dump() << '\n';
}

std::vector<nlohmann::ordered_json> read_trail(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact(path.string());
  std::vector<nlohmann::ordered_json> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      records.push_back(nlohmann::ordered_json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  return records;
}

}  // namespace pfuse::ippo
