#include "pfuse/pantheon/joint.hpp"

#include <algorithm>

#include "pfuse/common/error.hpp"
#include "pfuse/common/parallel.hpp"

namespace pfuse::pantheon {

namespace {

constexpr std::size_t kWindowChunk = 1024;

using nlohmann::ordered_json;

template <typename T>
T required(const ordered_json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("pantheon config: missing key '") + key + "'");
  return j.at(key).get<T>();
}

}  // namespace

ordered_json to_json(const PantheonConfig& c) {
  ordered_json j;
  j["input"] = to_string(c.input);
  j["encoder"] = to_string(c.encoder);
  j["mlp_dims"] = c.mlp_dims;
  j["feature_dim"] = c.feature_dim;
  j["learning_rate"] = c.learning_rate;
  j["optimizer"] = nn::to_string(c.optimizer);
  j["stop_gradient"] = c.stop_gradient;
  j["debug_isolation_check"] = c.debug_isolation_check;
  j["n_users"] = c.n_users;
  j["n_items"] = c.n_items;
  j["n_objectives"] = c.n_objectives;
  j["hidden_dim"] = c.hidden_dim;
  return j;
}

PantheonConfig pantheon_config_from_json(const ordered_json& j) {
  try {
    PantheonConfig c;
    c.input = parse_input_variant(required<std::string>(j, "input"));
    c.encoder = parse_encoder_variant(required<std::string>(j, "encoder"));
    c.mlp_dims = required<std::vector<std::size_t>>(j, "mlp_dims");
    c.feature_dim = required<std::size_t>(j, "feature_dim");
    c.learning_rate = required<double>(j, "learning_rate");
    c.optimizer = nn::parse_optimizer(required<std::string>(j, "optimizer"));
    c.stop_gradient = required<bool>(j, "stop_gradient");
    c.debug_isolation_check = required<bool>(j, "debug_isolation_check");
    c.n_users = required<std::size_t>(j, "n_users");
    c.n_items = required<std::size_t>(j, "n_items");
    c.n_objectives = required<std::size_t>(j, "n_objectives");
    c.hidden_dim = required<std::size_t>(j, "hidden_dim");
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("pantheon config: ") + e.what());
  }
}

rank::Snapshot make_pantheon_snapshot(const PantheonModel& model, const WeightVector& weights) {
  rank::Snapshot s;
  s.component = "pantheon";
  s.config = to_json(model.config());
  s.header["weights"] = std::vector<double>(weights.values().begin(), weights.values().end());
  s.params = model.params();
  return s;
}

PantheonModel pantheon_from_snapshot(const rank::Snapshot& snapshot) {
  if (snapshot.component != "pantheon") {
    throw ConfigError("expected a pantheon snapshot, found component '" + snapshot.component +
                      "'");
  }
  return PantheonModel(pantheon_config_from_json(snapshot.config), snapshot.params);
}

WeightVector weights_from_snapshot(const rank::Snapshot& snapshot) {
  if (!snapshot.header.contains("weights")) {
    throw ConfigError("pantheon snapshot header carries no weights");
  }
  try {
    return WeightVector(snapshot.header.at("weights").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("pantheon snapshot weights: ") + e.what());
  }
}

JointModel::JointModel(rank::RankingModel ranking, PantheonModel pantheon)
    : ranking_(std::move(ranking)), pantheon_(std::move(pantheon)) {
  const auto& rc = ranking_.config();
  const auto& pc = pantheon_.config();
  if (rc.objectives.size() != pc.n_objectives || rc.tower_output_dim != pc.hidden_dim ||
      rc.n_users != pc.n_users || rc.n_items != pc.n_items) {
    throw ConfigError("joint model: fusion head config does not match the ranking model");
  }
}

JointStepLosses JointModel::step(std::span<const data::ImpressionLog> batch,
                                 const WeightVector& weights) {
  JointStepLosses out;
  out.ranking = ranking_.train_step(batch);
  auto fused = pantheon_.train_step(batch, ranking_, weights);
  out.pantheon_total = fused.total;
  out.pantheon = std::move(fused.per_objective);
  return out;
}

JointSnapshot JointModel::snapshot() const {
  return {ranking_.params().snapshot(), pantheon_.params().snapshot()};
}

void JointModel::restore(const JointSnapshot& snapshot) {
  ranking_.params().restore(snapshot.ranking);
  pantheon_.params().restore(snapshot.pantheon);
}

WindowScores score_window(const rank::RankingModel& ranking, const PantheonModel& pantheon,
                          std::span<const data::ImpressionLog> window, std::size_t threads) {
  WindowScores out;
  out.fused.assign(window.size(), 0.0);
  out.pxtr = nn::Tensor(window.size(), ranking.config().objectives.size());
  parallel_chunks(window.size(), kWindowChunk, threads,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    const auto logs = window.subspan(begin, end - begin);
                    const auto fused = pantheon.score(logs, ranking);
                    std::copy(fused.begin(), fused.end(), out.fused.begin() + begin);
                    const auto inferred = ranking.infer(logs);
                    for (std::size_t r = 0; r < logs.size(); ++r) {
                      const auto src = inferred.pxtr.row(r);
                      std::copy(src.begin(), src.end(), out.pxtr.row(begin + r).begin());
                    }
                  });
  return out;
}

nn::Tensor ranking_pxtr(const rank::RankingModel& ranking,
                        std::span<const data::ImpressionLog> window, std::size_t threads) {
  nn::Tensor out(window.size(), ranking.config().objectives.size());
  parallel_chunks(window.size(), kWindowChunk, threads,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    const auto inferred = ranking.infer(window.subspan(begin, end - begin));
                    for (std::size_t r = 0; r < end - begin; ++r) {
                      const auto src = inferred.pxtr.row(r);
                      std::copy(src.begin(), src.end(), out.row(begin + r).begin());
                    }
                  });
  return out;
}

}  // namespace pfuse::pantheon
