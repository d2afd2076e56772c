#include "pfuse/data/datagen.hpp"

#include <algorithm>
#include <cmath>

#include "pfuse/common/error.hpp"
#include "pfuse/common/rng.hpp"
#include "pfuse/nn/layers.hpp"

namespace pfuse::data {

namespace {

double bilinear(const nn::Tensor& a, const std::vector<double>& u, const std::vector<double>& i) {
  double total = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double row = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) row += a(r, c) * i[c];
    total += u[r] * row;
  }
  return total;
}

std::size_t draw_user(const Universe& universe, Rng& rng) {
  const double x = rng.uniform() * universe.activity_cdf.back();
  auto it = std::upper_bound(universe.activity_cdf.begin(), universe.activity_cdf.end(), x);
  const auto idx = static_cast<std::size_t>(it - universe.activity_cdf.begin());
  return std::min(idx, universe.users.size() - 1);
}

}  // namespace

double Universe::raw_probability(std::size_t objective, const UserProfile& u,
                                 const ItemProfile& i) const {
  const ObjectiveModel& m = models.at(objective);
  return nn::sigmoid(bilinear(m.affinity, u.latent, i.latent) + m.bias +
                     m.popularity_weight * i.popularity_bias);
}

Universe generate_universe(std::uint64_t seed, const DatagenConfig& config,
                           const ObjectiveSet& objectives) {
  if (config.n_users < 1 || config.n_items < 1 || config.latent_dim < 1) {
    throw ConfigError("generate_universe: n_users, n_items and latent_dim must be >= 1");
  }
  if (!(config.shared_affinity >= 0.0 && config.shared_affinity <= 1.0)) {
    throw ConfigError("generate_universe: shared_affinity must lie in [0, 1]");
  }
  Universe u;
  u.objectives = objectives;
  u.latent_dim = config.latent_dim;
  u.feature_noise = config.feature_noise;
  const std::size_t k = config.latent_dim;

  Rng rng(derive_seed(seed, "universe"));
  u.users.resize(config.n_users);
  for (std::size_t i = 0; i < config.n_users; ++i) {
    UserProfile& p = u.users[i];
    p.user_id = static_cast<std::int64_t>(i + 1);
    p.latent.resize(k);
    for (double& v : p.latent) v = rng.normal();
    p.activity = std::exp(rng.normal(0.0, config.activity_sigma));
  }
  u.items.resize(config.n_items);
  for (std::size_t i = 0; i < config.n_items; ++i) {
    ItemProfile& p = u.items[i];
    p.item_id = static_cast<std::int64_t>(i + 1);
    p.latent.resize(k);
    for (double& v : p.latent) v = rng.normal();
    p.popularity_bias = rng.normal();
  }
  double running = 0.0;
  u.activity_cdf.reserve(u.users.size());
  for (const auto& p : u.users) {
    running += p.activity;
    u.activity_cdf.push_back(running);
  }

  // uᵀAi with unit-normal latents has variance k²·σ², so σ = scale / k.
  const double entry_std = config.affinity_scale / static_cast<double>(k);
  const double shared_w = std::sqrt(config.shared_affinity);
  const double own_w = std::sqrt(1.0 - config.shared_affinity);
  nn::Tensor shared(k, k);
  for (double& v : shared.values()) v = rng.normal(0.0, entry_std);
  u.models.resize(objectives.size());
  for (std::size_t o = 0; o < objectives.size(); ++o) {
    ObjectiveModel& m = u.models[o];
    m.affinity = nn::Tensor(k, k);
    for (std::size_t e = 0; e < k * k; ++e) {
      m.affinity[e] = shared_w * shared[e] + own_w * rng.normal(0.0, entry_std);
    }
    m.popularity_weight = rng.uniform(0.2, 0.8);
    auto it = config.target_rates.find(objectives.name(o));
    if (it == config.target_rates.end()) {
      throw ConfigError("no target rate configured for objective '" + objectives.name(o) + "'");
    }
    if (!(it->second > 0.0 && it->second < 1.0)) {
      throw ConfigError("target rate for '" + objectives.name(o) + "' must lie in (0, 1)");
    }
    m.target_rate = it->second;
  }

  // Fit biases in funnel order on a fixed Monte-Carlo sample of exposures.
  const std::size_t n_mc = std::max<std::size_t>(config.calibration_samples, 1);
  Rng mc(derive_seed(seed, "bias-calibration"));
  std::vector<std::size_t> mc_user(n_mc), mc_item(n_mc);
  for (std::size_t s = 0; s < n_mc; ++s) {
    mc_user[s] = draw_user(u, mc);
    mc_item[s] = mc.index(u.items.size());
  }
  std::vector<std::vector<std::uint8_t>> mc_labels(objectives.size(),
                                                   std::vector<std::uint8_t>(n_mc, 0));
  std::vector<double> logits(n_mc), gate(n_mc);
  for (std::size_t o : objectives.topological_order()) {
    ObjectiveModel& m = u.models[o];
    for (std::size_t s = 0; s < n_mc; ++s) {
      const auto& up = u.users[mc_user[s]];
      const auto& ip = u.items[mc_item[s]];
      logits[s] = bilinear(m.affinity, up.latent, ip.latent) +
                  m.popularity_weight * ip.popularity_bias;
      bool open = true;
      for (std::size_t pre : objectives.prerequisites(o)) open = open && mc_labels[pre][s];
      gate[s] = open ? 1.0 : 0.0;
    }
    auto rate_at = [&](double b) {
      double total = 0.0;
      for (std::size_t s = 0; s < n_mc; ++s) total += gate[s] * nn::sigmoid(logits[s] + b);
      return total / static_cast<double>(n_mc);
    };
    double lo = -40.0, hi = 40.0;
    if (rate_at(hi) < m.target_rate) {
      throw ConfigError("target rate " + std::to_string(m.target_rate) + " for '" +
                        objectives.name(o) + "' exceeds the rate of its funnel prerequisites");
    }
    for (int iter = 0; iter < 100; ++iter) {
      const double mid = 0.5 * (lo + hi);
      (rate_at(mid) < m.target_rate ? lo : hi) = mid;
    }
    m.bias = 0.5 * (lo + hi);
    for (std::size_t s = 0; s < n_mc; ++s) {
      const double p = nn::sigmoid(logits[s] + m.bias);
      mc_labels[o][s] = (gate[s] > 0.0 && mc.uniform() < p) ? 1 : 0;
    }
  }
  return u;
}

std::vector<ImpressionLog> stream_impressions(const Universe& universe, std::uint64_t seed,
                                              std::size_t n_impressions,
                                              std::int64_t first_ordinal) {
  std::vector<ImpressionLog> out;
  out.reserve(n_impressions);
  Rng rng(derive_seed(seed, "impressions"));
  const std::size_t k = universe.latent_dim;
  const std::size_t n_obj = universe.objectives.size();
  const auto& order = universe.objectives.topological_order();
  for (std::size_t n = 0; n < n_impressions; ++n) {
    const UserProfile& user = universe.users[draw_user(universe, rng)];
    const ItemProfile& item = universe.items[rng.index(universe.items.size())];
    ImpressionLog log;
    log.user_id = user.user_id;
    log.item_id = item.item_id;
    log.ordinal = first_ordinal + static_cast<std::int64_t>(n);
    log.dense_features.resize(3 * k);
    for (std::size_t d = 0; d < k; ++d) {
      log.dense_features[d] = user.latent[d] + rng.normal(0.0, universe.feature_noise);
    }
    for (std::size_t d = 0; d < k; ++d) {
      log.dense_features[k + d] = item.latent[d] + rng.normal(0.0, universe.feature_noise);
    }
    for (std::size_t d = 0; d < k; ++d) {
      log.dense_features[2 * k + d] =
          user.latent[d] * item.latent[d] + rng.normal(0.0, universe.feature_noise);
    }
    log.labels.assign(n_obj, 0);
    for (std::size_t o : order) {
      const double p = universe.raw_probability(o, user, item);
      const bool raw = rng.uniform() < p;
      bool open = true;
      for (std::size_t pre : universe.objectives.prerequisites(o)) open = open && log.labels[pre];
      log.labels[o] = (raw && open) ? 1 : 0;
    }
    out.push_back(std::move(log));
  }
  return out;
}

bool respects_funnel(const ImpressionLog& log, const ObjectiveSet& objectives) {
  for (std::size_t o = 0; o < objectives.size(); ++o) {
    if (!log.labels.at(o)) continue;
    for (std::size_t pre : objectives.prerequisites(o)) {
      if (!log.labels.at(pre)) return false;
    }
  }
  return true;
}

std::vector<double> positive_rates(const std::vector<ImpressionLog>& logs,
                                   std::size_t n_objectives) {
  std::vector<double> rates(n_objectives, 0.0);
  if (logs.empty()) return rates;
  for (const auto& log : logs) {
    for (std::size_t o = 0; o < n_objectives; ++o) rates[o] += log.labels.at(o);
  }
  for (double& r : rates) r /= static_cast<double>(logs.size());
  return rates;
}

}  // namespace pfuse::data
